use proptest::prelude::*;
use rosenblatt::charfn::{laplace_lower_bound, log_laplace, moments, LogLTRepresentation};
use rosenblatt::spectrum::{choose_m, Spectrum};

#[test]
fn representations_agree_on_grids() {
    for a in [0.1, 0.25, 0.4] {
        let spec = Spectrum::build(a, choose_m(a, 1e-4).unwrap()).unwrap();
        let lo = laplace_lower_bound(&spec) + 1e-3;
        let mut worst = 0.0_f64;
        for i in 0..50 {
            let s = lo + (5.0 - lo) * i as f64 / 49.0;
            let vals: Vec<f64> = LogLTRepresentation::ALL
                .iter()
                .map(|&r| log_laplace(&spec, s, r).unwrap())
                .collect();
            let (min, max) = vals
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
            worst = worst.max(max - min);
        }
        assert!(worst < 1e-10, "a={a}: spread {worst:e}");
    }
}

#[test]
fn derivatives_at_origin_give_moments() {
    let h = 1e-4;
    for a in [0.1, 0.3, 0.45] {
        let spec = Spectrum::build(a, 200).unwrap();
        let f = |s: f64| log_laplace(&spec, s, LogLTRepresentation::Direct).unwrap();
        let d1 = (f(h) - f(-h)) / (2.0 * h);
        let d2 = (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h);
        let m = moments(&spec);
        assert!(d1.abs() < 1e-5);
        assert!((d2 - m.m2).abs() < 1e-5, "a={a}: {d2}");
        assert!((d2 - 1.0).abs() < 1e-5 || spec.is_clamped());
    }
}

proptest! {
    #[test]
    fn direct_and_integral_agree(a in 0.05f64..0.49, m in 1usize..150, t in 0.0f64..1.0) {
        let spec = Spectrum::build(a, m).unwrap();
        let lo = laplace_lower_bound(&spec);
        let s = lo * (1.0 - t) * 0.99 + 4.0 * t;
        let d = log_laplace(&spec, s, LogLTRepresentation::Direct).unwrap();
        let i = log_laplace(&spec, s, LogLTRepresentation::Integral).unwrap();
        prop_assert!((d - i).abs() < 1e-10);
    }

    #[test]
    fn laplace_transform_is_log_convex(a in 0.05f64..0.49, s in -0.5f64..3.0) {
        let spec = Spectrum::build(a, 60).unwrap();
        let f = |x: f64| log_laplace(&spec, x, LogLTRepresentation::Direct).unwrap();
        let h = 1e-2;
        prop_assert!(f(s + h) - 2.0 * f(s) + f(s - h) >= -1e-14);
    }
}
