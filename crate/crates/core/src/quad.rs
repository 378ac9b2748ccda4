//! Adaptive Gauss–Kronrod (10/21 point) quadrature.
//!
//! Besides the usual scalar integrator there is a vector-valued variant that
//! shares every integrand evaluation across many outputs. The Fourier
//! inversion code uses it to evaluate the characteristic function once per
//! node while producing a whole grid of densities.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_980_221_203,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Tolerances and limits for the adaptive integrators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_intervals: 4000,
        }
    }
}

impl QuadConfig {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
}

struct Segment {
    a: f64,
    b: f64,
    values: Vec<f64>,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One 21-point Kronrod rule on `[a, b]` for a vector integrand. Returns the
/// Kronrod estimates and the largest per-component |K - G| difference.
fn gk21_vec<F>(f: &mut F, dim: usize, a: f64, b: f64, buf: &mut [f64]) -> (Vec<f64>, f64)
where
    F: FnMut(f64, &mut [f64]),
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kron = vec![0.0; dim];
    let mut gauss = vec![0.0; dim];

    f(center, buf);
    for d in 0..dim {
        kron[d] = WGK[10] * buf[d];
    }
    for (j, (&x, &wk)) in XGK.iter().zip(WGK.iter()).take(10).enumerate() {
        let dx = half * x;
        for sign in [-1.0, 1.0] {
            f(center + sign * dx, buf);
            for d in 0..dim {
                kron[d] += wk * buf[d];
                if j % 2 == 1 {
                    gauss[d] += WG[j / 2] * buf[d];
                }
            }
        }
    }
    let mut err: f64 = 0.0;
    for d in 0..dim {
        kron[d] *= half;
        gauss[d] *= half;
        err = err.max((kron[d] - gauss[d]).abs());
    }
    (kron, err)
}

/// Adaptive integration of a vector-valued integrand over `[a, b]` split at
/// the given interior `breaks`. Convergence is judged on the worst component.
/// `f(x, out)` must fill `out[..dim]`.
pub fn integrate_vec<F>(
    mut f: F,
    dim: usize,
    a: f64,
    b: f64,
    breaks: &[f64],
    cfg: &QuadConfig,
) -> Result<(Vec<f64>, f64)>
where
    F: FnMut(f64, &mut [f64]),
{
    let mut buf = vec![0.0; dim];
    let mut points = vec![a];
    let mut interior: Vec<f64> = breaks.iter().copied().filter(|&p| p > a && p < b).collect();
    interior.sort_by(f64::total_cmp);
    points.extend(interior);
    points.push(b);

    let mut heap = BinaryHeap::new();
    let mut total = vec![0.0; dim];
    let mut total_err = 0.0;
    for w in points.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let (values, error) = gk21_vec(&mut f, dim, w[0], w[1], &mut buf);
        for d in 0..dim {
            total[d] += values[d];
        }
        total_err += error;
        heap.push(Segment { a: w[0], b: w[1], values, error });
    }

    loop {
        let scale = total.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let target = cfg.abs_tol.max(cfg.rel_tol * scale);
        if total_err <= target {
            return Ok((total, total_err));
        }
        if heap.len() >= cfg.max_intervals {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // Interval collapsed to adjacent floats; nothing more to gain.
            heap.push(worst);
            break;
        }
        let (left, el) = gk21_vec(&mut f, dim, worst.a, mid, &mut buf);
        let (right, er) = gk21_vec(&mut f, dim, mid, worst.b, &mut buf);
        for d in 0..dim {
            total[d] += left[d] + right[d] - worst.values[d];
        }
        total_err += el + er - worst.error;
        heap.push(Segment { a: worst.a, b: mid, values: left, error: el });
        heap.push(Segment { a: mid, b: worst.b, values: right, error: er });
    }

    // Re-sum from scratch to shed accumulated rounding before reporting.
    let mut exact = vec![0.0; dim];
    let mut err = 0.0;
    for s in heap.iter() {
        for d in 0..dim {
            exact[d] += s.values[d];
        }
        err += s.error;
    }
    let scale = exact.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if err <= cfg.abs_tol.max(cfg.rel_tol * scale) {
        return Ok((exact, err));
    }
    Err(Error::Numerical {
        message: format!("adaptive quadrature on [{a}, {b}] did not converge"),
        achieved: err,
    })
}

/// Adaptive integration of a scalar integrand.
pub fn integrate<F>(mut f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<QuadResult>
where
    F: FnMut(f64) -> f64,
{
    integrate_with_breaks(&mut f, a, b, &[], cfg)
}

pub fn integrate_with_breaks<F>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    cfg: &QuadConfig,
) -> Result<QuadResult>
where
    F: FnMut(f64) -> f64,
{
    let mut evaluations = 0;
    let (values, abs_error) = integrate_vec(
        |x, out| {
            evaluations += 1;
            out[0] = f(x);
        },
        1,
        a,
        b,
        breaks,
        cfg,
    )?;
    Ok(QuadResult {
        value: values[0],
        abs_error,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let r = integrate(|x| x.powi(7) - 3.0 * x * x, 0.0, 2.0, &QuadConfig::default()).unwrap();
        assert!((r.value - (32.0 - 8.0)).abs() < 1e-12);
        assert_eq!(r.evaluations, 21);
    }

    #[test]
    fn oscillatory_integrand() {
        let cfg = QuadConfig::new(1e-12, 1e-12);
        let r = integrate(|x| (30.0 * x).cos() * (-x).exp(), 0.0, 10.0, &cfg).unwrap();
        // closed form of int_0^10 e^{-x} cos(30x) dx
        let w: f64 = 30.0;
        let e = (-10.0_f64).exp();
        let exact = (1.0 - e * ((w * 10.0).cos() - w * (w * 10.0).sin())) / (1.0 + w * w);
        assert!((r.value - exact).abs() < 1e-11, "{} vs {}", r.value, exact);
    }

    #[test]
    fn endpoint_singularity_with_breaks() {
        let cfg = QuadConfig::new(1e-10, 1e-10);
        let r = integrate_with_breaks(|x| x.powf(-0.5), 0.0, 4.0, &[1.0], &cfg).unwrap();
        assert!((r.value - 4.0).abs() < 1e-8);
    }

    #[test]
    fn vector_components_share_nodes() {
        let cfg = QuadConfig::new(1e-12, 1e-12);
        let (v, _) = integrate_vec(
            |x, out| {
                out[0] = x.sin();
                out[1] = x.exp();
            },
            2,
            0.0,
            1.0,
            &[],
            &cfg,
        )
        .unwrap();
        assert!((v[0] - (1.0 - 1.0_f64.cos())).abs() < 1e-13);
        assert!((v[1] - (1.0_f64.exp() - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn reports_non_convergence() {
        let cfg = QuadConfig {
            abs_tol: 1e-14,
            rel_tol: 0.0,
            max_intervals: 3,
        };
        let err = integrate(|x| (1.0 / x).sin(), 1e-6, 1.0, &cfg).unwrap_err();
        assert!(matches!(err, Error::Numerical { .. }));
    }
}
