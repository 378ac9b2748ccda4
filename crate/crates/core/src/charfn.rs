//! Laplace transform, characteristic function and moments of the truncated
//! Rosenblatt law `V_ε = σ_ε ε₀ + Σ_{n≤M} λ_n (ε_n² - 1)`.
//!
//! The log-Laplace transform is available in five algebraically equivalent
//! forms. They exist mainly so that each can serve as a check on the
//! others; [`LogLTRepresentation::Direct`] is the one to use for speed.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quad::{integrate, QuadConfig};
use crate::spectrum::{lambda_pow_sum_exact, Spectrum};

/// Absolute increment below which the inner series of the expansion-based
/// representations are stopped.
pub const SERIES_TOL: f64 = 1e-15;
/// Hard cap on inner-series terms per eigenvalue.
pub const SERIES_MAX_TERMS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogLTRepresentation {
    /// `-(½ ln(1 + 2λs) - λs)` summed over the spectrum.
    Direct,
    /// Odd-power expansion in `λs / (1 + λs)`.
    DomainScaled,
    /// Ramanujan's series for `1/ln x + 1/(1 - x)`.
    Ramanujan,
    /// Bradley's square-root iteration series.
    RamanujanBradley,
    /// Integral of `Σ 2λ²u / (2λu + 1)` from 0 to `s`.
    Integral,
}

impl LogLTRepresentation {
    pub const ALL: [LogLTRepresentation; 5] = [
        LogLTRepresentation::Direct,
        LogLTRepresentation::DomainScaled,
        LogLTRepresentation::Ramanujan,
        LogLTRepresentation::RamanujanBradley,
        LogLTRepresentation::Integral,
    ];
}

/// Left end of the domain of the Laplace transform, `-1 / (2 λ_max)`.
pub fn laplace_lower_bound(spec: &Spectrum) -> f64 {
    let l = spec.largest();
    if l > 0.0 {
        -1.0 / (2.0 * l)
    } else {
        f64::NEG_INFINITY
    }
}

/// `ln E e^{-sV_ε}` using the requested representation.
pub fn log_laplace(spec: &Spectrum, s: f64, rep: LogLTRepresentation) -> Result<f64> {
    let lower = laplace_lower_bound(spec);
    if !(s > lower) || !s.is_finite() {
        return Err(domain(format!(
            "Laplace transform requires s > {lower} (branch point), got {s}"
        )));
    }
    let gaussian = 0.5 * s * s * spec.sigma_eps2;
    let chaos = match rep {
        LogLTRepresentation::Direct => spec.lambdas.iter().map(|&l| direct_term(l * s)).sum(),
        LogLTRepresentation::DomainScaled => sum_terms(spec, s, domain_scaled_term)?,
        LogLTRepresentation::Ramanujan => sum_terms(spec, s, ramanujan_term)?,
        LogLTRepresentation::RamanujanBradley => sum_terms(spec, s, bradley_term)?,
        LogLTRepresentation::Integral => integral_form(spec, s)?,
    };
    Ok(gaussian + chaos)
}

fn sum_terms(spec: &Spectrum, s: f64, term: fn(f64) -> Result<f64>) -> Result<f64> {
    spec.lambdas.iter().map(|&l| term(l * s)).sum()
}

fn direct_term(x: f64) -> f64 {
    -(0.5 * (2.0 * x).ln_1p() - x)
}

fn series_exhausted(x: f64) -> Error {
    Error::Numerical {
        message: format!("inner series at λs = {x} hit the {SERIES_MAX_TERMS}-term cap"),
        achieved: f64::NAN,
    }
}

// x²/(1+x) - Σ_{k≥2} r^{2k-1}/(2k-1), r = x/(1+x)
fn domain_scaled_term(x: f64) -> Result<f64> {
    let r = x / (1.0 + x);
    let r2 = r * r;
    let mut power = r; // r^{2k-1}
    let mut sum = 0.0;
    for k in 2..SERIES_MAX_TERMS {
        power *= r2;
        let inc = power / (2 * k - 1) as f64;
        sum += inc;
        if inc.abs() < SERIES_TOL {
            return Ok(x * x / (1.0 + x) - sum);
        }
    }
    Err(series_exhausted(x))
}

// x ln(1+2x) Σ_{k≥1} 1 / (2^k (1 + (1+2x)^{2^{-k}}))
fn ramanujan_term(x: f64) -> Result<f64> {
    if x == 0.0 {
        return Ok(0.0);
    }
    let ln_y = (2.0 * x).ln_1p();
    let mut scale = 1.0;
    let mut sum = 0.0;
    for _ in 1..SERIES_MAX_TERMS {
        scale *= 0.5;
        let inc = scale / (1.0 + (ln_y * scale).exp());
        sum += inc;
        if inc.abs() * (x * ln_y).abs() < SERIES_TOL {
            return Ok(x * ln_y * sum);
        }
    }
    Err(series_exhausted(x))
}

// ½ Σ_{k≥1} 2^{k-1} ((1+2x)^{2^{-k}} - 1)²
fn bradley_term(x: f64) -> Result<f64> {
    if x == 0.0 {
        return Ok(0.0);
    }
    let ln_y = (2.0 * x).ln_1p();
    let mut scale = 1.0;
    let mut weight = 0.5;
    let mut sum = 0.0;
    for _ in 1..SERIES_MAX_TERMS {
        scale *= 0.5;
        weight *= 2.0;
        let d = (ln_y * scale).exp_m1();
        let inc = weight * d * d;
        sum += inc;
        if inc.abs() < SERIES_TOL {
            return Ok(0.5 * sum);
        }
    }
    Err(series_exhausted(x))
}

fn integral_form(spec: &Spectrum, s: f64) -> Result<f64> {
    if s == 0.0 {
        return Ok(0.0);
    }
    let integrand = |u: f64| {
        spec.lambdas
            .iter()
            .map(|&l| 2.0 * l * l * u / (2.0 * l * u + 1.0))
            .sum::<f64>()
    };
    let cfg = QuadConfig {
        abs_tol: 1e-12,
        rel_tol: 1e-13,
        max_intervals: 10_000,
    };
    // orient the interval so the integrator always sees a < b
    let r = if s > 0.0 {
        integrate(integrand, 0.0, s, &cfg)?.value
    } else {
        -integrate(integrand, s, 0.0, &cfg)?.value
    };
    Ok(r)
}

/// Characteristic function `E e^{izV_ε}`.
pub fn charfn_eps(spec: &Spectrum, z: f64) -> Complex64 {
    log_charfn(spec, z).exp()
}

/// `ln φ_ε(z) = -z²σ_ε²/2 - Σ (½ ln(1 - 2iλz) + iλz)` on the principal branch.
pub fn log_charfn(spec: &Spectrum, z: f64) -> Complex64 {
    let mut re = -0.5 * z * z * spec.sigma_eps2;
    let mut im = 0.0;
    for &l in &spec.lambdas {
        let t = 2.0 * l * z;
        // ln(1 - it) = ½ ln(1 + t²) - i atan(t)
        re -= 0.25 * (t * t).ln_1p();
        im -= -0.5 * t.atan() + l * z;
    }
    Complex64::new(re, im)
}

/// Raw moments of `V_ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    pub m1: f64,
    pub m2: f64,
    /// Third moment, with the neglected `Σ_{n>M} λ³` restored from the closed
    /// form when tail completion is on.
    pub m3: f64,
    /// Third moment of the truncated spectrum, `8 Σ_{n≤M} λ³`.
    pub m3_truncated: f64,
    pub m4: f64,
}

impl MomentSet {
    pub fn variance(&self) -> f64 {
        self.m2 - self.m1 * self.m1
    }

    pub fn skewness(&self) -> f64 {
        self.m3 / self.variance().powf(1.5)
    }
}

/// Moments with tail completion of the third moment.
pub fn moments(spec: &Spectrum) -> MomentSet {
    moments_with(spec, true)
}

pub fn moments_with(spec: &Spectrum, complete_tail: bool) -> MomentSet {
    let k2 = 2.0 * spec.power_sum(2) + spec.sigma_eps2;
    let p3 = spec.power_sum(3);
    let m3_truncated = 8.0 * p3;
    let m3 = if complete_tail {
        match lambda_pow_sum_exact(spec.a, 3) {
            Ok(total) => 8.0 * p3.max(total),
            Err(_) => m3_truncated,
        }
    } else {
        m3_truncated
    };
    MomentSet {
        m1: 0.0,
        m2: k2,
        m3,
        m3_truncated,
        m4: 48.0 * spec.power_sum(4) + 3.0 * k2 * k2,
    }
}

/// Lévy density `m(x) = (1/(2x)) Σ exp(-x / (2λ_n))` of the truncated spectrum.
pub fn levy_density(spec: &Spectrum, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(domain(format!("Lévy density requires x > 0, got {x}")));
    }
    let sum: f64 = spec
        .lambdas
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| (-x / (2.0 * l)).exp())
        .sum();
    Ok(sum / (2.0 * x))
}

/// Both sides of the Stein identity `E V f(V) = E ∫ (f(V+x) - f(V)) ½Σe^{-x/(2λ)} dx
/// + σ_ε² E f'(V)` for `f(x) = x^k`.
///
/// The left side `E V^{k+1}` comes from the cumulants; the right side from
/// the moments of the Lévy measure. Returns `(lhs, rhs)`.
pub fn stein_moment_residual(spec: &Spectrum, k: u32) -> Result<(f64, f64)> {
    if !(1..=3).contains(&k) {
        return Err(Error::Unsupported(format!("Stein identity for f(x) = x^{k}")));
    }
    let m = moments_with(spec, false);
    let raw = [1.0, m.m1, m.m2, m.m3, m.m4];
    // ∫_0^∞ x^j ½Σ e^{-x/(2λ)} dx = ½ Σ j! (2λ)^{j+1}
    let levy_moment = |j: u32| -> f64 {
        let fact = (1..=j).product::<u32>() as f64;
        0.5 * fact * spec.lambdas.iter().map(|&l| (2.0 * l).powi(j as i32 + 1)).sum::<f64>()
    };
    let binom = |n: u32, r: u32| -> f64 { ((n - r + 1)..=n).product::<u32>() as f64 / (1..=r).product::<u32>() as f64 };
    let mut rhs = 0.0;
    for j in 1..=k {
        rhs += binom(k, j) * raw[(k - j) as usize] * levy_moment(j);
    }
    rhs += spec.sigma_eps2 * k as f64 * raw[(k - 1) as usize];
    Ok((raw[(k + 1) as usize], rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn single(l: f64) -> Spectrum {
        Spectrum::with_remainder(0.0, vec![l], 0.0)
    }

    #[test]
    fn log_laplace_zero_at_origin() {
        let spec = Spectrum::build(0.3, 50).unwrap();
        for rep in LogLTRepresentation::ALL {
            assert_eq!(log_laplace(&spec, 0.0, rep).unwrap(), 0.0, "{rep:?}");
        }
    }

    #[test]
    fn single_eigenvalue_hand_value() {
        let spec = single(0.5);
        let expected = -(0.5 * 2.0_f64.ln() - 0.5);
        assert_relative_eq!(expected, 0.153_426_409_720_027_35, max_relative = 1e-15);
        for rep in LogLTRepresentation::ALL {
            let v = log_laplace(&spec, 1.0, rep).unwrap();
            assert!((v - expected).abs() < 1e-12, "{rep:?}: {v}");
        }
    }

    #[test]
    fn representations_agree_on_example_spectrum() {
        let spec = Spectrum::build(0.3, 100).unwrap();
        let values: Vec<f64> = LogLTRepresentation::ALL
            .iter()
            .map(|&r| log_laplace(&spec, 0.7, r).unwrap())
            .collect();
        for v in &values {
            assert!((v - values[0]).abs() < 1e-10, "{values:?}");
        }
    }

    #[test]
    fn branch_point_rejected() {
        let spec = Spectrum::build(0.3, 20).unwrap();
        let lo = laplace_lower_bound(&spec);
        assert!(matches!(log_laplace(&spec, lo, LogLTRepresentation::Direct), Err(Error::Domain(_))));
        assert!(log_laplace(&spec, lo - 1.0, LogLTRepresentation::Integral).is_err());
        assert!(log_laplace(&spec, lo + 1e-6, LogLTRepresentation::Direct).is_ok());
    }

    #[test]
    fn charfn_special_cases() {
        let spec = Spectrum::build(0.25, 40).unwrap();
        assert_eq!(charfn_eps(&spec, 0.0), Complex64::new(1.0, 0.0));

        let gauss = Spectrum::build(0.5 - 1e-12, 30).unwrap();
        for z in [0.5, 1.0, 3.0] {
            let v = charfn_eps(&gauss, z);
            assert!((v - Complex64::new((-0.5 * z * z).exp(), 0.0)).norm() < 1e-9);
        }

        // a = 0: V = λ(ε² - 1), λ = 2^{-1/2}: φ(z) = e^{-iλz} / √(1 - 2iλz)
        let chi = Spectrum::build(0.0, 1).unwrap();
        let l = 0.5_f64.sqrt();
        for z in [-4.0, -0.3, 0.8, 7.5] {
            let expected = Complex64::new(0.0, -l * z).exp() / Complex64::new(1.0, -2.0 * l * z).sqrt();
            assert!((charfn_eps(&chi, z) - expected).norm() < 1e-14, "z={z}");
        }
    }

    #[test]
    fn charfn_hermitian_and_bounded() {
        let spec = Spectrum::build(0.35, 120).unwrap();
        let mut z = -50.0;
        while z <= 50.0 {
            let p = charfn_eps(&spec, z);
            let q = charfn_eps(&spec, -z);
            assert!(p.norm() <= 1.0 + 1e-15);
            assert!((p - q.conj()).norm() < 1e-15);
            z += 0.37;
        }
    }

    #[test]
    fn charfn_matches_laplace_at_imaginary_argument() {
        // φ(z) = φ_LT(-iz) on the real line; check the real-axis identity via
        // small-z Taylor terms: ln φ(z) ≈ -z²/2 - i(4/3) z³ Σλ³
        let spec = Spectrum::build(0.3, 60).unwrap();
        let z: f64 = 1e-3;
        let lf = log_charfn(&spec, z);
        let k2 = 2.0 * spec.power_sum(2) + spec.sigma_eps2;
        assert!((lf.re + 0.5 * z * z * k2).abs() < 1e-11);
        assert!((lf.im + 4.0 / 3.0 * z.powi(3) * spec.power_sum(3)).abs() < 1e-13);
    }

    #[test]
    fn moments_special_cases() {
        let gauss = Spectrum::build(0.5 - 1e-12, 10).unwrap();
        let m = moments(&gauss);
        assert_eq!(m.m1, 0.0);
        assert!((m.m2 - 1.0).abs() < 1e-12);
        assert!(m.m3.abs() < 1e-9);
        assert!((m.m4 - 3.0).abs() < 1e-9);

        // V = (ε² - 1)/√2: E V³ = (E ε⁶ - 3E ε⁴ + 3E ε² - 1)/2^{3/2} = (15 - 9 + 3 - 1)/2^{3/2}
        let chi = Spectrum::build(0.0, 1).unwrap();
        let expected = 8.0 / 2f64.powf(1.5);
        assert_relative_eq!(moments(&chi).m3, expected, max_relative = 1e-14);
        assert_relative_eq!(expected, 2.828_427_124_746_19, max_relative = 1e-14);
    }

    #[test]
    fn tail_completed_third_moment() {
        let a = 0.25;
        let m = crate::spectrum::choose_m(a, 1e-4).unwrap();
        let spec = Spectrum::build(a, m).unwrap();
        let set = moments(&spec);
        let exact = 8.0 * lambda_pow_sum_exact(a, 3).unwrap();
        assert!((set.m3 - exact).abs() < 1e-3);
        assert!((set.m3_truncated - exact).abs() < 8.0 * 1e-4 + 1e-12);
        assert!(set.m3 >= set.m3_truncated);
        assert_eq!(moments_with(&spec, false).m3, set.m3_truncated);
    }

    #[test]
    fn levy_density_values() {
        let spec = single(0.5);
        assert_relative_eq!(levy_density(&spec, 1.0).unwrap(), (-1.0_f64).exp() / 2.0, max_relative = 1e-15);
        assert!(levy_density(&spec, 0.0).is_err());

        let spec = Spectrum::build(0.3, 100).unwrap();
        let mut prev = f64::INFINITY;
        for k in 1..200 {
            let x = k as f64 * 0.05;
            let v = levy_density(&spec, x).unwrap() * x;
            assert!(v <= prev);
            prev = v;
        }
        // independent summation straight from the eigenvalue formula
        let direct: f64 = (1..=100)
            .map(|n| {
                let l = crate::spectrum::eig_approx(0.3, n).unwrap();
                (-0.1 / (2.0 * l)).exp()
            })
            .sum::<f64>()
            / 0.2;
        assert_relative_eq!(levy_density(&spec, 0.1).unwrap(), direct, max_relative = 1e-13);
        // the small eigenvalues beyond n = 100 still contribute near the origin
        let big = Spectrum::build(0.3, 1000).unwrap();
        let gap = levy_density(&big, 0.1).unwrap() - levy_density(&spec, 0.1).unwrap();
        assert!(gap > 0.0 && gap < 0.01 * levy_density(&big, 0.1).unwrap(), "{gap}");
    }

    #[test]
    fn stein_identities() {
        let spec = Spectrum::build(0.3, 80).unwrap();
        let (l, r) = stein_moment_residual(&spec, 1).unwrap();
        assert!((l - 1.0).abs() < 1e-12 && (r - 1.0).abs() < 1e-12);

        let chi = Spectrum::build(0.0, 1).unwrap();
        let (l, r) = stein_moment_residual(&chi, 2).unwrap();
        assert_relative_eq!(l, 2.828_427_124_746_19, max_relative = 1e-12);
        assert_relative_eq!(r, 2.828_427_124_746_19, max_relative = 1e-12);

        let spec = Spectrum::build(0.35, 200).unwrap();
        for k in 1..=3 {
            let (l, r) = stein_moment_residual(&spec, k).unwrap();
            assert!((l - r).abs() <= 1e-12, "k={k}: {l} vs {r}");
        }
        let (l, _) = stein_moment_residual(&spec, 3).unwrap();
        assert!((l - (48.0 * spec.power_sum(4) + 3.0)).abs() < 1e-12);
        assert!(matches!(stein_moment_residual(&spec, 4), Err(Error::Unsupported(_))));
    }
}
