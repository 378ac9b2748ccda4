//! Special functions used throughout the crate.
//!
//! `ln Γ`, `Γ` and `erfc` come from `libm`; the incomplete gamma function,
//! the Mittag-Leffler function, the Lamperti law and the gamma quantile are
//! implemented here.

use std::f64::consts::{PI, SQRT_2};


use crate::error::{domain, Error, Result};
use crate::quad::{integrate_with_breaks, QuadConfig};

/// Upper clamp applied to Lamperti quantiles so that `u` near one cannot
/// overflow for small shape parameters.
pub const LAMPERTI_QUANTILE_CAP: f64 = 1e25;

/// Natural logarithm of the gamma function.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain(format!("ln_gamma requires x > 0, got {x}")));
    }
    Ok(libm::lgamma(x))
}

/// Gamma function for positive arguments.
pub fn gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain(format!("gamma requires x > 0, got {x}")));
    }
    Ok(libm::tgamma(x))
}

/// Beta function `Γ(u)Γ(v)/Γ(u+v)`.
pub fn beta(u: f64, v: f64) -> Result<f64> {
    if !(u > 0.0 && v > 0.0) {
        return Err(domain(format!("beta requires u, v > 0, got ({u}, {v})")));
    }
    Ok((ln_gamma(u)? + ln_gamma(v)? - ln_gamma(u + v)?).exp())
}

pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

fn check_open_unit_shape(a: f64, what: &str) -> Result<()> {
    if a > 0.0 && a < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("{what} requires 0 < a < 1, got {a}")))
    }
}

/// `E_a(-t^a)` for `0 < a < 1` and `t >= 0`.
///
/// The power series is used while `t^a <= 1`; beyond that the value is the
/// Laplace transform of the Lamperti density, integrated on a logarithmic
/// axis.
pub fn mittag_leffler_neg(a: f64, t: f64) -> Result<f64> {
    check_open_unit_shape(a, "mittag_leffler_neg")?;
    if !(t >= 0.0) {
        return Err(domain(format!("mittag_leffler_neg requires t >= 0, got {t}")));
    }
    let z = t.powf(a);
    if z <= 1.0 {
        Ok(mittag_leffler_series(a, z))
    } else {
        mittag_leffler_laplace(a, t)
    }
}

/// Truncated power series `Σ (-z)^k / Γ(ak+1)`; accurate for `0 <= z <= 1`.
pub(crate) fn mittag_leffler_series(a: f64, z: f64) -> f64 {
    if z == 0.0 {
        return 1.0;
    }
    let lnz = z.ln();
    let mut sum = 1.0;
    for k in 1..10_000 {
        let kf = k as f64;
        let mag = (kf * lnz - libm::lgamma(a * kf + 1.0)).exp();
        let term = if k % 2 == 0 { mag } else { -mag };
        sum += term;
        if mag < 1e-18 {
            break;
        }
    }
    sum
}

fn mittag_leffler_laplace(a: f64, t: f64) -> Result<f64> {
    let (s, c) = (a * PI).sin_cos();
    // With x = e^y the integrand is e^{-t e^y} p_ml(e^y) e^y. Below y_lo the
    // remaining mass is at most 2 sin(aπ)/(π a) e^{a y_lo}.
    let y_lo = (1e-18 * PI * a / (2.0 * s)).ln() / a;
    let y_hi = (750.0 / t).ln();
    let integrand = |y: f64| {
        let u = (a * y).exp();
        (-t * y.exp()).exp() * s / PI * u / (1.0 + 2.0 * c * u + u * u)
    };
    let cfg = QuadConfig::new(1e-15, 1e-12);
    let r = integrate_with_breaks(integrand, y_lo, y_hi, &[0.0, -t.ln()], &cfg)?;
    Ok(r.value)
}

/// Density of the Lamperti law whose Laplace transform is `E_a(-t^a)`.
pub fn lamperti_density(a: f64, x: f64) -> Result<f64> {
    check_open_unit_shape(a, "lamperti_density")?;
    if !(x > 0.0) {
        return Err(domain(format!("lamperti_density requires x > 0, got {x}")));
    }
    let (s, c) = (a * PI).sin_cos();
    let u = x.powf(a);
    Ok(s / PI * x.powf(a - 1.0) / (1.0 + 2.0 * c * u + u * u))
}

/// Closed-form Lamperti quantile, clamped at [`LAMPERTI_QUANTILE_CAP`].
pub fn lamperti_quantile(a: f64, u: f64) -> Result<f64> {
    check_open_unit_shape(a, "lamperti_quantile")?;
    if !(u > 0.0 && u < 1.0) {
        return Err(domain(format!("lamperti_quantile requires 0 < u < 1, got {u}")));
    }
    let q = ((u * a * PI).sin() / ((1.0 - u) * a * PI).sin()).powf(1.0 / a);
    Ok(q.min(LAMPERTI_QUANTILE_CAP))
}

/// Lamperti distribution function `∫_0^x p_ml`, in closed form.
pub fn lamperti_cdf(a: f64, x: f64) -> Result<f64> {
    check_open_unit_shape(a, "lamperti_cdf")?;
    if !(x >= 0.0) {
        return Err(domain(format!("lamperti_cdf requires x >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let u = x.powf(a);
    let (s, c) = (a * PI).sin_cos();
    let theta = (u * s).atan2(1.0 + u * c);
    Ok((theta / (a * PI)).clamp(0.0, 1.0))
}

/// Regularised lower incomplete gamma `P(shape, x)`.
pub fn gamma_cdf(shape: f64, x: f64) -> Result<f64> {
    if !(shape > 0.0) || !(x >= 0.0) {
        return Err(domain(format!(
            "gamma_cdf requires shape > 0 and x >= 0, got ({shape}, {x})"
        )));
    }
    Ok(gamma_p(shape, x))
}

/// Regularised upper incomplete gamma `Q(shape, x) = 1 - P(shape, x)`.
pub fn gamma_sf(shape: f64, x: f64) -> Result<f64> {
    if !(shape > 0.0) || !(x >= 0.0) {
        return Err(domain(format!(
            "gamma_sf requires shape > 0 and x >= 0, got ({shape}, {x})"
        )));
    }
    Ok(gamma_q(shape, x))
}

/// `ln(x^s e^{-x} / Γ(s))`, the common prefactor of both expansions.
fn gamma_prefactor_ln(s: f64, x: f64) -> f64 {
    s * x.ln() - x - libm::lgamma(s)
}

// Series P(s, x) = x^s e^{-x} / Γ(s+1) · Σ x^k / ((s+1)…(s+k)), for x < s + 1.
fn gamma_p_series(s: f64, x: f64) -> f64 {
    let mut term = 1.0 / s;
    let mut sum = term;
    let mut denom = s;
    for _ in 0..10_000 {
        denom += 1.0;
        term *= x / denom;
        sum += term;
        if term.abs() < sum.abs() * 1e-17 {
            break;
        }
    }
    (gamma_prefactor_ln(s, x)).exp() * sum
}

// Modified Lentz continued fraction for Q(s, x), for x >= s + 1.
fn gamma_q_fraction(s: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - s;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -(i as f64) * (i as f64 - s);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (gamma_prefactor_ln(s, x)).exp() * h
}

fn gamma_p(s: f64, x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else if x < s + 1.0 {
        gamma_p_series(s, x)
    } else {
        1.0 - gamma_q_fraction(s, x)
    }
}

fn gamma_q(s: f64, x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else if x < s + 1.0 {
        1.0 - gamma_p_series(s, x)
    } else {
        gamma_q_fraction(s, x)
    }
}

/// Quantile of the unit-rate gamma distribution with the given shape.
///
/// Newton iterations on `ln τ` with a maintained bisection bracket; the
/// complementary function is used for `u > 1/2` to avoid cancellation.
pub fn gamma_quantile(shape: f64, u: f64) -> Result<f64> {
    if !(shape > 0.0) || !shape.is_finite() {
        return Err(domain(format!("gamma_quantile requires shape > 0, got {shape}")));
    }
    if !(u > 0.0 && u < 1.0) {
        return Err(domain(format!("gamma_quantile requires 0 < u < 1, got {u}")));
    }
    let upper = u > 0.5;
    let target = if upper { 1.0 - u } else { u };
    let lgs = libm::lgamma(shape);
    // residual in the tail that is being matched, as a function of y = ln τ
    let residual = |y: f64| {
        let x = y.exp();
        if upper {
            gamma_q(shape, x) - target
        } else {
            gamma_p(shape, x) - target
        }
    };
    // d residual / dy
    let slope = |y: f64| {
        let d = (shape * y - y.exp() - lgs).exp();
        if upper {
            -d
        } else {
            d
        }
    };

    // Starting point: small-u power law or Wilson–Hilferty.
    let y0 = {
        let small = (u.ln() + libm::lgamma(shape + 1.0)) / shape;
        if small < -1.0 {
            small
        } else {
            let z = crate::specfn::std_normal_quantile_rough(u);
            let h = 1.0 / (9.0 * shape);
            let w = shape * (1.0 - h + z * h.sqrt()).powi(3);
            if w > 0.0 {
                w.ln()
            } else {
                small
            }
        }
    };

    let (mut lo, mut hi) = (-800.0_f64, (10.0 * shape + 1000.0).ln());
    // residual is increasing in y for the lower tail and decreasing for the upper
    let below = |r: f64| if upper { r > 0.0 } else { r < 0.0 };
    let mut y = y0.clamp(lo, hi);
    for _ in 0..400 {
        let r = residual(y);
        if r == 0.0 {
            return Ok(y.exp());
        }
        if below(r) {
            lo = y;
        } else {
            hi = y;
        }
        let d = slope(y);
        let mut next = y - r / d;
        if !next.is_finite() || next <= lo || next >= hi {
            next = 0.5 * (lo + hi);
        }
        if (next - y).abs() <= 1e-14 * (1.0 + y.abs()) || (hi - lo) < 1e-14 {
            return Ok(next.exp());
        }
        y = next;
    }
    Err(Error::Numerical {
        message: format!("gamma_quantile({shape}, {u}) did not converge"),
        achieved: (hi - lo).abs(),
    })
}

/// Acklam-style rational approximation of the normal quantile; only used to
/// seed root finders, so moderate accuracy is enough.
pub(crate) fn std_normal_quantile_rough(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    let plow = 0.02425;
    if p < plow {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - plow {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -std_normal_quantile_rough(1.0 - p)
    }
}
