//! Truncated eigenvalue spectrum of the Riesz operator with kernel
//! `σ_a |x - u|^{-a}` on `L²(0, 1)`.
//!
//! A Rosenblatt variable is `V = Σ λ_n (ε_n² - 1)`. Only the first `M`
//! eigenvalues are kept; the remainder is replaced by a centred Gaussian with
//! variance `σ_ε² = 1 - 2 Σ_{n≤M} λ_n²`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::specfn::{beta, gamma};

/// Default number of eigenvalues summed when estimating the cubic tail.
pub const DEFAULT_TAIL_HORIZON: usize = 50_000;

/// Default cap on `M` for the closed-form tail rule.
pub const DEFAULT_M_CAP: usize = 1_000_000;

/// Coefficient of the `n^{a-2.2}` correction term in the eigenvalue
/// approximation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Correction {
    /// `(5/4) a^{1.05}`, the published formula.
    #[default]
    Published,
    /// `1.05 a^{5/4}`, as written in the reference R implementation.
    ReferenceCode,
}

/// How [`choose_m`] measures the neglected cubic mass `Σ_{n>M} λ_n³`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailRule {
    /// Sum the approximated eigenvalues `M+1 ..= horizon`.
    Truncated { horizon: usize },
    /// Closed-form `Σ λ³` minus the partial sum of approximated eigenvalues,
    /// floored at zero, searching up to `cap`.
    ClosedForm { cap: usize },
}

impl Default for TailRule {
    fn default() -> Self {
        TailRule::Truncated {
            horizon: DEFAULT_TAIL_HORIZON,
        }
    }
}

fn check_rosenblatt_shape(a: f64) -> Result<()> {
    if (0.0..=0.5).contains(&a) {
        Ok(())
    } else {
        Err(domain(format!("Rosenblatt shape must satisfy 0 <= a <= 1/2, got {a}")))
    }
}

/// `σ_a = √((1-2a)(1-a)/2)`.
pub fn sigma_a(a: f64) -> Result<f64> {
    check_rosenblatt_shape(a)?;
    Ok(((1.0 - 2.0 * a) * (1.0 - a) / 2.0).sqrt())
}

/// Leading asymptotic constant `C_a` in `λ_n ~ C_a n^{a-1}`.
pub fn c_a(a: f64) -> Result<f64> {
    let s = sigma_a(a)?;
    Ok(2.0 * s * gamma(1.0 - a)? * (PI * a / 2.0).sin() / PI.powf(1.0 - a))
}

/// Approximate `n`-th eigenvalue (1-based) using the published correction.
pub fn eig_approx(a: f64, n: usize) -> Result<f64> {
    eig_approx_with(a, n, Correction::Published)
}

pub fn eig_approx_with(a: f64, n: usize, correction: Correction) -> Result<f64> {
    check_rosenblatt_shape(a)?;
    if n == 0 {
        return Err(domain("eigenvalue index starts at 1"));
    }
    if n == 1 {
        return Ok((1.0 + 0.1409 * a) * (PI.powf(a) * gamma(1.0 - a)?).sqrt() * (0.5 - a).sqrt());
    }
    let nf = n as f64;
    let second = match correction {
        Correction::Published => 1.25 * a.powf(1.05),
        Correction::ReferenceCode => 1.05 * a.powf(1.25),
    } * (gamma(a + 0.5)? - 1.0).max(0.0).sqrt();
    Ok(c_a(a)? * nf.powf(a - 1.0) + second * nf.powf(a - 2.2))
}

/// Closed-form `Σ_{n≥1} λ_n^k` for `k ∈ {2, 3}`.
pub fn lambda_pow_sum_exact(a: f64, k: u32) -> Result<f64> {
    check_rosenblatt_shape(a)?;
    match k {
        2 => Ok(0.5),
        3 => {
            let s = sigma_a(a)?;
            Ok(2.0 * s.powi(3) * beta(1.0 - a, 1.0 - a)? / ((1.0 - a) * (2.0 - 3.0 * a)))
        }
        _ => Err(Error::Unsupported(format!("closed-form power sum for k = {k}"))),
    }
}

/// Smallest `M` whose neglected cubic mass is at most `eps`, using the
/// default [`TailRule`].
pub fn choose_m(a: f64, eps: f64) -> Result<usize> {
    choose_m_with(a, eps, TailRule::default())
}

pub fn choose_m_with(a: f64, eps: f64, rule: TailRule) -> Result<usize> {
    if !(a > 0.0 && a < 0.5) {
        return Err(domain(format!("choose_m requires 0 < a < 1/2, got {a}")));
    }
    if !(eps > 0.0) {
        return Err(domain(format!("choose_m requires eps > 0, got {eps}")));
    }
    match rule {
        TailRule::Truncated { horizon } => {
            let cubes = (1..=horizon)
                .map(|n| eig_approx(a, n).map(|l| l * l * l))
                .collect::<Result<Vec<_>>>()?;
            // tail[m] = Σ_{n > m}, accumulated from the far end
            let mut tail = 0.0;
            let mut best = None;
            for m in (1..horizon).rev() {
                tail += cubes[m];
                if tail > eps {
                    break;
                }
                best = Some(m);
            }
            match best {
                Some(m) => Ok(m),
                None => Err(Error::Resource(format!(
                    "eps = {eps:e} is not reached within the tail horizon of {horizon} eigenvalues"
                ))),
            }
        }
        TailRule::ClosedForm { cap } => {
            let total = lambda_pow_sum_exact(a, 3)?;
            let mut partial = 0.0;
            for m in 1..=cap {
                let l = eig_approx(a, m)?;
                partial += l * l * l;
                if (total - partial).max(0.0) <= eps {
                    return Ok(m);
                }
            }
            Err(Error::Resource(format!("M would exceed the cap of {cap} for eps = {eps:e}")))
        }
    }
}

/// Truncated spectrum plus the variance of the Gaussian remainder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub a: f64,
    #[serde(rename = "M")]
    pub m: usize,
    pub lambdas: Vec<f64>,
    pub sigma_eps2: f64,
}

impl Spectrum {
    /// Spectrum of the first `m` approximated eigenvalues.
    pub fn build(a: f64, m: usize) -> Result<Self> {
        Self::build_with(a, m, Correction::Published)
    }

    pub fn build_with(a: f64, m: usize, correction: Correction) -> Result<Self> {
        if m == 0 {
            return Err(domain("spectrum needs at least one eigenvalue"));
        }
        let lambdas = (1..=m)
            .map(|n| eig_approx_with(a, n, correction))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_lambdas(a, lambdas))
    }

    /// Spectrum with `M = choose_m(a, eps)`.
    pub fn for_eps(a: f64, eps: f64) -> Result<Self> {
        Self::build(a, choose_m(a, eps)?)
    }

    /// Wraps an explicit eigenvalue list (assumed sorted, non-increasing).
    pub fn from_lambdas(a: f64, lambdas: Vec<f64>) -> Self {
        let sigma_eps2 = (1.0 - 2.0 * power_sum(&lambdas, 2)).max(0.0);
        Self {
            a,
            m: lambdas.len(),
            lambdas,
            sigma_eps2,
        }
    }

    /// Like [`Spectrum::from_lambdas`] but with an explicit remainder variance.
    pub fn with_remainder(a: f64, lambdas: Vec<f64>, sigma_eps2: f64) -> Self {
        Self {
            a,
            m: lambdas.len(),
            lambdas,
            sigma_eps2,
        }
    }

    pub fn sigma_eps(&self) -> f64 {
        self.sigma_eps2.sqrt()
    }

    pub fn largest(&self) -> f64 {
        self.lambdas.iter().copied().fold(0.0, f64::max)
    }

    /// `Σ_{n≤M} λ_n^k`.
    pub fn power_sum(&self, k: i32) -> f64 {
        power_sum(&self.lambdas, k)
    }

    /// True when `1 - 2Σλ²` was negative and had to be clamped to zero.
    pub fn is_clamped(&self) -> bool {
        1.0 - 2.0 * self.power_sum(2) < 0.0
    }
}

fn power_sum(lambdas: &[f64], k: i32) -> f64 {
    lambdas.iter().map(|l| l.powi(k)).sum()
}
