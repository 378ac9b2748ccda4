//! Finite exponential mixtures `r(t) ≈ Σ b_k e^{-λ_k t}` of long-memory
//! correlation functions, and Gaussian sequences built as superpositions of
//! stationary AR(1) processes with those weights and rates.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::rng::{substream, Rng};
use crate::specfn::{gamma_cdf, gamma_quantile, lamperti_cdf, lamperti_quantile, mittag_leffler_neg};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrKind {
    /// `r(t) = (1 + t)^{-a}`, mixing density gamma(a, 1).
    Power,
    /// `r(t) = E_a(-t^a)`, mixing density Lamperti.
    MittagLeffler,
}

impl std::str::FromStr for CorrKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "power" => Ok(CorrKind::Power),
            "ml" | "mittag_leffler" | "mittag-leffler" => Ok(CorrKind::MittagLeffler),
            other => Err(format!("unknown correlation kind '{other}' (expected power or ml)")),
        }
    }
}

/// How the weights are obtained from the quantile breakpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightScheme {
    /// `b_k = q_{k-1} - q_k` with `q_0 = 1`, renormalised to sum to one.
    #[default]
    QuantileGaps,
    /// Mass of the mixing density on `(τ_k, τ_{k-1})`, with the first
    /// interval cut at `4τ_1`; not renormalised.
    ReferenceCode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpMixture {
    pub a: f64,
    pub kind: CorrKind,
    pub weights: Vec<f64>,
    /// Strictly decreasing decay rates.
    pub rates: Vec<f64>,
}

/// `⌈2/a⌉ + 8`.
pub fn mixture_size(a: f64) -> usize {
    (2.0 / a).ceil() as usize + 8
}

/// Levels `q_1 > q_2 > … > q_M` of the breakpoint schedule.
pub fn quantile_levels(a: f64, kind: CorrKind) -> Vec<f64> {
    let m = mixture_size(a);
    let gamma = (-(2.0 - a) * a).exp();
    (1..=m)
        .map(|k| match (kind, k) {
            (_, 1) => 0.98,
            (CorrKind::Power, k) => 0.9 * gamma.powi(k as i32 - 2),
            (CorrKind::MittagLeffler, 2) => 0.9,
            (CorrKind::MittagLeffler, 3) => 0.7,
            (CorrKind::MittagLeffler, k) => 0.5 * gamma.powi(k as i32 - 4),
        })
        .collect()
}

pub fn build_mixture(a: f64, kind: CorrKind) -> Result<ExpMixture> {
    build_mixture_with(a, kind, WeightScheme::QuantileGaps)
}

pub fn build_mixture_with(a: f64, kind: CorrKind, scheme: WeightScheme) -> Result<ExpMixture> {
    if !(a > 0.0 && a < 1.0) {
        return Err(domain(format!("mixture shape must lie in (0, 1), got {a}")));
    }
    let q = quantile_levels(a, kind);
    let tau = q
        .iter()
        .map(|&u| match kind {
            CorrKind::Power => gamma_quantile(a, u),
            CorrKind::MittagLeffler => lamperti_quantile(a, u),
        })
        .collect::<Result<Vec<f64>>>()?;

    let mut rates = Vec::with_capacity(tau.len());
    rates.push(tau[0]);
    for w in tau.windows(2) {
        rates.push((w[0] * w[1]).sqrt());
    }

    let mut weights: Vec<f64> = std::iter::once(1.0)
        .chain(q.iter().copied())
        .collect::<Vec<f64>>()
        .windows(2)
        .map(|w| w[0] - w[1])
        .collect();
    match scheme {
        WeightScheme::QuantileGaps => {
            let total: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|b| *b /= total);
        }
        WeightScheme::ReferenceCode => {
            let upper = match kind {
                CorrKind::Power => gamma_cdf(a, 4.0 * tau[0])?,
                CorrKind::MittagLeffler => lamperti_cdf(a, 4.0 * tau[0])?,
            };
            weights[0] = upper - q[0];
        }
    }
    Ok(ExpMixture { a, kind, weights, rates })
}

/// `Σ b_k e^{-λ_k t}`.
pub fn mixture_corr(mix: &ExpMixture, t: f64) -> f64 {
    mix.weights
        .iter()
        .zip(&mix.rates)
        .map(|(b, r)| b * (-r * t).exp())
        .sum()
}

/// The correlation function the mixture approximates.
pub fn target_corr(kind: CorrKind, a: f64, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(domain(format!("correlation lag must be nonnegative, got {t}")));
    }
    match kind {
        CorrKind::Power => Ok((1.0 + t).powf(-a)),
        CorrKind::MittagLeffler => mittag_leffler_neg(a, t),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproxRow {
    pub t: f64,
    pub target: f64,
    pub approx: f64,
    pub rel_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxReport {
    pub rows: Vec<ApproxRow>,
    pub max_rel_err: f64,
}

/// Mixture against target on `grid`.
pub fn approx_error_report(mix: &ExpMixture, grid: &[f64]) -> Result<ApproxReport> {
    if grid.is_empty() {
        return Err(domain("empty lag grid".to_string()));
    }
    let rows = grid
        .iter()
        .map(|&t| {
            let target = target_corr(mix.kind, mix.a, t)?;
            let approx = mixture_corr(mix, t);
            Ok(ApproxRow {
                t,
                target,
                approx,
                rel_err: (approx - target).abs() / target,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_rel_err = rows.iter().map(|r| r.rel_err).fold(0.0, f64::max);
    Ok(ApproxReport { rows, max_rel_err })
}

/// `n` points log-spaced from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (l, h) = (lo.ln(), hi.ln());
    (0..n).map(|i| (l + (h - l) * i as f64 / (n - 1) as f64).exp()).collect()
}

struct Ar1 {
    coef: f64,
    innov: f64,
    scale: f64,
    state: f64,
    rng: Rng,
}

impl Ar1 {
    fn new(weight: f64, rate: f64, seed: u64, k: usize) -> Self {
        let mut rng = substream(seed, k as u64);
        let coef = (-rate).exp();
        let state = StandardNormal.sample(&mut rng);
        Ar1 {
            coef,
            innov: (1.0 - coef * coef).sqrt(),
            scale: weight.sqrt(),
            state,
            rng,
        }
    }

    /// Writes the next `out.len()` values, scaled by `√b`.
    fn fill(&mut self, out: &mut [f64]) {
        for o in out.iter_mut() {
            *o = self.scale * self.state;
            let e: f64 = StandardNormal.sample(&mut self.rng);
            self.state = self.coef * self.state + self.innov * e;
        }
    }
}

const BLOCK: usize = 1 << 16;

/// Stationary Gaussian sequence of length `n` with correlation
/// `mixture_corr(mix, ·)`. Component `k` draws from its own stream of
/// `seed`, so the output is identical whether components run in parallel
/// or not.
pub fn simulate_lrd(mix: &ExpMixture, n: usize, seed: u64) -> Vec<f64> {
    let mut comps: Vec<Ar1> = mix
        .weights
        .iter()
        .zip(&mix.rates)
        .enumerate()
        .map(|(k, (&b, &r))| Ar1::new(b, r, seed, k))
        .collect();
    let mut out = vec![0.0; n];
    let mut bufs = vec![vec![0.0; BLOCK.min(n)]; comps.len()];
    for chunk in out.chunks_mut(BLOCK) {
        let len = chunk.len();
        comps
            .par_iter_mut()
            .zip(bufs.par_iter_mut())
            .for_each(|(c, buf)| c.fill(&mut buf[..len]));
        for buf in &bufs {
            for (o, v) in chunk.iter_mut().zip(&buf[..len]) {
                *o += v;
            }
        }
    }
    out
}

/// Single-threaded variant of [`simulate_lrd`] writing into `out`; produces
/// the same values. Meant for callers that parallelise at a coarser level.
pub fn simulate_lrd_into(mix: &ExpMixture, seed: u64, out: &mut [f64]) {
    out.iter_mut().for_each(|o| *o = 0.0);
    let mut buf = vec![0.0; BLOCK.min(out.len())];
    let mut comps: Vec<Ar1> = mix
        .weights
        .iter()
        .zip(&mix.rates)
        .enumerate()
        .map(|(k, (&b, &r))| Ar1::new(b, r, seed, k))
        .collect();
    for chunk in out.chunks_mut(BLOCK) {
        let len = chunk.len();
        for c in comps.iter_mut() {
            c.fill(&mut buf[..len]);
            for (o, v) in chunk.iter_mut().zip(&buf[..len]) {
                *o += v;
            }
        }
    }
}
