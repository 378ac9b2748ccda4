//! Monte-Carlo replicates of the normalised functionals whose limits are
//! Rosenblatt-distributed, and summaries of their empirical laws.
//!
//! | functional | input | statistic |
//! |---|---|---|
//! | `Mean` | LRD sequence `E` | `Z_n = σ_a n^{a-1} Σ (E_j² - 1)` |
//! | `Corr { lag }` | LRD sequence | `R_{k,n} = σ_a n^{a-1} Σ_{j≤n-k} (E_j E_{j+k} - r(k))` |
//! | `Sojourn { level }` | LRD sequence | `S_{u,n}`, exceedances of `|E_j| > u` |
//! | `Quadvar` | fBm path, `H = 1 - a/2` | `G_n`, centred quadratic variation |

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{ks_statistic, InversionConfig};
use crate::error::{domain, Result};
use crate::fbm::{FbmGenerator, Hurst};
use crate::lrdmix::{build_mixture, mixture_corr, simulate_lrd_into, CorrKind, ExpMixture};
use crate::rng::derive;
use crate::specfn::{std_normal_cdf, std_normal_pdf};
use crate::spectrum::{sigma_a, Spectrum};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "functional", rename_all = "snake_case")]
pub enum Functional {
    Mean,
    Corr { lag: usize },
    Sojourn { level: f64 },
    Quadvar,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalSpec {
    #[serde(flatten)]
    pub functional: Functional,
    pub a: f64,
    pub n: usize,
    /// Correlation of the input sequence; unused by `Quadvar`.
    pub corr: CorrKind,
}

impl FunctionalSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a < 0.5) {
            return Err(domain(format!("functional shape must lie in (0, 1/2), got {}", self.a)));
        }
        match self.functional {
            Functional::Corr { lag } if lag >= self.n => {
                Err(domain(format!("lag {lag} must be below the sequence length {}", self.n)))
            }
            Functional::Sojourn { level } if !(level > 0.0) => {
                Err(domain(format!("sojourn level must be positive, got {level}")))
            }
            Functional::Quadvar if self.n < 2 => Err(domain("fBm grid needs n ≥ 2".to_string())),
            _ if self.n == 0 => Err(domain("sequence length must be positive".to_string())),
            _ => Ok(()),
        }
    }

    fn uses_fbm(&self) -> bool {
        matches!(self.functional, Functional::Quadvar)
    }
}

fn scale(a: f64, n: usize) -> Result<f64> {
    Ok(sigma_a(a)? * (n as f64).powf(a - 1.0))
}

/// `Z_n = (σ_a / n^{1-a}) Σ H₂(E_j)`.
pub fn functional_mean_h2(e: &[f64], a: f64) -> Result<f64> {
    let s: f64 = e.iter().map(|x| x * x - 1.0).sum();
    Ok(scale(a, e.len())? * s)
}

/// `R_{k,n} = (σ_a / n^{1-a}) Σ_{j=1}^{n-k} (E_j E_{j+k} - r_true)`.
pub fn functional_corr(e: &[f64], a: f64, lag: usize, r_true: f64) -> Result<f64> {
    let n = e.len();
    if lag >= n {
        return Err(domain(format!("lag {lag} must be below the sequence length {n}")));
    }
    let s: f64 = e.iter().zip(&e[lag..]).map(|(x, y)| x * y - r_true).sum();
    Ok(scale(a, n)? * s)
}

/// `S_{u,n} = (σ_a / n^{1-a}) (Σ 1{|E_j| > u} - 2n(1 - Φ(u))) / (u φ(u))`.
pub fn functional_sojourn(e: &[f64], a: f64, level: f64) -> Result<f64> {
    if !(level > 0.0) {
        return Err(domain(format!("sojourn level must be positive, got {level}")));
    }
    let n = e.len();
    let count = e.iter().filter(|x| x.abs() > level).count() as f64;
    let expected = 2.0 * n as f64 * (1.0 - std_normal_cdf(level));
    Ok(scale(a, n)? * (count - expected) / (level * std_normal_pdf(level)))
}

/// `G_n = (σ_a / n^{1-a}) (n^{2-a} / (1.04 - 1.5a)) Σ ((ΔX_j)² - n^{a-2})`
/// for a path `X(0), …, X(1)` of `n + 1` points.
pub fn functional_quadvar(x: &[f64], a: f64) -> Result<f64> {
    if !(a > 0.0 && a < 0.5) {
        return Err(domain(format!("quadratic-variation functional needs 0 < a < 1/2, got {a}")));
    }
    if x.len() < 3 {
        return Err(domain("fBm path needs at least 3 points".to_string()));
    }
    let n = x.len() - 1;
    let nf = n as f64;
    let centre = nf.powf(a - 2.0);
    let s: f64 = x.windows(2).map(|w| (w[1] - w[0]).powi(2) - centre).sum();
    Ok(scale(a, n)? * nf.powf(2.0 - a) / (1.04 - 1.5 * a) * s)
}

/// Histogram, kernel estimate and moments of a set of replicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDensity {
    pub bin_edges: Vec<f64>,
    pub bin_mass: Vec<f64>,
    /// Empty when the replicates have zero spread.
    pub kde_xs: Vec<f64>,
    pub kde_vals: Vec<f64>,
    pub reps: usize,
    pub mean: f64,
    /// Sample standard deviation (`n - 1` denominator).
    pub sd: f64,
    pub skewness: f64,
    pub replicates: Vec<f64>,
}

pub const KDE_POINTS: usize = 512;
const MAX_BINS: usize = 10_000;

impl EmpiricalDensity {
    pub fn from_replicates(replicates: Vec<f64>) -> Result<Self> {
        let reps = replicates.len();
        if reps < 2 {
            return Err(domain(format!("need at least 2 replicates, got {reps}")));
        }
        if replicates.iter().any(|v| !v.is_finite()) {
            return Err(domain("non-finite replicate value".to_string()));
        }
        let n = reps as f64;
        let mean = replicates.iter().sum::<f64>() / n;
        let m2 = replicates.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let m3 = replicates.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / n;
        let sd = (m2 * n / (n - 1.0)).sqrt();
        let skewness = if m2 > 0.0 { m3 / m2.powf(1.5) } else { 0.0 };

        let mut sorted = replicates.clone();
        sorted.sort_by(f64::total_cmp);
        let (lo, hi) = (sorted[0], sorted[reps - 1]);

        // Freedman–Diaconis
        let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
        let width = 2.0 * iqr / n.cbrt();
        let bins = if hi > lo && width > 0.0 {
            (((hi - lo) / width).ceil() as usize).clamp(1, MAX_BINS)
        } else {
            1
        };
        let step = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
        let bin_edges: Vec<f64> = (0..=bins).map(|i| lo + i as f64 * step).collect();
        let mut counts = vec![0usize; bins];
        for &v in &sorted {
            let j = (((v - lo) / step) as usize).min(bins - 1);
            counts[j] += 1;
        }
        let bin_mass = counts.iter().map(|&c| c as f64 / n).collect();

        // Gaussian kernel, Silverman bandwidth
        let h = 1.06 * sd * n.powf(-0.2);
        let (kde_xs, kde_vals) = if h > 0.0 {
            let (a, b) = (lo - 3.0 * h, hi + 3.0 * h);
            let xs: Vec<f64> = (0..KDE_POINTS)
                .map(|i| a + (b - a) * i as f64 / (KDE_POINTS - 1) as f64)
                .collect();
            let norm = 1.0 / (n * h * (2.0 * std::f64::consts::PI).sqrt());
            let vals = xs
                .iter()
                .map(|&x| {
                    // only kernels within 8 bandwidths contribute
                    let from = sorted.partition_point(|&v| v < x - 8.0 * h);
                    let to = sorted.partition_point(|&v| v <= x + 8.0 * h);
                    norm * sorted[from..to]
                        .iter()
                        .map(|v| (-0.5 * ((x - v) / h).powi(2)).exp())
                        .sum::<f64>()
                })
                .collect();
            (xs, vals)
        } else {
            (Vec::new(), Vec::new())
        };

        Ok(EmpiricalDensity {
            bin_edges,
            bin_mass,
            kde_xs,
            kde_vals,
            reps,
            mean,
            sd,
            skewness,
            replicates,
        })
    }
}

fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i]
    }
}

enum Source {
    Lrd(ExpMixture),
    Fbm(FbmGenerator),
}

/// Replicate values of several functionals sharing one input process: each
/// replicate draws a single sequence (or path) and evaluates every
/// functional on it. All specs must agree on `a`, `n`, `corr` and input type.
/// Replicate `r` uses seed `seeds[r]`.
pub fn replicate_values(specs: &[FunctionalSpec], seeds: &[u64]) -> Result<Vec<Vec<f64>>> {
    let first = specs.first().ok_or_else(|| domain("no functionals requested".to_string()))?;
    for s in specs {
        s.validate()?;
        if s.a != first.a || s.n != first.n || s.uses_fbm() != first.uses_fbm() || (!s.uses_fbm() && s.corr != first.corr) {
            return Err(domain("functionals evaluated together must share their input process".to_string()));
        }
    }
    let (a, n) = (first.a, first.n);
    let source = if first.uses_fbm() {
        Source::Fbm(FbmGenerator::new(Hurst::from_shape(a)?, n)?)
    } else {
        Source::Lrd(build_mixture(a, first.corr)?)
    };
    let centres: Vec<f64> = specs
        .iter()
        .map(|s| match (s.functional, &source) {
            (Functional::Corr { lag }, Source::Lrd(mix)) => mixture_corr(mix, lag as f64),
            _ => 0.0,
        })
        .collect();

    let per_rep = seeds
        .par_iter()
        .map_init(
            || vec![0.0; n],
            |buf, &seed| -> Result<Vec<f64>> {
                let path;
                let input: &[f64] = match &source {
                    Source::Lrd(mix) => {
                        simulate_lrd_into(mix, seed, buf);
                        buf
                    }
                    Source::Fbm(g) => {
                        path = g.path(seed);
                        &path
                    }
                };
                specs
                    .iter()
                    .zip(&centres)
                    .map(|(s, &c)| match s.functional {
                        Functional::Mean => functional_mean_h2(input, a),
                        Functional::Corr { lag } => functional_corr(input, a, lag, c),
                        Functional::Sojourn { level } => functional_sojourn(input, a, level),
                        Functional::Quadvar => functional_quadvar(input, a),
                    })
                    .collect()
            },
        )
        .collect::<Result<Vec<Vec<f64>>>>()?;

    Ok((0..specs.len())
        .map(|k| per_rep.iter().map(|r| r[k]).collect())
        .collect())
}

/// Seeds of replicates `0..reps` under master seed `seed`.
pub fn replicate_seeds(seed: u64, reps: usize) -> Vec<u64> {
    (0..reps as u64).map(|r| derive(seed, r)).collect()
}

pub fn run_monte_carlo(fs: &FunctionalSpec, reps: usize, seed: u64) -> Result<EmpiricalDensity> {
    run_monte_carlo_with_seeds(fs, &replicate_seeds(seed, reps))
}

pub fn run_monte_carlo_with_seeds(fs: &FunctionalSpec, seeds: &[u64]) -> Result<EmpiricalDensity> {
    if seeds.len() < 2 {
        return Err(domain(format!("need at least 2 replicates, got {}", seeds.len())));
    }
    let values = replicate_values(std::slice::from_ref(fs), seeds)?.remove(0);
    EmpiricalDensity::from_replicates(values)
}

/// Several functionals of the same input process, one pass over replicates.
pub fn run_monte_carlo_joint(specs: &[FunctionalSpec], reps: usize, seed: u64) -> Result<Vec<EmpiricalDensity>> {
    if reps < 2 {
        return Err(domain(format!("need at least 2 replicates, got {reps}")));
    }
    replicate_values(specs, &replicate_seeds(seed, reps))?
        .into_iter()
        .map(EmpiricalDensity::from_replicates)
        .collect()
}

/// Sup distance between the empirical CDF of the replicates and the CDF of
/// `spec`.
pub fn ks_distance(ed: &EmpiricalDensity, spec: &Spectrum, cfg: &InversionConfig) -> Result<f64> {
    ks_statistic(&ed.replicates, spec, cfg)
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_two_sample(x: &[f64], y: &[f64]) -> f64 {
    let mut x = x.to_vec();
    let mut y = y.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (nx, ny) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < x.len() && j < y.len() {
        let t = x[i].min(y[j]);
        while i < x.len() && x[i] <= t {
            i += 1;
        }
        while j < y.len() && y[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / nx - j as f64 / ny).abs());
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_functional_hand_values() {
        let z = functional_mean_h2(&[0.0; 16], 0.25).unwrap();
        assert!((z + 0.866_025_403_784_438_6).abs() < 1e-12);
        assert_eq!(functional_mean_h2(&[1.0; 10], 0.3).unwrap(), 0.0);
        let s = sigma_a(0.3).unwrap();
        assert!((functional_mean_h2(&[2.0], 0.3).unwrap() - 3.0 * s).abs() < 1e-15);
    }

    #[test]
    fn lag_zero_correlation_is_the_mean_functional() {
        let e: Vec<f64> = (0..1000).map(|i| ((i * 37 % 101) as f64 / 25.0) - 2.0).collect();
        assert_eq!(
            functional_corr(&e, 0.3, 0, 1.0).unwrap().to_bits(),
            functional_mean_h2(&e, 0.3).unwrap().to_bits()
        );
        let zero = functional_corr(&[0.0; 50], 0.3, 5, 0.4).unwrap();
        let want = -45.0 * sigma_a(0.3).unwrap() * 0.4 / 50f64.powf(0.7);
        assert!((zero - want).abs() < 1e-12);
        assert!(functional_corr(&e[..5], 0.3, 5, 0.0).is_err());
    }

    #[test]
    fn sojourn_extremes() {
        let (a, u, n) = (0.25, 1.5, 40);
        let s = sigma_a(a).unwrap() / (n as f64).powf(1.0 - a);
        let tail = 1.0 - std_normal_cdf(u);
        let dens = u * std_normal_pdf(u);
        let none = functional_sojourn(&vec![0.5; n], a, u).unwrap();
        assert!((none + s * 2.0 * n as f64 * tail / dens).abs() < 1e-12);
        let all = functional_sojourn(&vec![-3.0; n], a, u).unwrap();
        assert!((all - s * n as f64 * (1.0 - 2.0 * tail) / dens).abs() < 1e-12);
        assert!(functional_sojourn(&[1.0], a, 0.0).is_err());
    }

    #[test]
    fn quadvar_hand_values() {
        let g = functional_quadvar(&[0.0; 17], 0.25).unwrap();
        assert!((g + 0.866_025_403_784_438_6 / 0.665).abs() < 1e-12);
        assert!((g + 1.302_293_840_277_351).abs() < 1e-9);
        let n = 64;
        let step = (n as f64).powf((0.25 - 2.0) / 2.0);
        let path: Vec<f64> = (0..=n).map(|j| j as f64 * step).collect();
        assert!(functional_quadvar(&path, 0.25).unwrap().abs() < 1e-12);
    }

    #[test]
    fn empirical_density_summaries() {
        let v: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let ed = EmpiricalDensity::from_replicates(v).unwrap();
        assert!((ed.bin_mass.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(ed.bin_edges.len(), ed.bin_mass.len() + 1);
        assert!(ed.kde_vals.iter().all(|&k| k >= 0.0));
        assert!((ed.mean - 0.5).abs() < 1e-12);
        assert!(ed.skewness.abs() < 1e-10);
        let flat = EmpiricalDensity::from_replicates(vec![1.0, 1.0]).unwrap();
        assert_eq!(flat.sd, 0.0);
        assert!(flat.kde_xs.is_empty());
        assert_eq!(flat.bin_mass, vec![1.0]);
    }

    #[test]
    fn two_sample_ks() {
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[3.0, 4.0]), 1.0);
        assert!((ks_two_sample(&[1.0, 3.0], &[2.0, 4.0]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn spec_validation() {
        let base = FunctionalSpec { functional: Functional::Mean, a: 0.25, n: 100, corr: CorrKind::Power };
        assert!(base.validate().is_ok());
        assert!(FunctionalSpec { a: 0.6, ..base }.validate().is_err());
        assert!(FunctionalSpec { functional: Functional::Corr { lag: 100 }, ..base }.validate().is_err());
        assert!(FunctionalSpec { functional: Functional::Sojourn { level: -1.0 }, ..base }.validate().is_err());
        let json = serde_json::to_string(&FunctionalSpec { functional: Functional::Corr { lag: 3 }, ..base }).unwrap();
        assert!(json.contains("\"functional\":\"corr\"") && json.contains("\"lag\":3"), "{json}");
    }

    #[test]
    fn identical_seeds_give_zero_spread() {
        let fs = FunctionalSpec { functional: Functional::Mean, a: 0.3, n: 500, corr: CorrKind::Power };
        let ed = run_monte_carlo_with_seeds(&fs, &[42, 42]).unwrap();
        assert_eq!(ed.sd, 0.0);
        let ed = run_monte_carlo(&fs, 50, 1).unwrap();
        assert_eq!(ed.replicates, run_monte_carlo(&fs, 50, 1).unwrap().replicates);
    }
}
