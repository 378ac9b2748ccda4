//! Density, distribution function, quantiles and exact sampling of `V_ε`.
//!
//! Density and CDF come from Fourier inversion of [`charfn_eps`]:
//!
//! ```text
//! f(x) = (1/π) ∫_0^Z Re(φ(z) e^{-izx}) dz
//! F(x) = 1/2 - (1/π) ∫_0^Z Im(φ(z) e^{-izx}) / z dz
//! ```
//!
//! `Z` starts at `zmax` and is doubled while `|φ(Z)|` is not negligible.
//! When few eigenvalues and no Gaussian remainder make `φ` decay only
//! algebraically (a = 0 is the extreme case, `|φ| ~ z^{-1/2}`), the rest of
//! the integral is summed over half-periods of the residual oscillation and
//! extrapolated with Wynn's epsilon algorithm.

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::charfn::log_charfn;
use crate::error::{domain, Error, Result};
use crate::quad::{integrate_vec, QuadConfig};
use crate::rng::substream;
use crate::spectrum::Spectrum;

/// `|φ(Z)|` below which the inversion integrals are cut at `Z`.
pub const DECAY_THRESHOLD: f64 = 1e-8;
/// Number of times `zmax` may be doubled before the tail is extrapolated.
pub const MAX_DOUBLINGS: u32 = 5;
/// Quantile search gives up beyond this magnitude.
pub const QUANTILE_BRACKET_LIMIT: f64 = 1e4;

const MAX_TAIL_PIECES: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InversionConfig {
    pub zmax: f64,
    /// Absolute tolerance of each inversion integral.
    pub tol: f64,
}

impl Default for InversionConfig {
    fn default() -> Self {
        Self { zmax: 20.0, tol: 1e-9 }
    }
}

/// Density and CDF on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityTable {
    pub xs: Vec<f64>,
    pub pdf: Vec<f64>,
    pub cdf: Vec<f64>,
    pub a: f64,
    #[serde(rename = "M")]
    pub m: usize,
    /// Cut-off actually used after auto-extension.
    pub quad_zmax: f64,
    pub quad_tol: f64,
}

impl DensityTable {
    pub fn log_pdf(&self) -> Vec<f64> {
        self.pdf.iter().map(|p| p.ln()).collect()
    }

    /// Trapezoid integral of the pdf over the grid.
    pub fn mass(&self) -> f64 {
        self.xs
            .windows(2)
            .zip(self.pdf.windows(2))
            .map(|(x, p)| 0.5 * (x[1] - x[0]) * (p[0] + p[1]))
            .sum()
    }

    /// Linear interpolation of the CDF; flat beyond the grid.
    pub fn cdf_at(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.cdf[0];
        }
        if x >= self.xs[n - 1] {
            return self.cdf[n - 1];
        }
        let j = self.xs.partition_point(|&g| g <= x);
        let (x0, x1) = (self.xs[j - 1], self.xs[j]);
        let t = (x - x0) / (x1 - x0);
        self.cdf[j - 1] + t * (self.cdf[j] - self.cdf[j - 1])
    }
}

/// `n`-point uniform grid from `xmin` to `xmax` in steps of `step` (the last
/// point is included when it lands on `xmax` up to rounding).
pub fn grid(xmin: f64, xmax: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(xmax >= xmin) || !xmin.is_finite() || !xmax.is_finite() {
        return Err(domain(format!("bad grid [{xmin}, {xmax}] step {step}")));
    }
    let n = ((xmax - xmin) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| xmin + i as f64 * step).collect())
}

fn check_config(cfg: &InversionConfig) -> Result<()> {
    if !(cfg.zmax > 0.0) || !(cfg.tol > 0.0) {
        return Err(domain(format!(
            "inversion needs zmax > 0 and tol > 0, got zmax={} tol={}",
            cfg.zmax, cfg.tol
        )));
    }
    Ok(())
}

/// Cut-off after doubling, and whether `|φ|` is still above threshold there.
fn cutoff(spec: &Spectrum, zmax: f64) -> (f64, bool) {
    let mut z = zmax;
    for _ in 0..MAX_DOUBLINGS {
        if log_charfn(spec, z).re < DECAY_THRESHOLD.ln() {
            return (z, false);
        }
        z *= 2.0;
    }
    (z, log_charfn(spec, z).re >= DECAY_THRESHOLD.ln())
}

/// Density at `x`.
pub fn density(spec: &Spectrum, x: f64, cfg: &InversionConfig) -> Result<f64> {
    Ok(density_table(spec, &[x], cfg)?.pdf[0])
}

/// Distribution function at `x`.
pub fn cdf(spec: &Spectrum, x: f64, cfg: &InversionConfig) -> Result<f64> {
    Ok(cdf_only(spec, &[x], cfg)?[0])
}

/// Density and CDF at every point of `xs`. The characteristic function is
/// evaluated once per quadrature node and shared by all grid points.
pub fn density_table(spec: &Spectrum, xs: &[f64], cfg: &InversionConfig) -> Result<DensityTable> {
    let (pdf, cdf, zmax) = invert(spec, xs, cfg, true)?;
    let mut pdf = pdf;
    let min = pdf.iter().copied().fold(f64::INFINITY, f64::min);
    if min < 0.0 {
        log::debug!("clipping negative inversion density, minimum {min:e}");
        for p in pdf.iter_mut() {
            *p = p.max(0.0);
        }
    }
    Ok(DensityTable {
        xs: xs.to_vec(),
        pdf,
        cdf,
        a: spec.a,
        m: spec.m,
        quad_zmax: zmax,
        quad_tol: cfg.tol,
    })
}

fn cdf_only(spec: &Spectrum, xs: &[f64], cfg: &InversionConfig) -> Result<Vec<f64>> {
    Ok(invert(spec, xs, cfg, false)?.1)
}

/// Returns (pdf, cdf, zmax used). The pdf is left unclipped.
fn invert(spec: &Spectrum, xs: &[f64], cfg: &InversionConfig, with_pdf: bool) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    check_config(cfg)?;
    if let Some(x) = xs.iter().find(|x| !x.is_finite()) {
        return Err(domain(format!("non-finite evaluation point {x}")));
    }
    let n = xs.len();
    let (zmax, slow) = cutoff(spec, cfg.zmax);
    let stride = if with_pdf { 2 } else { 1 };
    let quad = QuadConfig {
        abs_tol: cfg.tol,
        rel_tol: 0.0,
        max_intervals: 50_000,
    };
    let (head, _) = integrate_vec(
        |z, out| {
            let lf = log_charfn(spec, z);
            let modulus = lf.re.exp();
            for (j, &x) in xs.iter().enumerate() {
                let (s, c) = (lf.im - z * x).sin_cos();
                if with_pdf {
                    out[2 * j] = modulus * c;
                    out[2 * j + 1] = modulus * s / z;
                } else {
                    out[j] = modulus * s / z;
                }
            }
        },
        stride * n,
        0.0,
        zmax,
        &[],
        &quad,
    )?;

    let mut pdf = vec![0.0; if with_pdf { n } else { 0 }];
    let mut cdf = vec![0.0; n];
    for j in 0..n {
        let (mut p, mut c) = if with_pdf {
            (head[2 * j], head[2 * j + 1])
        } else {
            (0.0, head[j])
        };
        if slow {
            let (tp, tc) = oscillatory_tail(spec, xs[j], zmax, cfg.tol, with_pdf)?;
            p += tp;
            c += tc;
        }
        if with_pdf {
            pdf[j] = p / PI;
        }
        cdf[j] = (0.5 - c / PI).clamp(0.0, 1.0);
    }
    // Gil–Pelaez values are accurate to `tol`; remove sub-tolerance
    // wiggles so the tabulated CDF is non-decreasing along sorted grids.
    if xs.windows(2).all(|w| w[0] <= w[1]) {
        for j in 1..n {
            cdf[j] = cdf[j].max(cdf[j - 1]);
        }
    }
    Ok((pdf, cdf, zmax))
}

/// `∫_Z^∞ (Re, Im/z)(φ(z) e^{-izx}) dz` by half-period summation plus Wynn
/// extrapolation. For large z the phase of `φ(z)e^{-izx}` is
/// `-(x + Σλ) z` plus a slowly varying part.
fn oscillatory_tail(spec: &Spectrum, x: f64, start: f64, tol: f64, with_pdf: bool) -> Result<(f64, f64)> {
    let omega = x + spec.lambdas.iter().sum::<f64>();
    if omega.abs() < 1e-6 {
        return Err(Error::Numerical {
            message: format!("inversion at x = {x} sits on the edge of the support; tail does not oscillate"),
            achieved: f64::NAN,
        });
    }
    let half = PI / omega.abs();
    let quad = QuadConfig {
        abs_tol: tol * 1e-2,
        rel_tol: 1e-10,
        max_intervals: 2_000,
    };
    let mut partial = [Vec::new(), Vec::new()];
    let mut sums = [0.0, 0.0];
    let mut estimates = [f64::NAN, f64::NAN];
    let mut settled = [!with_pdf, false];
    let mut lo = start;
    for _ in 0..MAX_TAIL_PIECES {
        let hi = lo + half;
        let (piece, _) = integrate_vec(
            |z, out| {
                let w = log_charfn(spec, z).exp() * Complex64::new(0.0, -z * x).exp();
                out[0] = w.re;
                out[1] = w.im / z;
            },
            2,
            lo,
            hi,
            &[],
            &quad,
        )?;
        for k in 0..2 {
            sums[k] += piece[k];
            partial[k].push(sums[k]);
            if !settled[k] && partial[k].len() >= 8 {
                let e = wynn_epsilon(&partial[k]);
                if (e - estimates[k]).abs() < 0.1 * tol {
                    settled[k] = true;
                }
                estimates[k] = e;
            }
        }
        if settled[0] && settled[1] {
            return Ok((if with_pdf { estimates[0] } else { 0.0 }, estimates[1]));
        }
        lo = hi;
    }
    Err(Error::Numerical {
        message: format!("oscillatory tail at x = {x} did not settle within {MAX_TAIL_PIECES} half-periods"),
        achieved: (estimates[1] - wynn_epsilon(&partial[1][..partial[1].len() - 1])).abs(),
    })
}

/// Wynn's epsilon algorithm applied to a sequence of partial sums; returns
/// the highest-order even-column estimate.
fn wynn_epsilon(s: &[f64]) -> f64 {
    let n = s.len();
    let mut prev = vec![0.0; n + 1];
    let mut cur: Vec<f64> = s.to_vec();
    let mut best = s[n - 1];
    for col in 1..n {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for k in 0..cur.len() - 1 {
            let d = cur[k + 1] - cur[k];
            if d == 0.0 {
                return if col % 2 == 1 { cur[k + 1] } else { best };
            }
            next.push(prev[k + 1] + 1.0 / d);
        }
        prev = cur;
        cur = next;
        if col % 2 == 0 {
            if let Some(&v) = cur.last() {
                if v.is_finite() {
                    best = v;
                }
            }
        }
    }
    best
}

/// Smallest `x` with `F(x) ≥ p`, to `|F(x) - p| ≤ 1e-6`.
pub fn quantile(spec: &Spectrum, p: f64, cfg: &InversionConfig) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(domain(format!("quantile level must lie in (0, 1), got {p}")));
    }
    let f = |x: f64| cdf(spec, x, cfg);
    let out_of_range = |x: f64| Error::Numerical {
        message: format!("quantile bracket for p = {p} grew past |x| = {QUANTILE_BRACKET_LIMIT}"),
        achieved: x,
    };
    let (mut lo, mut hi) = (-1.0, 1.0);
    while f(lo)? > p {
        lo *= 2.0;
        if lo < -QUANTILE_BRACKET_LIMIT {
            return Err(out_of_range(lo));
        }
    }
    while f(hi)? < p {
        hi *= 2.0;
        if hi > QUANTILE_BRACKET_LIMIT {
            return Err(out_of_range(hi));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) || hi - lo < 1e-12 * (1.0 + mid.abs()) {
            break;
        }
        if f(mid)? < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Grid size used by [`ks_statistic`] for large samples.
pub const KS_GRID_POINTS: usize = 4001;

/// Kolmogorov–Smirnov distance between `samples` and the law of `spec`.
///
/// Up to [`KS_GRID_POINTS`] samples the CDF is inverted at every sample;
/// beyond that it is tabulated on a uniform grid spanning the sample range
/// and interpolated linearly. A single sample `x₀` gives
/// `max(F(x₀), 1 - F(x₀))`.
pub fn ks_statistic(samples: &[f64], spec: &Spectrum, cfg: &InversionConfig) -> Result<f64> {
    if samples.is_empty() {
        return Err(domain("KS distance of an empty sample".to_string()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let f: Vec<f64> = if n <= KS_GRID_POINTS {
        cdf_only(spec, &sorted, cfg)?
    } else {
        let (lo, hi) = (sorted[0], sorted[n - 1]);
        let step = (hi - lo) / (KS_GRID_POINTS - 1) as f64;
        let xs: Vec<f64> = (0..KS_GRID_POINTS).map(|i| lo + i as f64 * step).collect();
        let cdf = cdf_only(spec, &xs, cfg)?;
        let table = DensityTable {
            xs,
            pdf: Vec::new(),
            cdf,
            a: spec.a,
            m: spec.m,
            quad_zmax: cfg.zmax,
            quad_tol: cfg.tol,
        };
        sorted.iter().map(|&x| table.cdf_at(x)).collect()
    };
    let nf = n as f64;
    Ok(f.iter().enumerate().fold(0.0_f64, |d, (i, &fi)| {
        d.max(fi - i as f64 / nf).max((i + 1) as f64 / nf - fi)
    }))
}

/// Draw `i` of the stream keyed by `seed`.
pub fn sample_one(spec: &Spectrum, seed: u64, i: u64) -> f64 {
    let mut rng = substream(seed, i);
    let mut v = 0.0;
    if spec.sigma_eps2 > 0.0 {
        let e: f64 = StandardNormal.sample(&mut rng);
        v += spec.sigma_eps() * e;
    }
    for &l in spec.lambdas.iter().filter(|&&l| l > 0.0) {
        let e: f64 = StandardNormal.sample(&mut rng);
        v += l * (e * e - 1.0);
    }
    v
}

/// `count` independent draws of `V_ε`; draw `i` depends only on `(seed, i)`.
pub fn sample(spec: &Spectrum, seed: u64, count: usize) -> Vec<f64> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| sample_one(spec, seed, i))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wynn_accelerates_alternating_series() {
        // ln 2 = 1 - 1/2 + 1/3 - ...
        let mut s = 0.0;
        let partial: Vec<f64> = (1..=20)
            .map(|k| {
                s += if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
                s
            })
            .collect();
        assert!((wynn_epsilon(&partial) - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn grid_includes_end_point() {
        let g = grid(-3.0, 3.0, 0.05).unwrap();
        assert_eq!(g.len(), 121);
        assert!((g[120] - 3.0).abs() < 1e-12);
        assert!(grid(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn gaussian_limit() {
        let spec = Spectrum::build(0.5 - 1e-12, 20).unwrap();
        let cfg = InversionConfig::default();
        let f0 = density(&spec, 0.0, &cfg).unwrap();
        assert!((f0 - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-8);
        assert!((cdf(&spec, 0.0, &cfg).unwrap() - 0.5).abs() < 1e-9);
        assert!((cdf(&spec, 1.0, &cfg).unwrap() - crate::specfn::std_normal_cdf(1.0)).abs() < 1e-8);
        assert!(quantile(&spec, 0.5, &cfg).unwrap().abs() < 1e-8);
    }

    #[test]
    fn bad_inputs() {
        let spec = Spectrum::build(0.3, 10).unwrap();
        let cfg = InversionConfig { zmax: 0.0, tol: 1e-9 };
        assert!(matches!(density(&spec, 0.0, &cfg), Err(Error::Domain(_))));
        assert!(quantile(&spec, 1.0, &InversionConfig::default()).is_err());
    }

    #[test]
    fn sampler_is_indexed() {
        let spec = Spectrum::build(0.3, 30).unwrap();
        let all = sample(&spec, 11, 100);
        assert_eq!(all[57], sample_one(&spec, 11, 57));
        assert_eq!(&sample(&spec, 11, 60)[..], &all[..60]);
        assert_ne!(sample(&spec, 12, 1)[0], all[0]);
    }
}
