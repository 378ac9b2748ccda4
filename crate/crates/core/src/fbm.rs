//! Fractional Brownian motion on the grid `j/n`, `j = 0..=n`, by circulant
//! embedding of fractional Gaussian noise (Wood–Chan).

use std::sync::Arc;

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::rng::substream;

/// Hurst exponent, `0 < H < 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Hurst(f64);

impl Hurst {
    pub fn new(h: f64) -> Result<Self> {
        if h > 0.0 && h < 1.0 {
            Ok(Hurst(h))
        } else {
            Err(domain(format!("Hurst exponent must lie in (0, 1), got {h}")))
        }
    }

    /// `H = 1 - a/2`.
    pub fn from_shape(a: f64) -> Result<Self> {
        Self::new(1.0 - a / 2.0)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Rosenblatt shape `a = 2 - 2H`.
    pub fn shape(self) -> f64 {
        2.0 - 2.0 * self.0
    }
}

/// Autocovariance of unit-spaced fractional Gaussian noise,
/// `½(|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H})`.
pub fn fgn_autocov(h: Hurst, k: usize) -> f64 {
    let p = 2.0 * h.0;
    let k = k as f64;
    0.5 * ((k + 1.0).powf(p) - 2.0 * k.powf(p) + (k - 1.0).abs().powf(p))
}

/// Reusable sampler for paths of a fixed `(H, n)`; the embedding is
/// factorised once.
pub struct FbmGenerator {
    hurst: Hurst,
    n: usize,
    /// `√(λ_k / 2n)` for the circulant eigenvalues `λ_k`.
    amplitudes: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl FbmGenerator {
    pub fn new(hurst: Hurst, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(domain(format!("fBm grid needs n ≥ 2, got {n}")));
        }
        let m = 2 * n;
        let mut row: Vec<Complex64> = (0..m)
            .map(|j| Complex64::new(fgn_autocov(hurst, j.min(m - j)), 0.0))
            .collect();
        let fft = FftPlanner::new().plan_fft_forward(m);
        fft.process(&mut row);
        let max = row.iter().map(|c| c.re).fold(f64::NEG_INFINITY, f64::max);
        let min = row.iter().map(|c| c.re).fold(f64::INFINITY, f64::min);
        if min < -1e-10 * max {
            return Err(Error::Numerical {
                message: format!("circulant embedding is not nonnegative definite (H = {}, n = {n})", hurst.0),
                achieved: min,
            });
        }
        if min < 0.0 {
            log::warn!("clipping circulant eigenvalue {min:e} to zero (H = {}, n = {n})", hurst.0);
        }
        let amplitudes = row.iter().map(|c| (c.re.max(0.0) / m as f64).sqrt()).collect();
        Ok(FbmGenerator { hurst, n, amplitudes, fft })
    }

    pub fn hurst(&self) -> Hurst {
        self.hurst
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Path `X(j/n)`, `j = 0..=n`, with `X(0) = 0`.
    pub fn path(&self, seed: u64) -> Vec<f64> {
        let mut rng = substream(seed, 0);
        let mut w: Vec<Complex64> = self
            .amplitudes
            .iter()
            .map(|&s| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(s * re, s * im)
            })
            .collect();
        self.fft.process(&mut w);
        let scale = (self.n as f64).powf(-self.hurst.0);
        let mut x = Vec::with_capacity(self.n + 1);
        let mut acc = 0.0;
        x.push(0.0);
        for c in &w[..self.n] {
            acc += scale * c.re;
            x.push(acc);
        }
        x
    }
}

/// One fBm path on `[0, 1]` with `n` steps.
pub fn simulate_fbm(hurst: Hurst, n: usize, seed: u64) -> Result<Vec<f64>> {
    Ok(FbmGenerator::new(hurst, n)?.path(seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn autocovariance_values() {
        let bm = Hurst::new(0.5).unwrap();
        assert_eq!(fgn_autocov(bm, 0), 1.0);
        assert!(fgn_autocov(bm, 1).abs() < 1e-15);
        let h = Hurst::new(0.75).unwrap();
        assert!((fgn_autocov(h, 1) - (2f64.powf(1.5) - 2.0) / 2.0).abs() < 1e-15);
        let k = 5000;
        let asym = 0.75 * 0.5 * (k as f64).powf(-0.5);
        assert!((fgn_autocov(h, k) / asym - 1.0).abs() < 1e-6);
    }

    #[test]
    fn hurst_domain() {
        assert!(Hurst::new(1.0).is_err());
        assert!(Hurst::new(0.0).is_err());
        let h = Hurst::from_shape(0.25).unwrap();
        assert!((h.value() - 0.875).abs() < 1e-15 && (h.shape() - 0.25).abs() < 1e-15);
        assert!(simulate_fbm(h, 1, 0).is_err());
    }

    #[test]
    fn paths_start_at_zero_and_repeat() {
        let g = FbmGenerator::new(Hurst::new(0.8).unwrap(), 1000).unwrap();
        let p = g.path(4);
        assert_eq!(p.len(), 1001);
        assert_eq!(p[0], 0.0);
        assert_eq!(p, g.path(4));
        assert_ne!(p, g.path(5));
    }
}
