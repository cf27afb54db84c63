//! Monte Carlo sublevel-set measures `|{x ∈ G : |f(x)| < ε}|` and their
//! power-law exponent.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{exponent_fit, wilson_interval, ExponentFit, FitPoint, Z95};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SublevelEstimate {
    pub eps: f64,
    pub measure: f64,
    /// Wilson 95% interval, scaled by the box volume.
    pub ci: (f64, f64),
    pub hits: u64,
    pub samples: u64,
    pub volume: f64,
}

/// Exponent fit of `measure ≈ (ε/ε₀)^{1/m}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SublevelProfile {
    pub estimates: Vec<SublevelEstimate>,
    pub fit: ExponentFit,
    /// Fitted `1/m`.
    pub exponent: f64,
    /// Fitted `ε₀` with the measure normalised to the box volume.
    pub eps0: f64,
}

fn check_box(bounds: &[(f64, f64)]) -> Result<f64> {
    if bounds.is_empty() {
        return Err(Error::InvalidParameters("empty box".into()));
    }
    bounds.iter().try_fold(1.0, |v, &(lo, hi)| {
        if lo < hi && lo.is_finite() && hi.is_finite() {
            Ok(v * (hi - lo))
        } else {
            Err(Error::InvalidParameters(format!("bad interval [{lo}, {hi}]")))
        }
    })
}

/// Absolute values `|f|` at `samples` uniform points, from a fixed seed so
/// that every ε shares the same points.
fn sample_values(f: &dyn Fn(&[f64]) -> f64, bounds: &[(f64, f64)], samples: u64, seed: u64) -> Result<Vec<f64>> {
    if samples == 0 {
        return Err(Error::InvalidParameters("zero samples".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![0.0; bounds.len()];
    (0..samples)
        .map(|_| {
            for (xi, &(lo, hi)) in x.iter_mut().zip(bounds) {
                *xi = lo + (hi - lo) * rng.random::<f64>();
            }
            let v = f(&x);
            if v.is_nan() {
                Err(Error::Numeric(format!("f is NaN at {x:?}")))
            } else {
                Ok(v.abs())
            }
        })
        .collect()
}

fn estimate(values: &[f64], eps: f64, volume: f64) -> SublevelEstimate {
    let hits = values.iter().filter(|v| **v < eps).count() as u64;
    let n = values.len() as u64;
    let (lo, hi) = wilson_interval(hits, n, Z95);
    SublevelEstimate {
        eps,
        measure: volume * hits as f64 / n as f64,
        ci: (volume * lo, volume * hi),
        hits,
        samples: n,
        volume,
    }
}

pub fn sublevel_measure(
    f: &dyn Fn(&[f64]) -> f64,
    bounds: &[(f64, f64)],
    eps: f64,
    samples: u64,
    seed: u64,
) -> Result<SublevelEstimate> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameters(format!("eps must be positive, got {eps}")));
    }
    let volume = check_box(bounds)?;
    Ok(estimate(&sample_values(f, bounds, samples, seed)?, eps, volume))
}

/// Estimates over an ε grid with common random numbers, then a weighted
/// log-log fit of the hit frequency against ε.
pub fn sublevel_profile(
    f: &dyn Fn(&[f64]) -> f64,
    bounds: &[(f64, f64)],
    eps_grid: &[f64],
    samples: u64,
    seed: u64,
) -> Result<SublevelProfile> {
    if eps_grid.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::InvalidParameters("eps grid must be positive".into()));
    }
    let volume = check_box(bounds)?;
    let values = sample_values(f, bounds, samples, seed)?;
    let estimates: Vec<SublevelEstimate> = eps_grid.iter().map(|&e| estimate(&values, e, volume)).collect();
    let points: Vec<FitPoint> = estimates
        .iter()
        .map(|e| FitPoint::frequency(e.eps, e.hits, e.samples))
        .collect();
    let fit = exponent_fit(&points)?;
    let exponent = fit.slope;
    // frequency = (ε/ε₀)^s  ⇒  ε₀ = exp(−intercept/s)
    let eps0 = if exponent != 0.0 { (-fit.intercept / exponent).exp() } else { f64::NAN };
    Ok(SublevelProfile {
        estimates,
        fit,
        exponent,
        eps0,
    })
}

/// `n` log-spaced values from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()).collect()
}
