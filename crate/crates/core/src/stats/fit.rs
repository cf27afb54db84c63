//! Confidence intervals and power-law fits shared by every estimator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // clamp so the interval always contains p despite rounding
    ((centre - half).max(0.0).min(p), (centre + half).min(1.0).max(p))
}

/// A frequency observation for a log-log fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    pub x: f64,
    pub y: f64,
    /// Number of Bernoulli trials behind `y`, if `y` is a frequency.
    pub trials: Option<u64>,
    /// `y` is this multiple of the frequency.
    #[serde(default = "unit")]
    pub scale: f64,
}

fn unit() -> f64 {
    1.0
}

impl FitPoint {
    pub fn exact(x: f64, y: f64) -> Self {
        Self { x, y, trials: None, scale: 1.0 }
    }

    pub fn frequency(x: f64, successes: u64, trials: u64) -> Self {
        Self {
            x,
            y: if trials == 0 { 0.0 } else { successes as f64 / trials as f64 },
            trials: Some(trials),
            scale: 1.0,
        }
    }

    /// `factor` times a frequency; `log y` keeps the frequency's variance.
    pub fn scaled_frequency(x: f64, successes: u64, trials: u64, factor: f64) -> Self {
        let f = Self::frequency(x, successes, trials);
        Self { y: f.y * factor, scale: factor, ..f }
    }

    /// Delta-method variance of `log y` for a binomial frequency.
    fn log_variance(&self) -> Option<f64> {
        self.trials.map(|n| {
            let n = n as f64;
            let p = self.y / self.scale;
            ((1.0 - p) + 0.5 / n) / (n * p)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    /// Points actually used (positive `x` and `y`).
    pub points: usize,
    /// Weighted residual sum of squares.
    pub chi2: f64,
    /// Coefficient of determination on the log scale.
    pub r2: f64,
}

/// Weighted least squares of `log y` on `log x`.
///
/// Points with binomial trial counts are weighted by the inverse delta-method
/// variance and the slope error is scaled by `max(1, χ²/(n−2))`; with no
/// variances at all the error comes from the residuals.
pub fn exponent_fit(points: &[FitPoint]) -> Result<ExponentFit> {
    let used: Vec<&FitPoint> = points
        .iter()
        .filter(|p| p.x > 0.0 && p.y > 0.0 && p.x.is_finite() && p.y.is_finite())
        .collect();
    if used.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "exponent fit needs at least 3 positive points, got {}",
            used.len()
        )));
    }
    let weighted = used.iter().all(|p| p.trials.is_some());
    let data: Vec<(f64, f64, f64)> = used
        .iter()
        .map(|p| {
            let w = if weighted { 1.0 / p.log_variance().expect("weighted") } else { 1.0 };
            (p.x.ln(), p.y.ln(), w)
        })
        .collect();
    let sw: f64 = data.iter().map(|d| d.2).sum();
    let mx = data.iter().map(|d| d.2 * d.0).sum::<f64>() / sw;
    let my = data.iter().map(|d| d.2 * d.1).sum::<f64>() / sw;
    let sxx: f64 = data.iter().map(|d| d.2 * (d.0 - mx).powi(2)).sum();
    let sxy: f64 = data.iter().map(|d| d.2 * (d.0 - mx) * (d.1 - my)).sum();
    let syy: f64 = data.iter().map(|d| d.2 * (d.1 - my).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Degenerate("all fit abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let chi2: f64 = data
        .iter()
        .map(|d| d.2 * (d.1 - intercept - slope * d.0).powi(2))
        .sum();
    let dof = (data.len() - 2) as f64;
    let stderr = if weighted {
        ((chi2 / dof).max(1.0) / sxx).sqrt()
    } else {
        (chi2 / dof / sxx).sqrt()
    };
    let r2 = if syy > 0.0 { 1.0 - chi2 / syy } else { 1.0 };
    Ok(ExponentFit {
        slope,
        intercept,
        stderr,
        points: data.len(),
        chi2,
        r2,
    })
}

/// Ordinary least squares `y = a + b x`, returning `(a, b, r²)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InsufficientData("linear fit needs two or more points".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Degenerate("all fit abscissae coincide".into()));
    }
    let b = sxy / sxx;
    let a = my - b * mx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Ok((a, b, r2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exact_square_law() {
        let pts: Vec<FitPoint> = (1..8).map(|k| FitPoint::exact(k as f64, (k * k) as f64)).collect();
        let f = exponent_fit(&pts).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && f.stderr < 1e-12);
    }

    #[test]
    fn constant_law() {
        let pts: Vec<FitPoint> = (1..6).map(|k| FitPoint::exact(k as f64, 3.0)).collect();
        assert!(exponent_fit(&pts).unwrap().slope.abs() < 1e-14);
    }

    #[test]
    fn too_few_points() {
        let pts = [FitPoint::exact(1.0, 1.0), FitPoint::exact(2.0, 0.0), FitPoint::exact(3.0, 2.0)];
        assert!(matches!(exponent_fit(&pts), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn wilson_contains_estimate() {
        for (k, n) in [(0, 10), (10, 10), (3, 7), (500, 1000)] {
            let (lo, hi) = wilson_interval(k, n, Z95);
            let p = k as f64 / n as f64;
            assert!(lo <= p && p <= hi && lo >= 0.0 && hi <= 1.0);
        }
        let (lo, hi) = wilson_interval(50, 100, Z95);
        assert!((lo - 0.4038).abs() < 1e-3 && (hi - 0.5962).abs() < 1e-3);
    }

    #[test]
    fn noisy_slope_calibration() {
        // binomial frequencies with p = 0.002·x^1.5
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut covered = 0;
        let meta = 200;
        for _ in 0..meta {
            let pts: Vec<FitPoint> = [1.0, 2.0, 4.0, 8.0, 16.0]
                .iter()
                .map(|&x: &f64| {
                    let p = 0.002 * x.powf(1.5);
                    let n = 4000u64;
                    let k = (0..n).filter(|_| rng.random::<f64>() < p).count() as u64;
                    FitPoint::frequency(x, k, n)
                })
                .collect();
            let f = exponent_fit(&pts).unwrap();
            if (f.slope - 1.5).abs() <= 2.0 * f.stderr {
                covered += 1;
            }
        }
        assert!(covered as f64 >= 0.95 * meta as f64 * 0.97, "covered {covered}/{meta}");
    }
}
