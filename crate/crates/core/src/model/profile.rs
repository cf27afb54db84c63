//! Piecewise-linear single-site profiles `q` for the continuum alloy.

use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimal sampling density accepted for a table (samples per unit length).
pub const MIN_SAMPLES_PER_UNIT: f64 = 64.0;

/// A sampled function on `[-N, N]`, linearly interpolated between samples and
/// zero outside. `eta` is the covering constant recomputed from the table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleSiteProfile {
    radius: usize,
    xs: Vec<f64>,
    ys: Vec<f64>,
    eta: f64,
}

impl SingleSiteProfile {
    /// Validates shape, sampling density and the covering condition.
    pub fn from_samples(radius: usize, xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let problems = Self::check(radius, &xs, &ys);
        if let Some(p) = problems.into_iter().next() {
            return Err(Error::config("single_site_q", p));
        }
        let eta = covering_eta(&xs, &ys);
        Ok(Self { radius, xs, ys, eta })
    }

    /// Samples `f` on a uniform grid of `per_unit` points per unit length.
    pub fn from_fn(radius: usize, per_unit: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let n = 2 * radius * per_unit;
        let xs: Vec<f64> = (0..=n)
            .map(|k| -(radius as f64) + k as f64 / per_unit as f64)
            .collect();
        let ys = xs.iter().map(|&x| f(x)).collect();
        Self::from_samples(radius, xs, ys)
    }

    /// Tent `c·max(0, 1 − |x|/N)` lifted to stay positive on `[-1/2, 1/2]`.
    pub fn tent(radius: usize, height: f64) -> Result<Self> {
        let r = radius as f64;
        Self::from_fn(radius, 64, |x| height * (1.0 - x.abs() / r).max(0.0))
    }

    /// Two-column CSV `position,value`; a non-numeric first line is a header.
    pub fn from_csv(path: &Path, radius: usize) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (lineno, line) in std::io::BufReader::new(file).lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split(',').map(str::trim);
            let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::config(
                    "single_site_q",
                    format!("line {}: expected two columns", lineno + 1),
                ));
            };
            match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(x), Ok(y)) => {
                    xs.push(x);
                    ys.push(y);
                }
                _ if xs.is_empty() && lineno == 0 => continue,
                _ => {
                    return Err(Error::config(
                        "single_site_q",
                        format!("line {}: unparsable number", lineno + 1),
                    ))
                }
            }
        }
        Self::from_samples(radius, xs, ys)
    }

    /// All problems with a candidate table (empty when valid).
    pub fn check(radius: usize, xs: &[f64], ys: &[f64]) -> Vec<String> {
        let mut out = Vec::new();
        if radius == 0 {
            out.push("support radius must be positive".into());
            return out;
        }
        if xs.len() != ys.len() || xs.len() < 2 {
            out.push("table needs matching position/value columns with at least two rows".into());
            return out;
        }
        if xs.iter().chain(ys).any(|v| !v.is_finite()) {
            out.push("table contains non-finite entries".into());
            return out;
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            out.push("positions must be strictly increasing".into());
            return out;
        }
        let r = radius as f64;
        if (xs[0] + r).abs() > 1e-9 || (xs[xs.len() - 1] - r).abs() > 1e-9 {
            out.push(format!("table must span exactly [-{radius}, {radius}]"));
        }
        let max_gap = xs.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        if max_gap > 1.0 / MIN_SAMPLES_PER_UNIT + 1e-12 {
            out.push(format!(
                "sampling too coarse: gap {max_gap} exceeds 1/{MIN_SAMPLES_PER_UNIT}"
            ));
        }
        if ys.iter().any(|&y| y < 0.0) {
            out.push("q must be nonnegative".into());
        }
        if out.is_empty() && covering_eta(xs, ys) <= 0.0 {
            out.push("covering condition fails: q must be bounded below on [-1/2, 1/2]".into());
        }
        out
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn positions(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.ys
    }

    pub fn eval(&self, x: f64) -> f64 {
        interp(&self.xs, &self.ys, x)
    }

    pub fn max_value(&self) -> f64 {
        self.ys.iter().copied().fold(0.0, f64::max)
    }

    /// ∫ q, by the trapezoid rule (exact for the piecewise-linear table).
    pub fn integral(&self) -> f64 {
        self.xs
            .windows(2)
            .zip(self.ys.windows(2))
            .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
            .sum()
    }
}

fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x < xs[0] || x > xs[xs.len() - 1] {
        return 0.0;
    }
    let k = xs.partition_point(|&p| p <= x);
    if k == 0 {
        return ys[0];
    }
    if k == xs.len() {
        return ys[xs.len() - 1];
    }
    let t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
    ys[k - 1] + t * (ys[k] - ys[k - 1])
}

/// η = min(min_{[-1/2,1/2]} q, 1 / max q); nonpositive when (H2) fails.
fn covering_eta(xs: &[f64], ys: &[f64]) -> f64 {
    let mut lo = interp(xs, ys, -0.5).min(interp(xs, ys, 0.5));
    for (&x, &y) in xs.iter().zip(ys) {
        if (-0.5..=0.5).contains(&x) {
            lo = lo.min(y);
        }
    }
    let hi = ys.iter().copied().fold(0.0, f64::max);
    if hi <= 0.0 {
        return 0.0;
    }
    lo.min(1.0 / hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn tent_is_covering() {
        let q = SingleSiteProfile::tent(2, 1.0).unwrap();
        // min on [-1/2,1/2] is 1 − 1/4, max is 1
        assert!((q.eta() - 0.75).abs() < 1e-12);
        assert!((q.eval(1.0) - 0.5).abs() < 1e-12);
        assert_eq!(q.eval(2.5), 0.0);
        assert!((q.integral() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_hole_in_the_middle() {
        let err = SingleSiteProfile::from_fn(1, 64, |x| if x.abs() < 0.1 { 0.0 } else { 1.0 });
        assert!(matches!(err, Err(Error::Config { .. })));
    }

    #[test]
    fn rejects_coarse_table() {
        let err = SingleSiteProfile::from_fn(1, 8, |_| 1.0);
        assert!(err.is_err());
    }

    #[test]
    fn csv_roundtrip() {
        let q = SingleSiteProfile::tent(1, 2.0).unwrap();
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "position,value").unwrap();
        for (x, y) in q.positions().iter().zip(q.values()) {
            writeln!(f, "{x:.17e},{y:.17e}").unwrap();
        }
        let back = SingleSiteProfile::from_csv(f.path(), 1).unwrap();
        assert_eq!(back, q);
    }
}
