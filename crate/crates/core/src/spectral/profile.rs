use serde::{Deserialize, Serialize};

use super::Spectrum;
use crate::error::{Error, Result};

/// Entries below this magnitude are excluded from the log fit.
pub const FIT_FLOOR: f64 = 1e-12;

/// Least-squares fit `log env(r) ≈ intercept − rate·r^xi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub xi: f64,
    pub rate: f64,
    pub intercept: f64,
    pub rms_residual: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayProfile {
    /// Row index of the largest |φ| (first one on ties).
    pub center_x0: usize,
    /// `log max_{s ≥ r} max(|φ(x₀−s)|, |φ(x₀+s)|)`, nonincreasing in r.
    pub log_envelope: Vec<f64>,
    pub fit: Option<DecayFit>,
    /// All |φ| equal: no decay to speak of.
    pub degenerate: bool,
}

impl DecayProfile {
    pub fn fitted_xi(&self) -> Option<f64> {
        self.fit.map(|f| f.xi)
    }

    pub fn fitted_rate(&self) -> Option<f64> {
        self.fit.map(|f| f.rate)
    }
}

pub fn localization_profile(spec: &Spectrum, which: usize) -> Result<DecayProfile> {
    let v = spec.vector(which).ok_or_else(|| {
        Error::InvalidParameters(format!("no eigenvector stored for index {which}"))
    })?;
    localization_profile_of(v)
}

pub fn localization_profile_of(phi: &[f64]) -> Result<DecayProfile> {
    if phi.is_empty() {
        return Err(Error::Shape("empty vector".into()));
    }
    let abs: Vec<f64> = phi.iter().map(|x| x.abs()).collect();
    let mut x0 = 0;
    for (i, &a) in abs.iter().enumerate() {
        if a > abs[x0] {
            x0 = i;
        }
    }
    let max = abs[x0];
    let min = abs.iter().copied().fold(f64::INFINITY, f64::min);
    let degenerate = abs.len() > 1 && max - min <= 1e-14 * max;

    let reach = x0.max(abs.len() - 1 - x0);
    let mut env: Vec<f64> = (0..=reach)
        .map(|r| {
            let left = x0.checked_sub(r).map_or(0.0, |i| abs[i]);
            let right = abs.get(x0 + r).copied().unwrap_or(0.0);
            left.max(right)
        })
        .collect();
    for r in (0..env.len().saturating_sub(1)).rev() {
        env[r] = env[r].max(env[r + 1]);
    }
    let log_envelope: Vec<f64> = env.iter().map(|&e| e.ln()).collect();
    let fit = if degenerate { None } else { fit_stretched(&env) };
    Ok(DecayProfile {
        center_x0: x0,
        log_envelope,
        fit,
        degenerate,
    })
}

fn fit_stretched(env: &[f64]) -> Option<DecayFit> {
    let pts: Vec<(f64, f64)> = env
        .iter()
        .enumerate()
        .filter(|&(_, &e)| e > FIT_FLOOR)
        .map(|(r, &e)| (r as f64, e.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let mut best: Option<DecayFit> = None;
    for k in 0..=180 {
        let xi = 0.2 + 0.01 * k as f64;
        let n = pts.len() as f64;
        let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
        for &(r, y) in &pts {
            let x = r.powf(xi);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        let den = n * sxx - sx * sx;
        if den <= 0.0 {
            continue;
        }
        let slope = (n * sxy - sx * sy) / den;
        let intercept = (sy - slope * sx) / n;
        let sse: f64 = pts
            .iter()
            .map(|&(r, y)| (y - intercept - slope * r.powf(xi)).powi(2))
            .sum();
        let cand = DecayFit {
            xi,
            rate: -slope,
            intercept,
            rms_residual: (sse / n).sqrt(),
            points: pts.len(),
        };
        if best.is_none_or(|b| cand.rms_residual < b.rms_residual) {
            best = Some(cand);
        }
    }
    best
}
