//! Joint occupation of windows of width `2/L` around two energies in a box of
//! side `l = round(L^α)`.

use serde::{Deserialize, Serialize};

use super::fit::{exponent_fit, wilson_interval, ExponentFit, FitPoint, Z95};
use super::{add_counts, box_for, par_tally, size_stream, streams};
use crate::error::{Error, Result};
use crate::model::{build_box_operator, sample_disorder, ModelSpec};
use crate::seed::trial_seed;
use crate::spectral::count_in_interval;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecorrelationPoint {
    pub size: usize,
    pub box_side: usize,
    pub trials: u64,
    pub hits_f: u64,
    pub hits_g: u64,
    pub hits_joint: u64,
    pub freq_f: f64,
    pub freq_g: f64,
    pub freq_joint: f64,
    pub ci_joint: (f64, f64),
    /// `P̂(A∩B) / (P̂(A)P̂(B))`; 0 without joint events.
    pub ratio: f64,
    /// Delta-method 95% interval on the log scale; `(0, ∞)` without joint
    /// events.
    pub ratio_ci: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecorrelationReport {
    pub f: f64,
    pub g: f64,
    pub alpha: f64,
    /// Both events read from independent samples.
    pub decoupled: bool,
    pub points: Vec<DecorrelationPoint>,
    /// `log(P̂(A∩B)/l²)` against `log L`; slope `−(1+γ)`.
    pub fit: Option<ExponentFit>,
    pub one_plus_gamma: Option<f64>,
    pub gamma: Option<f64>,
    pub gamma_stderr: Option<f64>,
}

impl DecorrelationReport {
    /// `γ̂ > 0` by at least `z` standard errors.
    pub fn gamma_positive(&self, z: f64) -> bool {
        matches!((self.gamma, self.gamma_stderr), (Some(g), Some(s)) if g - z * s > 0.0)
    }
}

fn log_var(hits: u64, trials: u64) -> f64 {
    let p = hits as f64 / trials as f64;
    (1.0 - p) / (trials as f64 * p)
}

#[allow(clippy::too_many_arguments)]
pub fn decorrelation_probe(
    model: &ModelSpec,
    f: f64,
    g: f64,
    alpha: f64,
    sizes: &[usize],
    trials: u64,
    decoupled: bool,
    seed: u64,
) -> Result<DecorrelationReport> {
    if f == g {
        return Err(Error::InvalidParameters("decorrelation needs F ≠ G".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameters(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if sizes.is_empty() || sizes.contains(&0) || trials == 0 {
        return Err(Error::InvalidParameters("need positive sizes and trials".into()));
    }
    let mut points = Vec::with_capacity(sizes.len());
    for (k, &size) in sizes.iter().enumerate() {
        let big_l = size as f64;
        let side = (big_l.powf(alpha).round() as usize).max(1);
        let half = 1.0 / big_l;
        let bx = box_for(model, side);
        let stream = size_stream(streams::DECORRELATION, k);
        let second = size_stream(streams::DECOUPLED, k);
        let t = par_tally(
            trials,
            vec![0u64; 3],
            |t| {
                let op = build_box_operator(model, &sample_disorder(model, bx, trial_seed(seed, stream, t))?, bx)?;
                let a = count_in_interval(&op, f - half, f + half)? > 0;
                let b = if decoupled {
                    let other = sample_disorder(model, bx, trial_seed(seed, second, t))?;
                    count_in_interval(&build_box_operator(model, &other, bx)?, g - half, g + half)? > 0
                } else {
                    count_in_interval(&op, g - half, g + half)? > 0
                };
                Ok(vec![a as u64, b as u64, (a && b) as u64])
            },
            add_counts,
        )?;
        let n = trials as f64;
        let (hits_f, hits_g, hits_joint) = (t[0], t[1], t[2]);
        let (pf, pg, pj) = (hits_f as f64 / n, hits_g as f64 / n, hits_joint as f64 / n);
        let (ratio, ratio_ci) = if hits_joint > 0 {
            let r = pj / (pf * pg);
            let sd = (log_var(hits_joint, trials) + log_var(hits_f, trials) + log_var(hits_g, trials)).sqrt();
            (r, (r * (-Z95 * sd).exp(), r * (Z95 * sd).exp()))
        } else {
            (0.0, (0.0, f64::INFINITY))
        };
        points.push(DecorrelationPoint {
            size,
            box_side: side,
            trials,
            hits_f,
            hits_g,
            hits_joint,
            freq_f: pf,
            freq_g: pg,
            freq_joint: pj,
            ci_joint: wilson_interval(hits_joint, trials, Z95),
            ratio,
            ratio_ci,
        });
    }
    let fit_points: Vec<FitPoint> = points
        .iter()
        .map(|p| FitPoint::scaled_frequency(p.size as f64, p.hits_joint, p.trials, 1.0 / (p.box_side as f64).powi(2)))
        .collect();
    let fit = exponent_fit(&fit_points).ok();
    Ok(DecorrelationReport {
        f,
        g,
        alpha,
        decoupled,
        one_plus_gamma: fit.map(|x| -x.slope),
        gamma: fit.map(|x| -x.slope - 1.0),
        gamma_stderr: fit.map(|x| x.stderr),
        fit,
        points,
    })
}
