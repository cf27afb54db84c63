//! Interval-occupation probabilities: at least one eigenvalue (Wegner) and
//! excess multiplicity (Minami).

use serde::{Deserialize, Serialize};

use super::fit::{exponent_fit, linear_fit, wilson_interval, ExponentFit, FitPoint, Z95};
use super::{add_counts, box_for, par_tally, size_stream, streams};
use crate::error::{Error, Result};
use crate::model::{build_box_operator, sample_disorder, ModelSpec};
use crate::seed::trial_seed;
use crate::spectral::count_in_interval;

/// Frequencies above this are outside the linear regime of the fit.
const LINEAR_REGIME: f64 = 0.3;
/// Frequency treated as saturated.
const SATURATION: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WegnerPoint {
    pub width: f64,
    pub size: usize,
    /// `|J|·|Λ|`.
    pub scaled: f64,
    pub hits: u64,
    pub trials: u64,
    pub frequency: f64,
    pub ci: (f64, f64),
}

/// `frequency ≈ C·|J|·|Λ|` on the linear regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WegnerFit {
    pub c: f64,
    pub intercept: f64,
    pub r2: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WegnerReport {
    pub energy: f64,
    pub points: Vec<WegnerPoint>,
    pub fit: Option<WegnerFit>,
    /// Smallest width per size whose frequency reaches saturation.
    pub saturation: Vec<(usize, Option<f64>)>,
}

/// Per-trial counts in closed windows `[E − w, E + w]` for every half-width
/// in `halves`, one box per trial.
#[allow(clippy::too_many_arguments)]
fn window_tallies(
    model: &ModelSpec,
    energy: f64,
    halves: &[f64],
    size: usize,
    trials: u64,
    seed: u64,
    stream: u64,
    tally: impl Fn(usize) -> [u64; 2] + Sync + Send,
) -> Result<Vec<u64>> {
    let bx = box_for(model, size);
    par_tally(
        trials,
        vec![0; 2 * halves.len()],
        |t| {
            let sample = sample_disorder(model, bx, trial_seed(seed, stream, t))?;
            let op = build_box_operator(model, &sample, bx)?;
            let mut out = Vec::with_capacity(2 * halves.len());
            for &w in halves {
                out.extend(tally(count_in_interval(&op, energy - w, energy + w)?));
            }
            Ok(out)
        },
        add_counts,
    )
}

fn check_grid(values: &[f64], sizes: &[usize], trials: u64, what: &str) -> Result<()> {
    if values.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
        return Err(Error::InvalidParameters(format!("{what} must be finite and nonnegative")));
    }
    if sizes.is_empty() || sizes.contains(&0) || trials == 0 {
        return Err(Error::InvalidParameters("need positive sizes and trials".into()));
    }
    Ok(())
}

/// `P[tr 1_J(H_Λ) ≥ 1]` for `J = [E − |J|/2, E + |J|/2]`.
pub fn wegner_estimate(
    model: &ModelSpec,
    energy: f64,
    widths: &[f64],
    sizes: &[usize],
    trials: u64,
    seed: u64,
) -> Result<WegnerReport> {
    check_grid(widths, sizes, trials, "widths")?;
    let halves: Vec<f64> = widths.iter().map(|w| 0.5 * w).collect();
    let mut points = Vec::new();
    let mut saturation = Vec::new();
    for (k, &size) in sizes.iter().enumerate() {
        let stream = size_stream(streams::WEGNER, k);
        let tallies = window_tallies(model, energy, &halves, size, trials, seed, stream, |c| [(c >= 1) as u64, 0])?;
        let mut sat = None;
        for (i, &width) in widths.iter().enumerate() {
            let hits = tallies[2 * i];
            let frequency = hits as f64 / trials as f64;
            if frequency >= SATURATION && sat.is_none() {
                sat = Some(width);
            }
            points.push(WegnerPoint {
                width,
                size,
                scaled: width * box_for(model, size).volume(),
                hits,
                trials,
                frequency,
                ci: wilson_interval(hits, trials, Z95),
            });
        }
        saturation.push((size, sat));
    }
    let linear: Vec<&WegnerPoint> = points.iter().filter(|p| p.frequency <= LINEAR_REGIME).collect();
    let fit = if linear.len() >= 3 {
        let xs: Vec<f64> = linear.iter().map(|p| p.scaled).collect();
        let ys: Vec<f64> = linear.iter().map(|p| p.frequency).collect();
        let (intercept, c, r2) = linear_fit(&xs, &ys)?;
        Some(WegnerFit {
            c,
            intercept,
            r2,
            points: linear.len(),
        })
    } else {
        None
    };
    Ok(WegnerReport {
        energy,
        points,
        fit,
        saturation,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinamiPoint {
    pub eps: f64,
    pub size: usize,
    /// `ε·|Λ|`.
    pub scaled: f64,
    /// `Σ_trials (count − 1)₊`.
    pub excess: u64,
    /// Trials with at least two eigenvalues.
    pub doubles: u64,
    pub trials: u64,
    /// `Σ_{k≥2} P̂(count ≥ k)`.
    pub value: f64,
    /// Wilson interval of `P(count ≥ 2)`.
    pub doubles_ci: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinamiReport {
    pub energy: f64,
    pub points: Vec<MinamiPoint>,
    /// Log-log fit of `value` against `ε|Λ|`; absent when too few points
    /// saw a double event.
    pub fit: Option<ExponentFit>,
    pub rho_hat: Option<f64>,
    /// Upper bound `3/trials` on the double-event probability when no
    /// double event was seen anywhere.
    pub bound_only: Option<f64>,
}

/// Multiplicities in `[E − ε, E + ε]`.
pub fn minami_estimate(
    model: &ModelSpec,
    energy: f64,
    eps: &[f64],
    sizes: &[usize],
    trials: u64,
    seed: u64,
) -> Result<MinamiReport> {
    check_grid(eps, sizes, trials, "eps")?;
    let mut points = Vec::new();
    for (k, &size) in sizes.iter().enumerate() {
        let stream = size_stream(streams::MINAMI, k);
        let tallies = window_tallies(model, energy, eps, size, trials, seed, stream, |c| {
            [c.saturating_sub(1) as u64, (c >= 2) as u64]
        })?;
        for (i, &e) in eps.iter().enumerate() {
            let (excess, doubles) = (tallies[2 * i], tallies[2 * i + 1]);
            points.push(MinamiPoint {
                eps: e,
                size,
                scaled: e * box_for(model, size).volume(),
                excess,
                doubles,
                trials,
                value: excess as f64 / trials as f64,
                doubles_ci: wilson_interval(doubles, trials, Z95),
            });
        }
    }
    let total_doubles: u64 = points.iter().map(|p| p.doubles).sum();
    let fit_points: Vec<FitPoint> = points
        .iter()
        .filter(|p| p.excess > 0)
        .map(|p| {
            // weights from the binomial variance of P(count ≥ 2)
            let freq = p.doubles as f64 / p.trials as f64;
            FitPoint::scaled_frequency(p.scaled, p.doubles, p.trials, p.value / freq)
        })
        .collect();
    let fit = exponent_fit(&fit_points).ok();
    Ok(MinamiReport {
        energy,
        rho_hat: fit.map(|f| f.slope - 1.0),
        fit,
        bound_only: (total_doubles == 0).then(|| 3.0 / trials as f64),
        points,
    })
}
