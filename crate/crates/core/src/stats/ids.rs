use serde::{Deserialize, Serialize};

use super::{add_counts, par_tally, streams};
use crate::error::{Error, Result};
use crate::model::{build_box_operator, sample_disorder, BoxSize, ModelSpec};
use crate::seed::trial_seed;

/// Half-width, in grid steps, of the centred difference for `ν`.
pub const DENSITY_BANDWIDTH: usize = 5;

/// `N̂(E) = mean_trials #{E_j < E} / |Λ|` on a grid, and its derivative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdsTable {
    pub energies: Vec<f64>,
    pub n_hat: Vec<f64>,
    pub density: Vec<f64>,
    /// Negative density values clipped to 0 (stays 0 since `N̂` is monotone).
    pub density_clipped: u64,
    /// `Σ_trials #{E_j < E}`.
    pub counts: Vec<u64>,
    pub trials: u64,
    pub volume: f64,
    pub warnings: Vec<String>,
}

impl IdsTable {
    pub fn from_counts(energies: Vec<f64>, counts: Vec<u64>, trials: u64, volume: f64) -> Result<Self> {
        if energies.len() != counts.len() || energies.is_empty() {
            return Err(Error::Shape("IDS grid and counts differ in length".into()));
        }
        let norm = trials as f64 * volume;
        let n_hat: Vec<f64> = counts.iter().map(|&c| c as f64 / norm).collect();
        let m = energies.len();
        let mut clipped = 0;
        let density = (0..m)
            .map(|i| {
                let (a, b) = (i.saturating_sub(DENSITY_BANDWIDTH), (i + DENSITY_BANDWIDTH).min(m - 1));
                if a == b {
                    return 0.0;
                }
                let d = (n_hat[b] - n_hat[a]) / (energies[b] - energies[a]);
                if d < 0.0 {
                    clipped += 1;
                    0.0
                } else {
                    d
                }
            })
            .collect();
        let mut warnings = Vec::new();
        if counts.first() == counts.last() {
            warnings.push(format!(
                "IDS is flat on [{}, {}]: grid misses the spectrum",
                energies[0],
                energies[m - 1]
            ));
        }
        Ok(Self {
            energies,
            n_hat,
            density,
            density_clipped: clipped,
            counts,
            trials,
            volume,
            warnings,
        })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.energies[0], self.energies[self.energies.len() - 1])
    }

    fn locate(&self, e: f64) -> Result<(usize, f64)> {
        let (lo, hi) = self.range();
        if !(e >= lo && e <= hi) {
            return Err(Error::OutOfRange {
                what: "energy",
                detail: format!("{e} outside IDS grid [{lo}, {hi}]"),
            });
        }
        let k = self.energies.partition_point(|x| *x <= e).clamp(1, self.energies.len().max(2) - 1);
        if self.energies.len() == 1 {
            return Ok((0, 0.0));
        }
        let (a, b) = (self.energies[k - 1], self.energies[k]);
        Ok((k - 1, (e - a) / (b - a)))
    }

    /// Linear interpolation of `N̂`.
    pub fn interpolate(&self, e: f64) -> Result<f64> {
        let (k, t) = self.locate(e)?;
        if self.energies.len() == 1 {
            return Ok(self.n_hat[0]);
        }
        Ok(self.n_hat[k] + t * (self.n_hat[k + 1] - self.n_hat[k]))
    }

    /// Linear interpolation of `ν̂`.
    pub fn density_at(&self, e: f64) -> Result<f64> {
        let (k, t) = self.locate(e)?;
        if self.energies.len() == 1 {
            return Ok(self.density[0]);
        }
        Ok(self.density[k] + t * (self.density[k + 1] - self.density[k]))
    }

    /// Grid energies bracketing `{E : n_lo ≤ N̂(E) ≤ n_hi}`, widened by one
    /// grid step on each side and clamped to the grid.
    pub fn energy_window(&self, n_lo: f64, n_hi: f64) -> (f64, f64) {
        let m = self.energies.len();
        let a = self.n_hat.partition_point(|n| *n < n_lo).saturating_sub(2);
        let b = (self.n_hat.partition_point(|n| *n <= n_hi) + 1).min(m - 1);
        (self.energies[a], self.energies[b.max(a)])
    }

    /// Largest grid slope of `N̂`.
    pub fn max_slope(&self) -> f64 {
        self.energies
            .windows(2)
            .zip(self.n_hat.windows(2))
            .map(|(e, n)| (n[1] - n[0]) / (e[1] - e[0]))
            .fold(0.0, f64::max)
    }
}

pub fn estimate_ids(model: &ModelSpec, energies: &[f64], size: BoxSize, trials: u64, seed: u64) -> Result<IdsTable> {
    if trials == 0 {
        return Err(Error::InvalidParameters("IDS needs at least one trial".into()));
    }
    if energies.is_empty() || energies.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameters("IDS grid must be strictly increasing".into()));
    }
    let counts = par_tally(
        trials,
        vec![0; energies.len()],
        |t| {
            let sample = sample_disorder(model, size, trial_seed(seed, streams::IDS, t))?;
            let op = build_box_operator(model, &sample, size)?;
            let mut running = 0;
            // prefix max keeps each trial's counts exactly monotone
            Ok(energies
                .iter()
                .map(|&e| {
                    running = op.matrix().count_below(e).max(running);
                    running as u64
                })
                .collect())
        },
        add_counts,
    )?;
    IdsTable::from_counts(energies.to_vec(), counts, trials, size.volume())
}
