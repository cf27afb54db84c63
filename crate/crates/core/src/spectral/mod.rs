//! Spectra of box operators.

mod export;
mod profile;
mod shooting;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Tridiagonal;
use crate::model::BoxOperator;
use crate::seed::derive;

pub use export::{read_eigenvectors_bin, write_eigenvectors_bin, write_spectrum_csv, EIGVEC_MAGIC, EIGVEC_VERSION};
pub use profile::{localization_profile, localization_profile_of, DecayFit, DecayProfile};
pub use shooting::{shooting_count_below, shooting_count_in};

/// Relative residual bound promised for returned eigenvectors.
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Eigenvalues closer than this times the operator scale raise a flag.
pub const NEAR_DEGENERATE_TOL: f64 = 1e-12;
/// Relative gap below which inverse-iteration vectors are reorthogonalized.
const CLUSTER_TOL: f64 = 1e-3;
const START_VECTOR_SEED: u64 = 0x5e_ed0f_1ec7;

/// Eigenvalues of a box operator and, optionally, eigenvectors for those in
/// a window. Vectors have unit Euclidean norm and a positive largest entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// `(index into eigenvalues, vector)` in ascending index order.
    pub eigenvectors: Vec<(usize, Vec<f64>)>,
    pub window: Option<(f64, f64)>,
    pub near_degenerate: bool,
    /// Operator scale `max(1, ‖H‖₁)`.
    pub scale: f64,
    /// Grid coordinates of the matrix rows.
    pub positions: Vec<f64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn vector(&self, which: usize) -> Option<&[f64]> {
        self.eigenvectors
            .binary_search_by_key(&which, |p| p.0)
            .ok()
            .map(|k| self.eigenvectors[k].1.as_slice())
    }

    /// Distance from eigenvalue `which` to the rest of the spectrum.
    pub fn gap(&self, which: usize) -> f64 {
        let e = &self.eigenvalues;
        let left = if which > 0 { e[which] - e[which - 1] } else { f64::INFINITY };
        let right = if which + 1 < e.len() { e[which + 1] - e[which] } else { f64::INFINITY };
        left.min(right)
    }
}

/// All eigenvalues (implicit QL) and, when asked, eigenvectors for the ones in
/// `window` (closed), by inverse iteration.
pub fn eigen_all(op: &BoxOperator, want_vectors: bool, window: Option<(f64, f64)>) -> Result<Spectrum> {
    let t = op.matrix();
    let eigenvalues = t.eigenvalues()?;
    let scale = t.norm_one().max(1.0);
    let near_degenerate = eigenvalues
        .windows(2)
        .any(|w| w[1] - w[0] < NEAR_DEGENERATE_TOL * scale);
    let eigenvectors = if want_vectors {
        let (lo, hi) = window.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
        let wanted: Vec<usize> = (0..eigenvalues.len())
            .filter(|&k| eigenvalues[k] >= lo && eigenvalues[k] <= hi)
            .collect();
        eigenvectors_for(t, &eigenvalues, &wanted, scale)?
    } else {
        Vec::new()
    };
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
        window,
        near_degenerate,
        scale,
        positions: op.positions().to_vec(),
    })
}

/// Eigenvectors for `wanted` (ascending) indices of `eigenvalues`.
pub fn eigenvectors_for(
    t: &Tridiagonal<f64>,
    eigenvalues: &[f64],
    wanted: &[usize],
    scale: f64,
) -> Result<Vec<(usize, Vec<f64>)>> {
    let mut out: Vec<(usize, Vec<f64>)> = Vec::with_capacity(wanted.len());
    let mut cluster_start = 0;
    for (pos, &k) in wanted.iter().enumerate() {
        if pos > 0 {
            let prev = wanted[pos - 1];
            if prev + 1 != k || eigenvalues[k] - eigenvalues[prev] > CLUSTER_TOL * scale {
                cluster_start = pos;
            }
        }
        let against: Vec<&[f64]> = out[cluster_start..pos].iter().map(|p| p.1.as_slice()).collect();
        let v = t.inverse_iteration(eigenvalues[k], derive(START_VECTOR_SEED, k as u64), &against)?;
        let res = residual(t, &v, eigenvalues[k]);
        if !(res <= RESIDUAL_TOL * (scale + eigenvalues[k].abs())) {
            return Err(Error::Numeric(format!(
                "eigenvector {k} residual {res:e} exceeds tolerance"
            )));
        }
        out.push((k, v));
    }
    Ok(out)
}

/// ‖Tv − λv‖₂.
pub fn residual(t: &Tridiagonal<f64>, v: &[f64], lambda: f64) -> f64 {
    t.matvec(v)
        .iter()
        .zip(v)
        .map(|(a, b)| (a - lambda * b).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Absolute slack used to make interval ends closed.
fn endpoint_slack(t: &Tridiagonal<f64>) -> f64 {
    1e-14 * t.norm_one().max(1.0)
}

/// Number of eigenvalues in the closed interval `[lo, hi]` from two Sturm
/// counts. Eigenvalues within `1e-14·‖H‖` of an end count as inside.
pub fn count_in_interval(op: &BoxOperator, lo: f64, hi: f64) -> Result<usize> {
    count_in_interval_tridiag(op.matrix(), lo, hi)
}

pub fn count_in_interval_tridiag(t: &Tridiagonal<f64>, lo: f64, hi: f64) -> Result<usize> {
    if !(lo <= hi) {
        return Err(Error::InvalidParameters(format!("interval [{lo}, {hi}] is empty or NaN")));
    }
    if !t.is_finite() {
        return Err(Error::Numeric("non-finite matrix entry".into()));
    }
    let tau = endpoint_slack(t);
    Ok(t.count_below(hi + tau) - t.count_below(lo - tau))
}

/// Eigenvalues in the closed interval `[lo, hi]` by bisection, with the same
/// endpoint convention as [`count_in_interval`].
pub fn eigenvalues_in_interval(op: &BoxOperator, lo: f64, hi: f64) -> Result<Vec<f64>> {
    let t = op.matrix();
    if !(lo <= hi) {
        return Err(Error::InvalidParameters(format!("interval [{lo}, {hi}] is empty or NaN")));
    }
    let tau = endpoint_slack(t);
    let first = t.count_below(lo - tau);
    let last = t.count_below(hi + tau);
    (first..last).map(|k| t.kth_eigenvalue(k)).collect()
}
