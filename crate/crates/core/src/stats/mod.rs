//! Ensemble estimators for level statistics.
//!
//! Every estimator draws trial `t` of stream `s` from
//! `trial_seed(master, s, t)` and reduces per-trial integer tallies, so the
//! merged result does not depend on how trials are spread over threads.

mod decorrelation;
mod fit;
mod ids;
mod joint;
mod levels;
mod wegner;

use rayon::prelude::*;

use crate::error::Result;
use crate::model::{BoxSize, ModelSpec};
use crate::seed::derive;

pub use decorrelation::{decorrelation_probe, DecorrelationPoint, DecorrelationReport};
pub use fit::{exponent_fit, linear_fit, wilson_interval, ExponentFit, FitPoint, Z95};
pub use ids::{estimate_ids, IdsTable, DENSITY_BANDWIDTH};
pub use joint::{joint_counts_two_energies, joint_table, IntervalPair, JointPair, JointReport};
pub use levels::{
    level_statistics, local_unfolded, poisson_gof, poisson_pmf, synthetic_poisson_process, unfold_levels, CountCovariance, IntervalFit, PoissonReport,
    UnfoldedProcess, MIN_PROCESSES,
};
pub use wegner::{
    minami_estimate, wegner_estimate, MinamiPoint, MinamiReport, WegnerFit, WegnerPoint, WegnerReport,
};

/// Stream labels, one per experiment kind.
pub mod streams {
    pub const IDS: u64 = 1;
    pub const LEVELS: u64 = 2;
    pub const JOINT: u64 = 3;
    pub const WEGNER: u64 = 4;
    pub const MINAMI: u64 = 5;
    pub const DECORRELATION: u64 = 6;
    /// Second, independent sample in decoupled decorrelation runs.
    pub const DECOUPLED: u64 = 7;
    pub const GRADIENTS: u64 = 8;
    /// Random instances of the lemma property suites.
    pub const PROPS: u64 = 9;
}

/// Stream for box size number `k` of an experiment.
pub fn size_stream(stream: u64, k: usize) -> u64 {
    derive(stream, k as u64)
}

/// `Sites(l)` for lattices, `Length(l)` for continuum families.
pub fn box_for(model: &ModelSpec, l: usize) -> BoxSize {
    if model.family.is_continuum() {
        BoxSize::Length(l as f64)
    } else {
        BoxSize::Sites(l)
    }
}

/// Runs `task` on every trial index in parallel and folds the results with
/// `merge`, which must be associative and commutative.
pub fn par_tally<T, F, M>(trials: u64, zero: T, task: F, merge: M) -> Result<T>
where
    T: Send + Sync + Clone,
    F: Fn(u64) -> Result<T> + Sync + Send,
    M: Fn(T, T) -> T + Sync + Send,
{
    (0..trials)
        .into_par_iter()
        .map(&task)
        .try_reduce(|| zero.clone(), |a, b| Ok(merge(a, b)))
}

/// Elementwise sum of integer tallies.
pub(crate) fn add_counts(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    if a.len() < b.len() {
        return add_counts(b, a);
    }
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}
