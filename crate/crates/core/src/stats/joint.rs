use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::ids::IdsTable;
use super::levels::{covariance_with_ci, local_unfolded, UnfoldedProcess};
use super::{box_for, streams};
use crate::error::{Error, Result};
use crate::model::{build_box_operator, sample_disorder, ModelSpec};
use crate::seed::trial_seed;

/// Counts above 2 share one category in the independence table.
const TOP_CATEGORY: usize = 2;

/// Joint law of the counts in `plus` (process at `E₀`) and `minus` (process
/// at `E₀'`).
/// `(I⁺, I⁻)`: one interval around each energy.
pub type IntervalPair = ((f64, f64), (f64, f64));

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointPair {
    pub plus: (f64, f64),
    pub minus: (f64, f64),
    /// `((k₊, k₋), trials)`, ascending.
    pub histogram: Vec<((u64, u64), u64)>,
    pub mean_plus: f64,
    pub mean_minus: f64,
    pub covariance: f64,
    pub covariance_ci: (f64, f64),
    /// Largest `|p̂(a, b) − p̂(a)p̂(b)|` over count categories.
    pub max_product_deviation: f64,
    pub independence_chi2: f64,
    pub independence_dof: usize,
    pub independence_p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointReport {
    pub e0: f64,
    pub e0_prime: f64,
    pub density: f64,
    pub density_prime: f64,
    pub size: usize,
    pub trials: u64,
    pub pairs: Vec<JointPair>,
}

/// Joint count statistics of paired processes, one pair of intervals per
/// entry of `intervals`.
pub fn joint_table(
    plus: &[UnfoldedProcess],
    minus: &[UnfoldedProcess],
    intervals: &[IntervalPair],
) -> Result<Vec<JointPair>> {
    if plus.len() != minus.len() || plus.is_empty() {
        return Err(Error::Shape(format!("{} and {} processes", plus.len(), minus.len())));
    }
    let n = plus.len() as f64;
    intervals
        .iter()
        .map(|&(ip, im)| {
            let kp: Vec<u64> = plus.iter().map(|p| p.count_in(ip.0, ip.1)).collect();
            let km: Vec<u64> = minus.iter().map(|p| p.count_in(im.0, im.1)).collect();
            let mut hist = std::collections::BTreeMap::new();
            let mut table = [[0u64; TOP_CATEGORY + 1]; TOP_CATEGORY + 1];
            for (&a, &b) in kp.iter().zip(&km) {
                *hist.entry((a, b)).or_insert(0u64) += 1;
                table[(a as usize).min(TOP_CATEGORY)][(b as usize).min(TOP_CATEGORY)] += 1;
            }
            let rows: Vec<f64> = table.iter().map(|r| r.iter().sum::<u64>() as f64).collect();
            let cols: Vec<f64> = (0..=TOP_CATEGORY).map(|j| table.iter().map(|r| r[j]).sum::<u64>() as f64).collect();
            let mut dev = 0.0f64;
            let mut chi2 = 0.0;
            for (i, r) in table.iter().enumerate() {
                for (j, &o) in r.iter().enumerate() {
                    dev = dev.max((o as f64 / n - rows[i] * cols[j] / (n * n)).abs());
                    let e = rows[i] * cols[j] / n;
                    if e > 0.0 {
                        chi2 += (o as f64 - e).powi(2) / e;
                    }
                }
            }
            let live = |v: &[f64]| v.iter().filter(|x| **x > 0.0).count();
            let dof = live(&rows).saturating_sub(1) * live(&cols).saturating_sub(1);
            let independence_p = if dof == 0 {
                1.0
            } else {
                1.0 - ChiSquared::new(dof as f64).expect("positive dof").cdf(chi2)
            };
            let (covariance, covariance_ci) = covariance_with_ci(&kp, &km);
            Ok(JointPair {
                plus: ip,
                minus: im,
                histogram: hist.into_iter().collect(),
                mean_plus: kp.iter().sum::<u64>() as f64 / n,
                mean_minus: km.iter().sum::<u64>() as f64 / n,
                covariance,
                covariance_ci,
                max_product_deviation: dev,
                independence_chi2: chi2,
                independence_dof: dof,
                independence_p,
            })
        })
        .collect()
}

/// Unfolds one box per trial at both `E₀` and `E₀'` through the frozen `ids`
/// and tabulates joint counts.
#[allow(clippy::too_many_arguments)]
pub fn joint_counts_two_energies(
    model: &ModelSpec,
    ids: &IdsTable,
    e0: f64,
    e0_prime: f64,
    size: usize,
    trials: u64,
    intervals: &[IntervalPair],
    seed: u64,
) -> Result<JointReport> {
    if e0 == e0_prime {
        return Err(Error::InvalidParameters("joint statistics need E₀ ≠ E₀'".into()));
    }
    if trials == 0 || intervals.is_empty() {
        return Err(Error::InvalidParameters("need trials and intervals".into()));
    }
    let (density, density_prime) = (ids.density_at(e0)?, ids.density_at(e0_prime)?);
    if !(density * density_prime > 0.0) {
        return Err(Error::InvalidParameters(format!(
            "infeasible reference: density {density} at {e0}, {density_prime} at {e0_prime}"
        )));
    }
    let hull = |pick: fn(&IntervalPair) -> (f64, f64)| {
        intervals
            .iter()
            .map(pick)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (lo, hi)| (a.min(lo), b.max(hi)))
    };
    let (lo_p, hi_p) = hull(|i| i.0);
    let (lo_m, hi_m) = hull(|i| i.1);
    let bx = box_for(model, size);
    let pairs: Vec<(UnfoldedProcess, UnfoldedProcess)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let sample = sample_disorder(model, bx, trial_seed(seed, streams::JOINT, t))?;
            let op = build_box_operator(model, &sample, bx)?;
            Ok((
                local_unfolded(&op, ids, e0, lo_p, hi_p)?,
                local_unfolded(&op, ids, e0_prime, lo_m, hi_m)?,
            ))
        })
        .collect::<Result<_>>()?;
    let (plus, minus): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    Ok(JointReport {
        e0,
        e0_prime,
        density,
        density_prime,
        size,
        trials,
        pairs: joint_table(&plus, &minus, intervals)?,
    })
}
