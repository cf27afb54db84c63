use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::fit::Z95;
use super::ids::IdsTable;
use crate::error::{Error, Result};
use crate::model::{build_box_operator, sample_disorder, BoxOperator, ModelSpec};
use crate::seed::trial_seed;
use super::{box_for, streams};
use rayon::prelude::*;
use crate::spectral::eigenvalues_in_interval;

/// Smallest ensemble `poisson_gof` accepts.
pub const MIN_PROCESSES: usize = 200;
/// Chi-square cells are pooled until each expects at least this many.
const MIN_EXPECTED: f64 = 5.0;

/// `ξ_j = |Λ|(N(E_j) − N(E₀))`, ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnfoldedProcess {
    pub e0: f64,
    pub points: Vec<f64>,
    pub volume: f64,
    /// Eigenvalues outside the IDS grid, left out.
    pub dropped: usize,
}

impl UnfoldedProcess {
    /// Points in the closed interval `[lo, hi]`.
    pub fn count_in(&self, lo: f64, hi: f64) -> u64 {
        let a = self.points.partition_point(|x| *x < lo);
        let b = self.points.partition_point(|x| *x <= hi);
        b.saturating_sub(a) as u64
    }
}

/// Unfolds `eigenvalues` of a box of volume `|Λ|` through `ids` around `e0`.
pub fn unfold_levels(eigenvalues: &[f64], volume: f64, ids: &IdsTable, e0: f64) -> Result<UnfoldedProcess> {
    let n0 = ids.interpolate(e0)?;
    let (lo, hi) = ids.range();
    let mut points = Vec::with_capacity(eigenvalues.len());
    let mut dropped = 0;
    for &e in eigenvalues {
        if e >= lo && e <= hi {
            points.push(volume * (ids.interpolate(e)? - n0));
        } else {
            dropped += 1;
        }
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::Numeric("non-finite unfolded point".into()));
    }
    points.sort_by(f64::total_cmp);
    Ok(UnfoldedProcess {
        e0,
        points,
        volume,
        dropped,
    })
}

/// Unfolded eigenvalues of `op` with `ξ ∈ [xi_lo, xi_hi]`,
/// found by bisection on an energy window from the inverse IDS.
pub fn local_unfolded(op: &BoxOperator, ids: &IdsTable, e0: f64, xi_lo: f64, xi_hi: f64) -> Result<UnfoldedProcess> {
    let volume = op.volume();
    let n0 = ids.interpolate(e0)?;
    let (lo, hi) = ids.energy_window(n0 + xi_lo / volume, n0 + xi_hi / volume);
    let evs = eigenvalues_in_interval(op, lo, hi)?;
    let mut p = unfold_levels(&evs, volume, ids, e0)?;
    p.points.retain(|x| *x >= xi_lo && *x <= xi_hi);
    Ok(p)
}

/// A Poisson process of the given intensity on `[lo, hi]`.
pub fn synthetic_poisson_process(intensity: f64, lo: f64, hi: f64, seed: u64) -> UnfoldedProcess {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::new();
    let mut x = lo;
    loop {
        // 1 − U lies in (0, 1]
        x += -(1.0 - rng.random::<f64>()).ln() / intensity;
        if x > hi {
            break;
        }
        points.push(x);
    }
    UnfoldedProcess {
        e0: 0.0,
        points,
        volume: 1.0,
        dropped: 0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalFit {
    pub lo: f64,
    pub hi: f64,
    pub mean: f64,
    /// `histogram[k]` processes with exactly `k` points.
    pub histogram: Vec<u64>,
    pub chi2: f64,
    pub dof: usize,
    pub p_value: f64,
    pub p_zero_observed: f64,
    /// `e^{−|I|}`.
    pub p_zero_target: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountCovariance {
    pub first: usize,
    pub second: usize,
    pub covariance: f64,
    /// Normal-theory 95% interval.
    pub ci: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonReport {
    pub processes: usize,
    pub intervals: Vec<IntervalFit>,
    pub covariances: Vec<CountCovariance>,
    /// Smallest per-interval p-value.
    pub min_p_value: f64,
}

pub fn poisson_pmf(k: usize, mu: f64) -> f64 {
    if mu == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    (k as f64 * mu.ln() - mu - statrs::function::gamma::ln_gamma(k as f64 + 1.0)).exp()
}

/// Pearson statistic against `Poisson(mu)` with cells pooled left to right
/// until each expects `MIN_EXPECTED`; the last cell takes the upper tail.
fn chi_square_poisson(histogram: &[u64], mu: f64) -> (f64, usize) {
    let n: u64 = histogram.iter().sum();
    let nf = n as f64;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp, mut used) = (0.0, 0.0, 0.0);
    let mut k = 0;
    loop {
        let p = poisson_pmf(k, mu);
        obs += histogram.get(k).copied().unwrap_or(0) as f64;
        exp += nf * p;
        used += p;
        k += 1;
        let tail = nf * (1.0 - used).max(0.0);
        if exp >= MIN_EXPECTED && tail >= MIN_EXPECTED {
            cells.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        } else if tail < MIN_EXPECTED {
            break;
        }
    }
    let rest: f64 = histogram.iter().skip(k).map(|&c| c as f64).sum();
    cells.push((obs + rest, exp + nf * (1.0 - used).max(0.0)));
    if cells.len() > 1 && cells[cells.len() - 1].1 < MIN_EXPECTED {
        let last = cells.pop().expect("two cells");
        let prev = cells.last_mut().expect("one cell");
        prev.0 += last.0;
        prev.1 += last.1;
    }
    let chi2 = cells.iter().map(|(o, e)| if *e > 0.0 { (o - e) * (o - e) / e } else { 0.0 }).sum();
    (chi2, cells.len().saturating_sub(1))
}

pub(crate) fn covariance_with_ci(x: &[u64], y: &[u64]) -> (f64, (f64, f64)) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<u64>() as f64 / n;
    let my = y.iter().sum::<u64>() as f64 / n;
    let terms: Vec<f64> = x.iter().zip(y).map(|(a, b)| (*a as f64 - mx) * (*b as f64 - my)).collect();
    let cov = terms.iter().sum::<f64>() / (n - 1.0).max(1.0);
    let var = terms.iter().map(|t| (t - cov) * (t - cov)).sum::<f64>() / (n - 1.0).max(1.0);
    let half = Z95 * (var / n).sqrt();
    (cov, (cov - half, cov + half))
}

/// Count histograms in each interval, chi-square against `Poisson(|I|)`, and
/// pairwise count covariances. Intervals are closed and may share endpoints.
pub fn poisson_gof(processes: &[UnfoldedProcess], intervals: &[(f64, f64)]) -> Result<PoissonReport> {
    if processes.len() < MIN_PROCESSES {
        return Err(Error::InsufficientData(format!(
            "{} processes, need at least {MIN_PROCESSES}",
            processes.len()
        )));
    }
    if intervals.is_empty() || intervals.iter().any(|(a, b)| !(a < b)) {
        return Err(Error::InvalidParameters("intervals must be nonempty with lo < hi".into()));
    }
    let mut sorted = intervals.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    if sorted.windows(2).any(|w| w[1].0 < w[0].1) {
        return Err(Error::InvalidParameters("intervals overlap".into()));
    }
    let counts: Vec<Vec<u64>> = intervals
        .iter()
        .map(|&(lo, hi)| processes.iter().map(|p| p.count_in(lo, hi)).collect())
        .collect();
    let n = processes.len() as f64;
    let fits: Vec<IntervalFit> = intervals
        .iter()
        .zip(&counts)
        .map(|(&(lo, hi), c)| {
            let top = c.iter().copied().max().unwrap_or(0) as usize;
            let mut histogram = vec![0u64; top + 1];
            for &k in c {
                histogram[k as usize] += 1;
            }
            let mu = hi - lo;
            let (chi2, dof) = chi_square_poisson(&histogram, mu);
            let p_value = if dof == 0 {
                1.0
            } else {
                1.0 - ChiSquared::new(dof as f64).expect("positive dof").cdf(chi2)
            };
            IntervalFit {
                lo,
                hi,
                mean: c.iter().sum::<u64>() as f64 / n,
                p_zero_observed: histogram[0] as f64 / n,
                p_zero_target: (-mu).exp(),
                histogram,
                chi2,
                dof,
                p_value,
            }
        })
        .collect();
    let mut covariances = Vec::new();
    for i in 0..counts.len() {
        for j in i + 1..counts.len() {
            let (covariance, ci) = covariance_with_ci(&counts[i], &counts[j]);
            covariances.push(CountCovariance {
                first: i,
                second: j,
                covariance,
                ci,
            });
        }
    }
    let min_p_value = fits.iter().map(|f| f.p_value).fold(1.0, f64::min);
    Ok(PoissonReport {
        processes: processes.len(),
        intervals: fits,
        covariances,
        min_p_value,
    })
}

/// One box per trial, unfolded at `e0` through the frozen `ids`, then
/// [`poisson_gof`] on `intervals`.
#[allow(clippy::too_many_arguments)]
pub fn level_statistics(
    model: &ModelSpec,
    ids: &IdsTable,
    e0: f64,
    size: usize,
    trials: u64,
    intervals: &[(f64, f64)],
    seed: u64,
) -> Result<PoissonReport> {
    let lo = intervals.iter().map(|i| i.0).fold(f64::INFINITY, f64::min);
    let hi = intervals.iter().map(|i| i.1).fold(f64::NEG_INFINITY, f64::max);
    if !(lo < hi) {
        return Err(Error::InvalidParameters("no intervals".into()));
    }
    let bx = box_for(model, size);
    let processes: Vec<UnfoldedProcess> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let sample = sample_disorder(model, bx, trial_seed(seed, streams::LEVELS, t))?;
            local_unfolded(&build_box_operator(model, &sample, bx)?, ids, e0, lo, hi)
        })
        .collect::<Result<_>>()?;
    poisson_gof(&processes, intervals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn linear_ids() -> IdsTable {
        // N(E) = 0.25 E on [0, 4]
        let e: Vec<f64> = (0..=40).map(|k| k as f64 * 0.1).collect();
        let counts = e.iter().map(|x| (x * 0.25 * 1e6).round() as u64).collect();
        IdsTable::from_counts(e, counts, 1, 1e6).unwrap()
    }

    #[test]
    fn unfolding_identities() {
        let ids = linear_ids();
        let p = unfold_levels(&[2.0, 2.4, 1.0, 9.0], 100.0, &ids, 2.0).unwrap();
        assert_eq!(p.dropped, 1);
        assert_abs_diff_eq!(p.points[0], -25.0, epsilon = 1e-9);
        assert_eq!(p.points[1], 0.0);
        assert_abs_diff_eq!(p.points[2], 10.0, epsilon = 1e-9);
        let q = unfold_levels(&[2.4], 200.0, &ids, 2.0).unwrap();
        assert_abs_diff_eq!(q.points[0], 2.0 * p.points[2], epsilon = 1e-9);
        assert!(unfold_levels(&[1.0], 1.0, &ids, 5.0).is_err());
    }

    #[test]
    fn closed_counts() {
        let p = UnfoldedProcess { e0: 0.0, points: vec![0.0, 1.0, 1.0, 2.5], volume: 1.0, dropped: 0 };
        assert_eq!(p.count_in(0.0, 1.0), 3);
        assert_eq!(p.count_in(1.0, 2.0), 2);
        assert_eq!(p.count_in(3.0, 4.0), 0);
    }

    #[test]
    fn pmf_and_pooling() {
        assert_abs_diff_eq!(poisson_pmf(0, 1.0), (-1.0f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(poisson_pmf(3, 2.0), 8.0 / 6.0 * (-2.0f64).exp(), epsilon = 1e-15);
        // exact expected histogram gives a tiny statistic
        let hist: Vec<u64> = (0..8).map(|k| (10_000.0 * poisson_pmf(k, 1.0)).round() as u64).collect();
        let (chi2, dof) = chi_square_poisson(&hist, 1.0);
        assert!(dof >= 4 && chi2 < 0.1, "{chi2} {dof}");
    }

    #[test]
    fn rejects_bad_input() {
        let ps: Vec<UnfoldedProcess> = (0..250).map(|s| synthetic_poisson_process(1.0, 0.0, 3.0, s)).collect();
        assert!(poisson_gof(&ps[..100], &[(0.0, 1.0)]).is_err());
        assert!(poisson_gof(&ps, &[(0.0, 1.5), (1.0, 2.0)]).is_err());
        assert!(poisson_gof(&ps, &[(0.0, 1.0), (1.0, 2.0)]).is_ok());
    }

    #[test]
    fn synthetic_calibration() {
        let meta = 200;
        let mut pass = 0;
        for m in 0..meta {
            let ps: Vec<UnfoldedProcess> =
                (0..300).map(|s| synthetic_poisson_process(1.0, -1.0, 4.0, m * 1000 + s)).collect();
            let r = poisson_gof(&ps, &[(0.0, 1.0)]).unwrap();
            if r.intervals[0].p_value > 0.01 {
                pass += 1;
            }
        }
        assert!(pass as f64 >= 0.98 * meta as f64, "{pass}/{meta}");
    }

    #[test]
    fn independent_intervals_have_small_covariance() {
        let ps: Vec<UnfoldedProcess> = (0..2000).map(|s| synthetic_poisson_process(1.0, 0.0, 3.0, s)).collect();
        let r = poisson_gof(&ps, &[(0.0, 1.0), (1.0, 2.0), (2.0, 3.0)]).unwrap();
        assert_eq!(r.covariances.len(), 3);
        for c in &r.covariances {
            assert!(c.covariance.abs() < 0.1, "{c:?}");
        }
        for f in &r.intervals {
            assert!((f.p_zero_observed - f.p_zero_target).abs() < 0.04);
        }
    }
}
