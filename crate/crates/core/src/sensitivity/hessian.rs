use serde::{Deserialize, Serialize};

use super::gradient::{site_masses, SIMPLE_GAP_TOL};
use crate::error::{Error, Result};
use crate::model::BoxOperator;
use crate::spectral::eigenvectors_for;

pub const HESSIAN_FD_STEP: f64 = 1e-4;
/// Sign enumeration is exhaustive, so the window is capped.
pub const MAX_ACTIVE_SITES: usize = 16;
/// Sites whose gradient share is below this fraction of the largest are
/// outside the localization window.
const WINDOW_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HessianEstimate {
    pub which: usize,
    pub energy: f64,
    /// `‖Hess‖_{ℓ∞→ℓ¹}` on the window.
    pub norm: f64,
    /// Distance to the rest of the spectrum.
    pub gap: f64,
    /// Ascending window sites.
    pub sites: Vec<i64>,
    pub hessian: Vec<Vec<f64>>,
    /// Sites dropped beyond the cutoff.
    pub truncated: usize,
    pub cutoff: usize,
}

/// `max_{s ∈ {±1}^k} ‖H s‖₁`, by Gray-code enumeration with `s₀ = +1`.
pub fn linf_to_l1_norm(h: &[Vec<f64>]) -> f64 {
    let k = h.len();
    if k == 0 {
        return 0.0;
    }
    let mut s = vec![1.0; k];
    let mut hs: Vec<f64> = h.iter().map(|row| row.iter().sum()).collect();
    let mut best = hs.iter().map(|x| x.abs()).sum::<f64>();
    for step in 1u64..(1u64 << (k - 1)) {
        // flip coordinate 1 + (trailing zeros of step)
        let j = 1 + step.trailing_zeros() as usize;
        s[j] = -s[j];
        for (i, row) in h.iter().enumerate() {
            hs[i] += 2.0 * s[j] * row[j];
        }
        best = best.max(hs.iter().map(|x| x.abs()).sum());
    }
    best
}

fn eigen_at(op: &BoxOperator, which: usize, shifts: &[(i64, f64)]) -> Result<f64> {
    let mut sample = op.sample().clone();
    for &(n, d) in shifts {
        sample = sample.perturbed(n, d)?;
    }
    op.with_sample(sample)?.matrix().kth_eigenvalue(which)
}

/// Central second differences of `E_which` in the disorder at `sites`,
/// with step `delta` (diagonal entries use `2δ`).
pub fn fd_hessian(op: &BoxOperator, which: usize, sites: &[i64], delta: f64) -> Result<Vec<Vec<f64>>> {
    let k = sites.len();
    let e0 = eigen_at(op, which, &[])?;
    let mut h = vec![vec![0.0; k]; k];
    let denom = 4.0 * delta * delta;
    for a in 0..k {
        let n = sites[a];
        h[a][a] = (eigen_at(op, which, &[(n, 2.0 * delta)])? - 2.0 * e0 + eigen_at(op, which, &[(n, -2.0 * delta)])?)
            / denom;
        for b in a + 1..k {
            let m = sites[b];
            let e = |x: f64, y: f64| eigen_at(op, which, &[(n, x), (m, y)]);
            let v = (e(delta, delta)? - e(delta, -delta)? - e(-delta, delta)? + e(-delta, -delta)?) / denom;
            h[a][b] = v;
            h[b][a] = v;
        }
    }
    Ok(h)
}

/// Hessian of a simple eigenvalue on its localization window (sites with
/// the largest Hellmann–Feynman weight, at most [`MAX_ACTIVE_SITES`]).
pub fn hessian_norm_estimate(op: &BoxOperator, which: usize) -> Result<HessianEstimate> {
    let t = op.matrix();
    let evals = t.eigenvalues()?;
    if which >= evals.len() {
        return Err(Error::OutOfRange {
            what: "eigenvalue index",
            detail: format!("{which} of {}", evals.len()),
        });
    }
    let scale = t.norm_one().max(1.0);
    let gap = {
        let left = if which > 0 { evals[which] - evals[which - 1] } else { f64::INFINITY };
        let right = evals.get(which + 1).map_or(f64::INFINITY, |e| e - evals[which]);
        left.min(right)
    };
    if !(gap > SIMPLE_GAP_TOL * scale) {
        return Err(Error::Degenerate(format!("Hessian undefined: eigenvalue {which} has gap {gap:e}")));
    }
    let v = eigenvectors_for(t, &evals, &[which], scale)?.remove(0).1;
    let mut masses = site_masses(op, &v);
    let top = masses.iter().fold(0.0f64, |m, p| m.max(p.1.abs()));
    masses.retain(|p| p.1.abs() >= WINDOW_FLOOR * top);
    masses.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()).then(a.0.cmp(&b.0)));
    let truncated = masses.len().saturating_sub(MAX_ACTIVE_SITES);
    masses.truncate(MAX_ACTIVE_SITES);
    let mut sites: Vec<i64> = masses.into_iter().map(|p| p.0).collect();
    sites.sort_unstable();
    let hessian = fd_hessian(op, which, &sites, HESSIAN_FD_STEP)?;
    Ok(HessianEstimate {
        which,
        energy: evals[which],
        norm: linf_to_l1_norm(&hessian),
        gap,
        sites,
        hessian,
        truncated,
        cutoff: MAX_ACTIVE_SITES,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_box_operator, sample_disorder, BoxSize, DisorderSample, ModelSpec};
    use approx::assert_abs_diff_eq;

    fn brute_norm(h: &[Vec<f64>]) -> f64 {
        let k = h.len();
        (0..1u32 << k)
            .map(|mask| {
                let s: Vec<f64> = (0..k).map(|j| if mask >> j & 1 == 1 { -1.0 } else { 1.0 }).collect();
                h.iter().map(|row| row.iter().zip(&s).map(|(a, b)| a * b).sum::<f64>().abs()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn gray_code_matches_brute() {
        let h: Vec<Vec<f64>> = (0..6)
            .map(|i| (0..6).map(|j| ((i * 7 + j * 3) % 5) as f64 - 2.0 + 0.1 * (i + j) as f64).collect())
            .collect();
        assert_abs_diff_eq!(linf_to_l1_norm(&h), brute_norm(&h), epsilon = 1e-12);
        assert_eq!(linf_to_l1_norm(&[]), 0.0);
    }

    #[test]
    fn single_site_is_linear() {
        let model = ModelSpec::anderson(1.0);
        let s = DisorderSample::from_values(0, vec![0.4], 0, 1.0).unwrap();
        let op = build_box_operator(&model, &s, BoxSize::Sites(1)).unwrap();
        let est = hessian_norm_estimate(&op, 0).unwrap();
        assert!(est.norm < 1e-6, "{est:?}");
        assert_eq!(est.gap, f64::INFINITY);
    }

    #[test]
    fn two_site_closed_form() {
        let model = ModelSpec::anderson(1.0);
        let (w0, w1) = (0.2, 0.9);
        let s = DisorderSample::from_values(0, vec![w0, w1], 0, 1.0).unwrap();
        let op = build_box_operator(&model, &s, BoxSize::Sites(2)).unwrap();
        // E± = (w0+w1)/2 ± r, Hess E± = ±(1/4r³)[[1,−1],[−1,1]]
        let r = (0.25 * (w0 - w1) * (w0 - w1) + 1.0f64).sqrt();
        let c = 1.0 / (4.0 * r.powi(3));
        for (which, sign) in [(0, -1.0), (1, 1.0)] {
            let est = hessian_norm_estimate(&op, which).unwrap();
            assert_eq!(est.sites, vec![0, 1]);
            let want = [[sign * c, -sign * c], [-sign * c, sign * c]];
            for a in 0..2 {
                for b in 0..2 {
                    assert_abs_diff_eq!(est.hessian[a][b], want[a][b], epsilon = 1e-5);
                }
            }
            assert_abs_diff_eq!(est.norm, 1.0 / r.powi(3), epsilon = 1e-5);
            assert_abs_diff_eq!(est.gap, 2.0 * r, epsilon = 1e-12);
        }
    }

    #[test]
    fn window_is_capped() {
        let model = ModelSpec::anderson(0.1);
        let s = sample_disorder(&model, BoxSize::Sites(40), 2).unwrap();
        let op = build_box_operator(&model, &s, BoxSize::Sites(40)).unwrap();
        let est = hessian_norm_estimate(&op, 20).unwrap();
        assert_eq!(est.sites.len(), MAX_ACTIVE_SITES);
        assert!(est.truncated > 0);
        assert!(est.norm.is_finite());
    }
}
