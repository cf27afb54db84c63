use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::BoxOperator;
use crate::spectral::Spectrum;

/// Eigenvalues closer than this times the operator scale have no derivative.
pub const SIMPLE_GAP_TOL: f64 = 1e-10;
pub const GRADIENT_FD_STEP: f64 = 1e-6;

/// `∂E_j/∂ω_n` for every disorder index `n` that touches the box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientVector {
    pub which: usize,
    pub energy: f64,
    /// Ascending disorder indices.
    pub sites: Vec<i64>,
    pub partials: Vec<f64>,
    pub l1_norm: f64,
    /// `C` with `l1_norm ∈ [1/C, C]` for this operator.
    pub covering_constant: f64,
}

impl GradientVector {
    pub fn len(&self) -> usize {
        self.partials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partials.is_empty()
    }

    pub fn partial(&self, site: i64) -> Option<f64> {
        self.sites.binary_search(&site).ok().map(|k| self.partials[k])
    }
}

/// `(n, Σ_i w_{i,n} v_i²)` over the disorder indices touched by rows of `op`.
///
/// The diagonal is affine in `ω` with these weights, so for a unit vector
/// this is the Hellmann–Feynman derivative.
pub fn site_masses(op: &BoxOperator, v: &[f64]) -> Vec<(i64, f64)> {
    let mut acc: BTreeMap<i64, f64> = BTreeMap::new();
    for (i, x) in v.iter().enumerate() {
        for &(n, w) in op.node_weights(i) {
            *acc.entry(n).or_insert(0.0) += w * x * x;
        }
    }
    acc.into_iter().collect()
}

/// `max(max_i c_i, 1/min_i c_i)` for the row coverages `c_i = Σ_n w_{i,n}`;
/// infinite when some row feels no disorder.
pub fn covering_constant(op: &BoxOperator) -> f64 {
    let (lo, hi) = (0..op.dim())
        .map(|i| op.node_weights(i).iter().map(|p| p.1).sum::<f64>())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| (lo.min(c), hi.max(c)));
    if lo > 0.0 {
        hi.max(1.0 / lo)
    } else {
        f64::INFINITY
    }
}

fn require_simple(spec: &Spectrum, which: usize) -> Result<()> {
    if which >= spec.len() {
        return Err(Error::OutOfRange {
            what: "eigenvalue index",
            detail: format!("{which} of {}", spec.len()),
        });
    }
    let gap = spec.gap(which);
    if !(gap > SIMPLE_GAP_TOL * spec.scale) {
        return Err(Error::Degenerate(format!(
            "sensitivity undefined: eigenvalue {which} has gap {gap:e}"
        )));
    }
    Ok(())
}

pub fn hf_gradient(spec: &Spectrum, which: usize, op: &BoxOperator) -> Result<GradientVector> {
    require_simple(spec, which)?;
    let v = spec.vector(which).ok_or_else(|| {
        Error::InvalidParameters(format!("spectrum carries no eigenvector for index {which}"))
    })?;
    if v.len() != op.dim() {
        return Err(Error::Shape(format!("vector of length {} for a box of dim {}", v.len(), op.dim())));
    }
    let (sites, partials): (Vec<i64>, Vec<f64>) = site_masses(op, v).into_iter().unzip();
    let l1_norm = partials.iter().map(|p| p.abs()).sum();
    Ok(GradientVector {
        which,
        energy: spec.eigenvalues[which],
        sites,
        partials,
        l1_norm,
        covering_constant: covering_constant(op),
    })
}

/// Central differences `(E(ω+δe_n) − E(ω−δe_n))/2δ` over `op.active_sites()`.
pub fn fd_gradient(op: &BoxOperator, which: usize, delta: f64) -> Result<Vec<(i64, f64)>> {
    if which >= op.dim() {
        return Err(Error::OutOfRange {
            what: "eigenvalue index",
            detail: format!("{which} of {}", op.dim()),
        });
    }
    op.active_sites()
        .into_iter()
        .map(|n| {
            let e = |d: f64| -> Result<f64> {
                op.with_sample(op.sample().perturbed(n, d)?)?.matrix().kth_eigenvalue(which)
            };
            Ok((n, (e(delta)? - e(-delta)?) / (2.0 * delta)))
        })
        .collect()
}

/// `max_n |g_n − d_n| / max_n |g_n|` against finite differences `d`; sites
/// missing from `g` count as zero partials.
pub fn fd_relative_error(g: &GradientVector, fd: &[(i64, f64)]) -> f64 {
    let top = g.partials.iter().fold(0.0f64, |m, p| m.max(p.abs()));
    let worst = fd
        .iter()
        .map(|&(n, d)| (g.partial(n).unwrap_or(0.0) - d).abs())
        .fold(0.0f64, f64::max);
    if top > 0.0 {
        worst / top
    } else {
        worst
    }
}

/// `‖g/‖g‖₁ − g'/‖g'‖₁‖₁`, with sites matched by index.
pub fn colinearity_gap(g: &GradientVector, gp: &GradientVector) -> Result<f64> {
    if !(g.l1_norm > 0.0 && gp.l1_norm > 0.0) {
        return Err(Error::Degenerate("colinearity of a zero gradient".into()));
    }
    let mut diff: BTreeMap<i64, f64> = BTreeMap::new();
    for (n, p) in g.sites.iter().zip(&g.partials) {
        *diff.entry(*n).or_insert(0.0) += p / g.l1_norm;
    }
    for (n, p) in gp.sites.iter().zip(&gp.partials) {
        *diff.entry(*n).or_insert(0.0) -= p / gp.l1_norm;
    }
    Ok(diff.values().map(|d| d.abs()).sum())
}

/// `e^{−l^β}·‖∇E‖₁‖∇E'‖₁`, the colinearity cutoff scale; underflows to 0 for
/// moderate `l`, which is why callers use absolute thresholds instead.
pub fn lambda_threshold(l: f64, beta: f64, g: &GradientVector, gp: &GradientVector) -> f64 {
    (-l.powf(beta)).exp() * g.l1_norm * gp.l1_norm
}

/// `seed,which,energy,site,partial` rows.
pub fn write_gradients_csv<W: Write>(seed: u64, grads: &[GradientVector], mut w: W) -> Result<()> {
    writeln!(w, "seed,which,energy,site,partial")?;
    for g in grads {
        for (n, p) in g.sites.iter().zip(&g.partials) {
            writeln!(w, "{seed},{},{:.16e},{n},{:.16e}", g.which, g.energy, p)?;
        }
    }
    Ok(())
}
