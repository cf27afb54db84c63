//! Per-cell coordinates of an eigenvector in the q-orthonormal bases, and
//! their polar (Prüfer) form.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::angle::ProjectiveAngle;
use super::basis::{q_orthonormal_basis, CellBasis};
use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::model::{BoxOperator, BoxSize, Family};
use crate::spectral::Spectrum;

/// `t = sgn(tan θ)·min(|tan θ|, |cot θ|)` from `(sin θ, cos θ) ∝ (s, c)`.
///
/// Returns `(t, on_tan_branch)`; the tie `|tan θ| = 1` takes the tan branch.
pub fn reduced_tangent(s: f64, c: f64) -> (f64, bool) {
    if s.abs() <= c.abs() {
        (if c == 0.0 { 0.0 } else { s / c }, true)
    } else {
        (c / s, false)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrueferTrace {
    pub which: usize,
    pub eigenvalue: f64,
    /// Energy the bases were built at.
    pub basis_energy: f64,
    pub cells: Vec<i64>,
    /// `(A_n, B_n)`.
    pub coeffs: Vec<(f64, f64)>,
    pub radii: Vec<f64>,
    /// `θ(n) ∈ [0, 2π)`.
    pub theta: Vec<f64>,
    pub reduced_tangent: Vec<f64>,
    pub tan_branch: Vec<bool>,
    /// `𝒩 = ‖∇E‖₁`, summed over every disorder index touching the box.
    pub normalization: f64,
    /// `sup |u − A e₁ − B e₂|` over the cell's sample points.
    pub eps_residual: Vec<f64>,
    /// `∂E/∂ω_n − (A_n² + B_n²)`.
    pub mass_residual: Vec<f64>,
}

impl PrueferTrace {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn angle(&self, k: usize) -> ProjectiveAngle {
        ProjectiveAngle::new(self.theta[k])
    }

    /// `(C_n, D_n) = (A_n, B_n)/√𝒩`.
    pub fn normalized(&self, k: usize) -> (f64, f64) {
        let s = self.normalization.sqrt();
        (self.coeffs[k].0 / s, self.coeffs[k].1 / s)
    }

    /// `Σ_n C_n² + D_n²`.
    pub fn normalized_mass(&self) -> f64 {
        self.radii.iter().map(|r| r * r).sum()
    }
}

/// Cells whose anchor lies strictly inside the box.
pub fn pruefer_cells(op: &BoxOperator) -> Result<Vec<i64>> {
    match (op.family(), op.size()) {
        (Family::Multimer, BoxSize::Sites(n)) => {
            let p = op.model().period();
            Ok((0..(n / p) as i64).collect())
        }
        (f, BoxSize::Length(l)) if f.is_continuum() => {
            Ok((1..l.ceil() as i64).filter(|&c| (c as f64) < l).collect())
        }
        (f, _) => Err(Error::NotApplicable(format!(
            "Prüfer variables are defined for multimers and continuum models, not {}",
            f.name()
        ))),
    }
}

/// Bases for every cell of [`pruefer_cells`] at `energy`.
pub fn cell_bases(op: &BoxOperator, energy: f64) -> Result<Vec<CellBasis>> {
    pruefer_cells(op)?
        .into_iter()
        .map(|n| q_orthonormal_basis(op.model(), op.sample(), energy, n))
        .collect()
}

/// Decomposes eigenvector `which` in the given per-cell bases.
///
/// Lattice cells solve `M_n (A, B) = (ũ(Nn+1), ũ(Nn))` in the staggered frame;
/// continuum cells solve `𝒜_n (A, B) = (u(n), u'(n))` with `u = v/√h` and a
/// central difference for `u'`.
pub fn pruefer_extract(
    op: &BoxOperator,
    spec: &Spectrum,
    which: usize,
    bases: &[CellBasis],
) -> Result<PrueferTrace> {
    let v = spec
        .vector(which)
        .ok_or_else(|| Error::InvalidParameters(format!("no eigenvector stored for index {which}")))?;
    if v.len() != op.dim() {
        return Err(Error::Shape("eigenvector does not match the operator".into()));
    }
    let mass = crate::sensitivity::site_masses(op, v);
    let normalization: f64 = mass.iter().map(|p| p.1).sum();
    if !(normalization > 0.0) {
        return Err(Error::Degenerate("eigenvector has zero gradient mass".into()));
    }
    let mut trace = PrueferTrace {
        which,
        eigenvalue: spec.eigenvalues[which],
        basis_energy: f64::NAN,
        cells: Vec::new(),
        coeffs: Vec::new(),
        radii: Vec::new(),
        theta: Vec::new(),
        reduced_tangent: Vec::new(),
        tan_branch: Vec::new(),
        normalization,
        eps_residual: Vec::new(),
        mass_residual: Vec::new(),
    };
    let scale = normalization.sqrt();
    for basis in bases {
        let n = basis.cell();
        let ((a, b), eps) = match basis {
            CellBasis::Discrete(bs) => {
                if op.family() != Family::Multimer {
                    return Err(Error::InvalidParameters("lattice basis on a continuum box".into()));
                }
                trace.basis_energy = bs.energy;
                let first = n * bs.e1.len() as i64;
                let ut = |k: i64| -> f64 {
                    op.index_of_site(k)
                        .map_or(0.0, |i| if k.rem_euclid(2) == 0 { v[i] } else { -v[i] })
                };
                let ab = solve_anchor(&bs.m_matrix(), [ut(first + 1), ut(first)], n)?;
                let eps = (0..bs.e1.len())
                    .map(|m| (ut(first + m as i64) - ab.0 * bs.e1[m] - ab.1 * bs.e2[m]).abs())
                    .fold(0.0f64, f64::max);
                (ab, eps)
            }
            CellBasis::Continuum(bs) => {
                if !op.family().is_continuum() {
                    return Err(Error::InvalidParameters("continuum basis on a lattice box".into()));
                }
                trace.basis_energy = bs.energy;
                let h = op.spacing();
                let sq = h.sqrt();
                let nodes = op.dim() as i64 + 1;
                // row i sits at x = (i+1)h; outside rows the Dirichlet value is 0
                let u = |j: i64| -> f64 {
                    if j <= 0 || j >= nodes { 0.0 } else { v[(j - 1) as usize] / sq }
                };
                let jn = (n as f64 / h).round() as i64;
                if ((jn as f64) * h - n as f64).abs() > 1e-9 {
                    return Err(Error::InvalidParameters(format!(
                        "cell anchor {n} is not a grid node for step {h}"
                    )));
                }
                let du = (u(jn + 1) - u(jn - 1)) / (2.0 * h);
                let ab = solve_anchor(&bs.anchor_matrix()?, [u(jn), du], n)?;
                let reach = (bs.radius / h).round() as i64;
                let mut eps = 0.0f64;
                for j in (jn - reach).max(1)..=(jn + reach).min(nodes - 1) {
                    let [e1, _, e2, _] = bs.at((j - jn) as f64 * h)?;
                    eps = eps.max((u(j) - ab.0 * e1 - ab.1 * e2).abs());
                }
                (ab, eps)
            }
        };
        let m_n = mass.iter().find(|p| p.0 == n).map_or(0.0, |p| p.1);
        let (c, d) = (a / scale, b / scale);
        let r = c.hypot(d);
        let theta = if r == 0.0 { 0.0 } else { c.atan2(d).rem_euclid(TAU) };
        // rem_euclid can round up to exactly 2π
        let theta = if theta >= TAU { 0.0 } else { theta };
        let (t, tan) = reduced_tangent(c, d);
        trace.cells.push(n);
        trace.coeffs.push((a, b));
        trace.radii.push(r);
        trace.theta.push(theta);
        trace.reduced_tangent.push(t);
        trace.tan_branch.push(tan);
        trace.eps_residual.push(eps);
        trace.mass_residual.push(m_n - (a * a + b * b));
    }
    Ok(trace)
}

/// Eigenvector `which` in bases built at its own eigenvalue.
pub fn pruefer_trace(op: &BoxOperator, spec: &Spectrum, which: usize) -> Result<PrueferTrace> {
    let e = *spec
        .eigenvalues
        .get(which)
        .ok_or_else(|| Error::InvalidParameters(format!("eigenvalue index {which} out of range")))?;
    let bases = cell_bases(op, e)?;
    pruefer_extract(op, spec, which, &bases)
}

fn solve_anchor(m: &Mat2, rhs: [f64; 2], n: i64) -> Result<(f64, f64)> {
    let scale = m.max_abs();
    if !(m.det().abs() > 1e-13 * scale * scale) {
        return Err(Error::Degenerate(format!("anchor system of cell {n} is singular")));
    }
    let inv = m.inverse().expect("checked determinant");
    let [a, b] = inv.apply(rhs);
    Ok((a, b))
}
