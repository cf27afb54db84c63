//! q-orthonormal solution bases per cell and the cell-to-cell maps `T±`.

use serde::{Deserialize, Serialize};

use super::angle::{Provenance, TransferMatrix};
use super::discrete::{one_step_transfer, require_multimer};
use super::ode::{integrate, settled_resolution};
use super::qform::QForm;
use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::model::{evaluate_potential, single_site_value, DisorderSample, ModelSpec};

/// Seminorms below this make Gram–Schmidt meaningless.
pub const DEGENERATE_NORM: f64 = 1e-13;

/// Solutions of `−y'' + W y = 0` on `[−N, N]` sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuumCellBasis {
    pub cell: i64,
    pub energy: f64,
    pub radius: f64,
    pub step: f64,
    pub e1: Vec<f64>,
    pub e1p: Vec<f64>,
    pub e2: Vec<f64>,
    pub e2p: Vec<f64>,
    form: QForm,
}

impl ContinuumCellBasis {
    pub fn form(&self) -> &QForm {
        &self.form
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..self.e1.len()).map(|i| -self.radius + i as f64 * self.step).collect()
    }

    /// `[e₁, e₁', e₂, e₂']` at `x` by cubic Hermite interpolation.
    pub fn at(&self, x: f64) -> Result<[f64; 4]> {
        let s = (x + self.radius) / self.step;
        let last = self.e1.len() - 1;
        if !(s >= -1e-9 && s <= last as f64 + 1e-9) {
            return Err(Error::OutOfRange {
                what: "cell coordinate",
                detail: format!("{x} outside [-{r}, {r}]", r = self.radius),
            });
        }
        let i = (s.floor().max(0.0) as usize).min(last.saturating_sub(1));
        let t = (s - i as f64).clamp(0.0, 1.0);
        let h = self.step;
        let herm = |y: &[f64], yp: &[f64]| -> [f64; 2] {
            if last == 0 {
                return [y[0], yp[0]];
            }
            let (y0, y1, d0, d1) = (y[i], y[i + 1], yp[i] * h, yp[i + 1] * h);
            let t2 = t * t;
            let t3 = t2 * t;
            let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
                + (t3 - 2.0 * t2 + t) * d0
                + (-2.0 * t3 + 3.0 * t2) * y1
                + (t3 - t2) * d1;
            let dv = ((6.0 * t2 - 6.0 * t) * y0
                + (3.0 * t2 - 4.0 * t + 1.0) * d0
                + (-6.0 * t2 + 6.0 * t) * y1
                + (3.0 * t2 - 2.0 * t) * d1)
                / h;
            [v, dv]
        };
        let [a, ap] = herm(&self.e1, &self.e1p);
        let [b, bp] = herm(&self.e2, &self.e2p);
        Ok([a, ap, b, bp])
    }

    fn value_matrix(&self, x: f64) -> Result<Mat2> {
        let [a, ap, b, bp] = self.at(x)?;
        Ok(Mat2::new(a, b, ap, bp))
    }

    /// `𝒜 = [[e₁(0), e₂(0)], [e₁'(0), e₂'(0)]]`.
    pub fn anchor_matrix(&self) -> Result<Mat2> {
        self.value_matrix(0.0)
    }

    /// Values and derivatives at `−N`.
    pub fn left_matrix(&self) -> Result<Mat2> {
        self.value_matrix(-self.radius)
    }

    /// Values and derivatives at `+N`.
    pub fn right_matrix(&self) -> Result<Mat2> {
        self.value_matrix(self.radius)
    }
}

/// Builds the basis from `W` (the effective potential `V(n + ·) − E`) and the
/// weight `q`: `Ψ(0) = Φ'(0) = 1`, `Ψ'(0) = Φ(0) = 0`, then Gram–Schmidt in
/// `⟨·,·⟩_q`.
pub fn continuum_basis(
    w: &dyn Fn(f64) -> f64,
    q: &dyn Fn(f64) -> f64,
    radius: f64,
) -> Result<ContinuumCellBasis> {
    let per_unit = settled_resolution(w, 0.0, &[-radius, radius])?;
    let half = (radius * per_unit as f64).round() as usize;
    let step = radius / half as f64;
    let form = QForm::continuum(q, radius, step)?;
    let solve = |init: [f64; 2]| -> Result<(Vec<f64>, Vec<f64>)> {
        let right = integrate(w, 0.0, radius, init, half)?;
        let left = integrate(w, 0.0, -radius, init, half)?;
        let mut y: Vec<f64> = left.y.iter().rev().copied().collect();
        let mut yp: Vec<f64> = left.yp.iter().rev().copied().collect();
        y.extend_from_slice(&right.y[1..]);
        yp.extend_from_slice(&right.yp[1..]);
        Ok((y, yp))
    };
    let (psi, psip) = solve([1.0, 0.0])?;
    let (phi, phip) = solve([0.0, 1.0])?;
    let [e1, e1p, e2, e2p] = gram_schmidt(&form, [&psi, &psip], [&phi, &phip])?;
    Ok(ContinuumCellBasis {
        cell: 0,
        energy: f64::NAN,
        radius,
        step,
        e1,
        e1p,
        e2,
        e2p,
        form,
    })
}

/// Orthonormalizes `(f, f')`, `(g, g')` pairs; derivatives follow linearly.
fn gram_schmidt(form: &QForm, f: [&[f64]; 2], g: [&[f64]; 2]) -> Result<[Vec<f64>; 4]> {
    let nf = form.norm(f[0])?;
    if !(nf >= DEGENERATE_NORM) {
        return Err(Error::Degenerate(format!("first basis seminorm {nf:e}")));
    }
    let e1: Vec<f64> = f[0].iter().map(|v| v / nf).collect();
    let e1p: Vec<f64> = f[1].iter().map(|v| v / nf).collect();
    let proj = form.inner(g[0], &e1)?;
    let mut e2: Vec<f64> = g[0].iter().zip(&e1).map(|(g, e)| g - proj * e).collect();
    let mut e2p: Vec<f64> = g[1].iter().zip(&e1p).map(|(g, e)| g - proj * e).collect();
    // second pass: classical Gram–Schmidt loses orthogonality when Ψ ≈ Φ
    let proj2 = form.inner(&e2, &e1)?;
    e2.iter_mut().zip(&e1).for_each(|(g, e)| *g -= proj2 * e);
    e2p.iter_mut().zip(&e1p).for_each(|(g, e)| *g -= proj2 * e);
    let ng = form.norm(&e2)?;
    if !(ng >= DEGENERATE_NORM) {
        return Err(Error::Degenerate(format!("second basis seminorm {ng:e}")));
    }
    e2.iter_mut().for_each(|v| *v /= ng);
    e2p.iter_mut().for_each(|v| *v /= ng);
    Ok([e1, e1p, e2, e2p])
}

/// Basis for cell `n` of a continuum model at `energy`.
pub fn continuum_cell_basis(
    model: &ModelSpec,
    sample: &DisorderSample,
    energy: f64,
    n: i64,
) -> Result<ContinuumCellBasis> {
    if !model.family.is_continuum() {
        return Err(Error::InvalidParameters("continuum basis needs a continuum family".into()));
    }
    let radius = model.support_radius_n as f64;
    let centre = n as f64;
    // surface coverage errors before integrating
    evaluate_potential(model, sample, centre - radius + 1e-9)?;
    evaluate_potential(model, sample, centre + radius - 1e-9)?;
    let w = |x: f64| evaluate_potential(model, sample, centre + x).map_or(f64::NAN, |v| v - energy);
    let q = |x: f64| single_site_value(model, x);
    let mut b = continuum_basis(&w, &q, radius)?;
    b.cell = n;
    b.energy = energy;
    Ok(b)
}

/// Basis of the plan `{y ∈ ℝ^N : b_{k+1}y(m+1) + b_k y(m−1) + (a_m ω_n − E)y(m) = 0,
/// 1 ≤ m ≤ N−2}`, `k = Nn + m`, orthonormal in `⟨·,·⟩_a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteCellBasis {
    pub cell: i64,
    pub energy: f64,
    pub e1: Vec<f64>,
    pub e2: Vec<f64>,
    form: QForm,
}

impl DiscreteCellBasis {
    pub fn form(&self) -> &QForm {
        &self.form
    }

    /// `M_n = [[e₁(1), e₂(1)], [e₁(0), e₂(0)]]`.
    pub fn m_matrix(&self) -> Mat2 {
        Mat2::new(self.e1[1], self.e2[1], self.e1[0], self.e2[0])
    }

    /// `N_n = [[e₁(N−1), e₂(N−1)], [e₁(N−2), e₂(N−2)]]`.
    pub fn n_matrix(&self) -> Mat2 {
        let k = self.e1.len() - 1;
        Mat2::new(self.e1[k], self.e2[k], self.e1[k - 1], self.e2[k - 1])
    }
}

/// Plan basis from explicit data; `hopping(k)` is `b_k` at global index `k`
/// and `first` is the global index of sub-site 0.
pub fn plan_basis(
    a: &[f64],
    omega: f64,
    hopping: &dyn Fn(i64) -> f64,
    first: i64,
    energy: f64,
) -> Result<DiscreteCellBasis> {
    let period = a.len();
    if period < 2 {
        return Err(Error::InvalidParameters(format!(
            "a two-dimensional plan needs period N ≥ 2, got {period}"
        )));
    }
    // Ψ: y(N−1) = 1, y(0) = 0;  Φ: y(0) = 1, y(N−1) = 0
    let psi = plan_solution(a, omega, hopping, first, energy, 0.0, 1.0)?;
    let phi = plan_solution(a, omega, hopping, first, energy, 1.0, 0.0)?;
    let form = QForm::discrete(a.to_vec())?;
    let zeros = vec![0.0; period];
    let [e1, _, e2, _] = gram_schmidt(&form, [&psi, &zeros], [&phi, &zeros])?;
    Ok(DiscreteCellBasis {
        cell: 0,
        energy,
        e1,
        e2,
        form,
    })
}

fn plan_solution(
    a: &[f64],
    omega: f64,
    hopping: &dyn Fn(i64) -> f64,
    first: i64,
    energy: f64,
    y0: f64,
    ylast: f64,
) -> Result<Vec<f64>> {
    let n = a.len();
    let mut y = vec![0.0; n];
    y[0] = y0;
    y[n - 1] = ylast;
    let interior = n - 2;
    if interior == 0 {
        return Ok(y);
    }
    // rows m = 1..N−2 in the unknowns y(1..N−2)
    let mut mat = vec![vec![0.0; interior + 1]; interior];
    for r in 0..interior {
        let m = r + 1;
        let k = first + m as i64;
        let (lo, hi) = (hopping(k), hopping(k + 1));
        mat[r][r] = a[m] * omega - energy;
        if r > 0 {
            mat[r][r - 1] = lo;
        } else {
            mat[r][interior] -= lo * y0;
        }
        if r + 1 < interior {
            mat[r][r + 1] = hi;
        } else {
            mat[r][interior] -= hi * ylast;
        }
    }
    let sol = solve_augmented(mat)?;
    y[1..n - 1].copy_from_slice(&sol);
    Ok(y)
}

/// Gaussian elimination with partial pivoting on `[A | rhs]`.
fn solve_augmented(mut m: Vec<Vec<f64>>) -> Result<Vec<f64>> {
    let n = m.len();
    let scale = m.iter().flat_map(|r| r[..n].iter()).fold(0.0f64, |s, v| s.max(v.abs())).max(1.0);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .expect("nonempty");
        if m[piv][col].abs() <= 1e-14 * scale {
            return Err(Error::Degenerate("plan system is singular at this energy".into()));
        }
        m.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for c in col..=n {
                m[r][c] -= f * m[col][c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| m[r][c] * x[c]).sum();
        x[r] = (m[r][n] - s) / m[r][r];
    }
    Ok(x)
}

pub fn discrete_cell_basis(
    model: &ModelSpec,
    sample: &DisorderSample,
    energy: f64,
    n: i64,
) -> Result<DiscreteCellBasis> {
    let period = require_multimer(model)?;
    let omega = sample.omega(n)?;
    let hop = |k: i64| model.hopping(k);
    let mut b = plan_basis(&model.multimer_weights_a, omega, &hop, period as i64 * n, energy)?;
    b.cell = n;
    Ok(b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CellBasis {
    Continuum(ContinuumCellBasis),
    Discrete(DiscreteCellBasis),
}

impl CellBasis {
    pub fn cell(&self) -> i64 {
        match self {
            Self::Continuum(b) => b.cell,
            Self::Discrete(b) => b.cell,
        }
    }

    pub fn form(&self) -> &QForm {
        match self {
            Self::Continuum(b) => b.form(),
            Self::Discrete(b) => b.form(),
        }
    }

    /// The two basis functions on the form's support grid.
    pub fn functions(&self) -> (&[f64], &[f64]) {
        match self {
            Self::Continuum(b) => (&b.e1, &b.e2),
            Self::Discrete(b) => (&b.e1, &b.e2),
        }
    }
}

/// Dispatches on the family: continuum cells or multimer plans.
pub fn q_orthonormal_basis(
    model: &ModelSpec,
    sample: &DisorderSample,
    energy: f64,
    n: i64,
) -> Result<CellBasis> {
    if model.family.is_continuum() {
        continuum_cell_basis(model, sample, energy, n).map(CellBasis::Continuum)
    } else {
        discrete_cell_basis(model, sample, energy, n).map(CellBasis::Discrete)
    }
}

/// Maps between the Prüfer coordinates of cell `n` and its neighbours.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellTransfers {
    pub cell: i64,
    pub energy: f64,
    /// `U(n + s) ≈ T⁺ U(n)`; `s = 1` on lattices, `2N` in the continuum.
    pub plus: TransferMatrix,
    /// `U(n − s) ≈ T⁻ U(n)`.
    pub minus: TransferMatrix,
}

/// `T±` at cell `n`.
///
/// Multimer: `T⁺_n = M_{n+1}⁻¹ A_n N_n`, `T⁻_n = N_{n−1}⁻¹ A_{n−1}⁻¹ M_n` with
/// `A_n = P_{n+1,0} P_{n,N−1}`. Continuum: `T⁺_n = M_{n+2N}⁻¹ N_n` and
/// `T⁻_n = N_{n−2N}⁻¹ M_n` with `M`, `N` the value matrices at `∓N`.
pub fn cell_transfers(
    model: &ModelSpec,
    sample: &DisorderSample,
    energy: f64,
    n: i64,
) -> Result<CellTransfers> {
    let inv = |m: Mat2, what: &str| {
        m.inverse()
            .ok_or_else(|| Error::Degenerate(format!("{what} is singular in cell {n}")))
    };
    let (plus, minus) = if model.family.is_continuum() {
        let s = 2 * model.support_radius_n as i64;
        let here = continuum_cell_basis(model, sample, energy, n)?;
        let ahead = continuum_cell_basis(model, sample, energy, n + s)?;
        let behind = continuum_cell_basis(model, sample, energy, n - s)?;
        (
            inv(ahead.left_matrix()?, "M")? * here.right_matrix()?,
            inv(behind.right_matrix()?, "N")? * here.left_matrix()?,
        )
    } else {
        let period = require_multimer(model)?;
        let link = |c: i64| -> Result<Mat2> {
            Ok(one_step_transfer(model, sample, energy, c + 1, 0)?.entries
                * one_step_transfer(model, sample, energy, c, period - 1)?.entries)
        };
        let here = discrete_cell_basis(model, sample, energy, n)?;
        let ahead = discrete_cell_basis(model, sample, energy, n + 1)?;
        let behind = discrete_cell_basis(model, sample, energy, n - 1)?;
        (
            inv(ahead.m_matrix(), "M")? * link(n)? * here.n_matrix(),
            inv(behind.n_matrix(), "N")? * inv(link(n - 1)?, "A")? * here.m_matrix(),
        )
    };
    Ok(CellTransfers {
        cell: n,
        energy,
        plus: TransferMatrix::new(plus, Provenance::CellBasis),
        minus: TransferMatrix::new(minus, Provenance::CellBasis),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Density;
    use approx::assert_abs_diff_eq;

    fn indicator(x: f64) -> f64 {
        if x.abs() <= 0.5 { 1.0 } else { 0.0 }
    }

    #[test]
    fn free_basis_matches_closed_form() {
        // solutions 1 and x; ⟨1,1⟩ = 1, ⟨1,x⟩ = 0, ⟨x,x⟩ = 1/12
        let b = continuum_basis(&|_| 0.0, &indicator, 1.0).unwrap();
        let s12 = 12f64.sqrt();
        for (i, x) in b.grid().iter().enumerate() {
            assert_abs_diff_eq!(b.e1[i], 1.0, epsilon = 1e-10);
            assert_abs_diff_eq!(b.e2[i], s12 * x, epsilon = 1e-10);
            assert_abs_diff_eq!(b.e2p[i], s12, epsilon = 1e-10);
        }
    }

    #[test]
    fn orthonormal_postcondition() {
        let w = |x: f64| 2.0 + if x > 0.3 { 1.5 } else { -0.5 } + x.sin();
        let b = continuum_basis(&w, &|x: f64| 1.0 - x.abs() * 0.5, 1.0).unwrap();
        let f = b.form();
        assert_abs_diff_eq!(f.inner(&b.e1, &b.e2).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.norm(&b.e1).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.norm(&b.e2).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn hermite_reproduces_nodes_and_cubics() {
        let w = |_: f64| -1.0; // cos and sin
        let b = continuum_basis(&w, &indicator, 1.0).unwrap();
        let [a, ap, _, _] = b.at(0.12345).unwrap();
        let [a0, _, _, _] = b.at(0.0).unwrap();
        // e1 ∝ cos
        assert_abs_diff_eq!(a / a0, 0.12345f64.cos(), epsilon = 1e-10);
        assert_abs_diff_eq!(ap / a0, -(0.12345f64.sin()), epsilon = 1e-9);
        assert!(b.at(1.5).is_err());
    }

    #[test]
    fn plan_dimension_two_is_coordinate_basis() {
        let b = plan_basis(&[4.0, 9.0], 3.0, &|_| 1.0, 0, 0.1).unwrap();
        assert_abs_diff_eq!(b.e1[1], 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.e1[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.e2[0], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn plan_basis_solves_plan_equation() {
        let a = [1.0, 2.0, 0.5, 1.5];
        let hop = |k: i64| [1.0, 0.8, 1.3][k.rem_euclid(3) as usize];
        let (omega, e, first) = (0.7, 0.2, 8);
        let b = plan_basis(&a, omega, &hop, first, e).unwrap();
        for y in [&b.e1, &b.e2] {
            for m in 1..3 {
                let k = first + m as i64;
                let r = hop(k + 1) * y[m + 1] + hop(k) * y[m - 1] + (a[m] * omega - e) * y[m];
                assert_abs_diff_eq!(r, 0.0, epsilon = 1e-12);
            }
        }
        let f = b.form();
        assert_abs_diff_eq!(f.inner(&b.e1, &b.e2).unwrap(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(f.norm(&b.e2).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn plan_approaches_corner_basis_for_large_omega() {
        let a = [1.0, 2.0, 0.5, 3.0];
        let mut prev = f64::INFINITY;
        for omega in [10.0, 100.0, 1000.0] {
            let b = plan_basis(&a, omega, &|_| 1.0, 0, 0.0).unwrap();
            let mut inf1 = [0.0; 4];
            inf1[3] = 1.0 / a[3].sqrt();
            let mut inf2 = [0.0; 4];
            inf2[0] = 1.0 / a[0].sqrt();
            let dist = (0..4).fold(0.0f64, |m, i| m.max((b.e1[i] - inf1[i]).abs()))
                + (0..4).fold(0.0f64, |m, i| m.max((b.e2[i] - inf2[i]).abs()));
            assert!(dist < prev && dist < 5.0 / omega, "omega {omega}: {dist}");
            prev = dist;
        }
    }

    #[test]
    fn multimer_transfers_propagate_plan_vectors() {
        // with E equal to the basis energy, T⁺ maps the coordinates of a
        // solution in cell n to its coordinates in cell n+1 exactly
        let model = ModelSpec::multimer(vec![1.0, 2.0, 0.5], vec![1.0, 1.2], Density::Uniform01);
        let s = DisorderSample::from_values(-1, vec![0.3, 0.8, 0.1, 0.6, 0.4], 0, 1.0).unwrap();
        let e = 0.37;
        let t = cell_transfers(&model, &s, e, 1).unwrap();
        let here = discrete_cell_basis(&model, &s, e, 1).unwrap();
        let ahead = discrete_cell_basis(&model, &s, e, 2).unwrap();
        let (ca, cb) = (0.6, -0.8);
        // ũ on sites 3..=5 from the basis, then one recursion step per site
        let mut u: Vec<f64> = (0..3).map(|m| ca * here.e1[m] + cb * here.e2[m]).collect();
        for k in 5..8i64 {
            let p = one_step_transfer(&model, &s, e, k.div_euclid(3), k.rem_euclid(3) as usize).unwrap();
            let next = p.apply([u[u.len() - 1], u[u.len() - 2]]);
            u.push(next[0]);
        }
        let got = t.plus.apply([ca, cb]);
        for m in 0..3 {
            let y = got[0] * ahead.e1[m] + got[1] * ahead.e2[m];
            assert_abs_diff_eq!(y, u[3 + m], epsilon = 1e-12);
        }
    }

    #[test]
    fn plus_and_minus_are_inverse_in_the_continuum_free_case() {
        let model = ModelSpec::simple_continuum(0.01);
        let s = DisorderSample::from_values(-3, vec![0.0; 12], 0, 1.0).unwrap();
        let t = cell_transfers(&model, &s, -1.0, 3).unwrap();
        let tp = cell_transfers(&model, &s, -1.0, 5).unwrap();
        let id = tp.minus.entries * t.plus.entries;
        assert_abs_diff_eq!(id.a, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(id.b, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(id.d, 1.0, epsilon = 1e-9);
    }
}
