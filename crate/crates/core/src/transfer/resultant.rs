//! Elimination of `t_u` between the two norm-matching equations.
//!
//! For a transfer `T` and `U ∝ (t, 1)`, `‖T U‖²/‖U‖² = P(t)/(1 + t²)` with
//! `P(t) = t²g₁₁ + 2t g₁₂ + g₂₂` built from the Gram entries of `T`. Matching
//! the radii of two eigenvectors across `T⁺` and `T⁻` gives
//!
//! ```text
//! R₁(t_u, t_v) = (1 + t_v²) P⁺_F(t_u) − (1 + t_u²) P⁺_G(t_v)
//! R₂(t_u, t_v) = (1 + t_v²) P⁻_F(t_u) − (1 + t_u²) P⁻_G(t_v)
//! ```
//!
//! and `ℛ(t_v) = Res_{t_u}(R₁, R₂)` has degree at most 8.

use serde::{Deserialize, Serialize};

use super::angle::TransferMatrix;
use crate::error::{Error, Result};
use crate::linalg::{determinant4, Mat2, Polynomial};
use crate::scalar::{Ring, Scalar};

/// `(‖Te₁‖², ⟨Te₁, Te₂⟩, ‖Te₂‖²)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gram<T = f64> {
    pub g11: T,
    pub g12: T,
    pub g22: T,
}

impl<T: Ring> Gram<T> {
    pub fn new(g11: T, g12: T, g22: T) -> Self {
        Self { g11, g12, g22 }
    }
}

impl<T: Scalar> Gram<T> {
    pub fn of(m: &Mat2<T>) -> Self {
        Self {
            g11: m.a * m.a + m.c * m.c,
            g12: m.a * m.b + m.c * m.d,
            g22: m.b * m.b + m.d * m.d,
        }
    }
}

fn two<T: Ring>() -> T {
    T::one() + T::one()
}

/// Coefficients of `R(·, t_v)` in `t_u` (descending: `t_u²`, `t_u`, 1), each a
/// polynomial in `t_v`.
pub fn norm_matching_quadratic<T: Ring>(f: &Gram<T>, g: &Gram<T>) -> [Polynomial<T>; 3] {
    let tw = two::<T>();
    let p = |x: &T| {
        Polynomial::new(vec![
            x.clone() - g.g22.clone(),
            -(tw.clone() * g.g12.clone()),
            x.clone() - g.g11.clone(),
        ])
    };
    let cross = tw.clone() * f.g12.clone();
    [
        p(&f.g11),
        Polynomial::new(vec![cross.clone(), T::zero(), cross]),
        p(&f.g22),
    ]
}

/// Exact resultant over any ring, with the degeneracy flag (all six
/// coefficient polynomials vanish).
pub fn resultant_from_grams<T: Ring>(
    f_plus: &Gram<T>,
    f_minus: &Gram<T>,
    g_plus: &Gram<T>,
    g_minus: &Gram<T>,
) -> (Polynomial<T>, bool) {
    let [a, b, c] = norm_matching_quadratic(f_plus, g_plus);
    let [d, e, f] = norm_matching_quadratic(f_minus, g_minus);
    let z = <Polynomial<T> as num_traits::Zero>::zero();
    let degenerate = [&a, &b, &c, &d, &e, &f].iter().all(|p| p.degree().is_none());
    // columns are the shifted coefficient vectors of R₁ and R₂
    let m = [
        [a.clone(), z.clone(), d.clone(), z.clone()],
        [b.clone(), a, e.clone(), d],
        [c.clone(), b, f.clone(), e],
        [z.clone(), c, z, f],
    ];
    (determinant4(&m), degenerate)
}

/// `det A` for the leading-coefficient matrix, rows `(Δ₁, 0, Δ₃, 0)`,
/// `(Π₊, Δ₁, Π₋, Δ₃)`, `(Δ₂, Π₊, Δ₄, Π₋)`, `(0, Δ₂, 0, Δ₄)`.
pub fn matrix_a_determinant<T: Ring>(d: [T; 4], pi_plus: T, pi_minus: T) -> T {
    let [d1, d2, d3, d4] = d;
    let z = T::zero();
    determinant4(&[
        [d1.clone(), z.clone(), d3.clone(), z.clone()],
        [pi_plus.clone(), d1, pi_minus.clone(), d3],
        [d2.clone(), pi_plus, d4.clone(), pi_minus],
        [z.clone(), d2, z, d4],
    ])
}

/// Closed form of [`matrix_a_determinant`]:
/// `(Π₊Δ₃ − Π₋Δ₁)(Π₊Δ₄ − Π₋Δ₂) + (Δ₁Δ₄ − Δ₂Δ₃)²`.
pub fn matrix_a_closed_form<T: Ring>(d: [T; 4], pi_plus: T, pi_minus: T) -> T {
    let [d1, d2, d3, d4] = d;
    let x = pi_plus.clone() * d3.clone() - pi_minus.clone() * d1.clone();
    let y = pi_plus * d4.clone() - pi_minus * d2.clone();
    let w = d1 * d4 - d2 * d3;
    x * y + w.clone() * w
}

/// `t_v⁸` coefficient of `ℛ`: `det A` with `Π± → 2Π±`, since the middle
/// coefficient of each quadratic carries a factor 2.
pub fn leading_coefficient<T: Ring>(
    f_plus: &Gram<T>,
    f_minus: &Gram<T>,
    g_plus: &Gram<T>,
    g_minus: &Gram<T>,
) -> T {
    let d = [
        f_plus.g11.clone() - g_plus.g11.clone(),
        f_plus.g22.clone() - g_plus.g11.clone(),
        f_minus.g11.clone() - g_minus.g11.clone(),
        f_minus.g22.clone() - g_minus.g11.clone(),
    ];
    matrix_a_closed_form(d, two::<T>() * f_plus.g12.clone(), two::<T>() * f_minus.g12.clone())
}

/// Coefficients `c₀..c₈` of `ℛ` (ascending), or of `𝒬(X) = X⁸ℛ(1/X)` when
/// `mirrored`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultantCoeffs {
    pub c: [f64; 9],
    pub mirrored: bool,
    /// `R₁` and `R₂` vanish identically.
    pub degenerate: bool,
    /// `max |c_i| ≤ 1e-12 · scale`; flagged, not an error.
    pub vanishing: bool,
    /// Magnitude reference: fourth power of the largest Gram entry.
    pub scale: f64,
}

pub const VANISHING_TOL: f64 = 1e-12;

impl ResultantCoeffs {
    fn from_poly(p: &Polynomial<f64>, degenerate: bool, scale: f64) -> Self {
        let mut c = [0.0; 9];
        for (k, slot) in c.iter_mut().enumerate() {
            *slot = p.coeff(k);
        }
        let max = c.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        Self {
            c,
            mirrored: false,
            degenerate,
            vanishing: max <= VANISHING_TOL * scale,
            scale,
        }
    }

    /// Exact coefficient reversal.
    pub fn mirror(&self) -> Self {
        let mut c = self.c;
        c.reverse();
        Self {
            c,
            mirrored: !self.mirrored,
            ..self.clone()
        }
    }

    pub fn polynomial(&self) -> Polynomial<f64> {
        Polynomial::new(self.c.to_vec())
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.c.iter().rev().fold(0.0, |acc, &a| acc * t + a)
    }
}

/// `ℛ` for the four cell transfers.
pub fn resultant_pair(
    t_plus_f: &TransferMatrix,
    t_minus_f: &TransferMatrix,
    t_plus_g: &TransferMatrix,
    t_minus_g: &TransferMatrix,
) -> Result<ResultantCoeffs> {
    let ms = [t_plus_f, t_minus_f, t_plus_g, t_minus_g];
    if ms.iter().any(|m| !m.entries.is_finite()) {
        return Err(Error::Numeric("non-finite transfer matrix".into()));
    }
    let grams: Vec<Gram> = ms.iter().map(|m| Gram::of(&m.entries)).collect();
    let big = grams
        .iter()
        .flat_map(|g| [g.g11, g.g12.abs(), g.g22])
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let (p, degenerate) = resultant_from_grams(&grams[0], &grams[1], &grams[2], &grams[3]);
    Ok(ResultantCoeffs::from_poly(&p, degenerate, big.powi(4)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootProximity {
    /// `min_i |t − Re z_i|`.
    pub distance: f64,
    /// `(eps/delta)^{1/deg}`.
    pub bound: f64,
    pub degree: usize,
}

/// Distance from `t` to the real parts of the roots of the polynomial.
///
/// If `|c_deg| ≥ delta` and `|ℛ(t)| ≤ eps` then `Π|t − z_i| ≤ eps/delta`, so
/// some root is within `(eps/delta)^{1/deg}`.
pub fn root_proximity(coeffs: &ResultantCoeffs, t: f64, delta: f64, eps: f64) -> Result<RootProximity> {
    let p = coeffs.polynomial();
    let deg = match p.degree() {
        Some(d) if d > 0 => d,
        _ => return Err(Error::NotApplicable("constant polynomial has no roots".into())),
    };
    if !(delta > 0.0 && eps >= 0.0) {
        return Err(Error::InvalidParameters(format!("need delta > 0, eps ≥ 0; got {delta}, {eps}")));
    }
    if p.coeff(deg).abs() < delta {
        return Err(Error::NotApplicable(format!(
            "leading coefficient {:e} below delta {delta:e}",
            p.coeff(deg)
        )));
    }
    let value = p.eval(&t);
    if value.abs() > eps {
        return Err(Error::InvalidParameters(format!("|R(t)| = {:e} exceeds eps {eps:e}", value.abs())));
    }
    let roots = p.roots()?;
    let distance = roots.iter().map(|z| (t - z.re).abs()).fold(f64::INFINITY, f64::min);
    Ok(RootProximity {
        distance,
        bound: (eps / delta).powf(1.0 / deg as f64),
        degree: deg,
    })
}
