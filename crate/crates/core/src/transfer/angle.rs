//! Directions in the plane as points of ℝ/πℤ and the projective action of
//! 2×2 matrices on them.
//!
//! The chart is `Υ(θ) = (sin θ, cos θ)`, so the angle of a vector `(x, y)` is
//! `atan2(x, y) mod π`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::scalar::Scalar;

/// Image norms below this are treated as underflow.
pub const UNDERFLOW_NORM: f64 = 1e-300;

/// A representative in `[0, π)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProjectiveAngle<T = f64> {
    theta: T,
}

impl<T: Scalar> ProjectiveAngle<T> {
    pub fn new(theta: T) -> Self {
        let pi = T::lit(std::f64::consts::PI);
        let mut r = theta % pi;
        if r < T::zero() {
            r = r + pi;
        }
        // theta = -tiny reduces to exactly π after rounding
        if r >= pi {
            r = T::zero();
        }
        Self { theta: r }
    }

    pub fn theta(self) -> T {
        self.theta
    }

    /// Angle of the line through `(x, y)` in the `Υ` chart.
    pub fn of_vector(v: [T; 2]) -> Result<Self> {
        let norm = v[0].hypot(v[1]);
        if !(norm.to_f64().unwrap_or(0.0) >= UNDERFLOW_NORM) {
            return Err(Error::Numeric(format!(
                "direction of a vector with norm {:?}",
                norm
            )));
        }
        Ok(Self::new(v[0].atan2(v[1])))
    }

    /// `Υ(θ)`.
    pub fn unit(self) -> [T; 2] {
        let (s, c) = self.theta.sin_cos();
        [s, c]
    }

    /// `min(|Δ|, π − |Δ|)`.
    pub fn distance(self, other: Self) -> T {
        let d = (self.theta - other.theta).abs();
        d.min(T::lit(std::f64::consts::PI) - d)
    }

    pub fn shifted(self, phi: T) -> Self {
        Self::new(self.theta + phi)
    }
}

impl<T: Scalar> fmt::Display for ProjectiveAngle<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.theta)
    }
}

/// Where a transfer matrix came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    OneStep,
    NStep,
    ContinuumInterval,
    /// Cell-to-cell maps and coordinate changes built from basis values.
    CellBasis,
    Composite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferMatrix<T = f64> {
    pub entries: Mat2<T>,
    pub provenance: Provenance,
}

impl<T: Scalar> TransferMatrix<T> {
    pub fn new(entries: Mat2<T>, provenance: Provenance) -> Self {
        Self { entries, provenance }
    }

    pub fn det(&self) -> T {
        self.entries.det()
    }

    pub fn apply(&self, v: [T; 2]) -> [T; 2] {
        self.entries.apply(v)
    }

    /// `self ∘ first`.
    pub fn after(&self, first: &Self) -> Self {
        Self::new(self.entries * first.entries, Provenance::Composite)
    }

    pub fn inverse(&self) -> Result<Self> {
        self.entries
            .inverse()
            .map(|m| Self::new(m, self.provenance))
            .ok_or_else(|| Error::Degenerate("singular transfer matrix".into()))
    }
}

/// Direction of `T Υ(θ)`.
///
/// Invariant under `θ → θ + π` and under `T → cT` for `c ≠ 0`.
pub fn direction_map<T: Scalar>(t: &Mat2<T>, theta: ProjectiveAngle<T>) -> Result<ProjectiveAngle<T>> {
    if t.det() == T::zero() {
        return Err(Error::Degenerate("direction map of a singular matrix".into()));
    }
    ProjectiveAngle::of_vector(t.apply(theta.unit()))
}

/// Change of Prüfer chart by the basis matrix `𝒜`; also returns `cond(𝒜)`,
/// which bounds the Lipschitz constant of the map on ℝ/πℤ.
pub fn angle_coordinate_change<T: Scalar>(
    theta: ProjectiveAngle<T>,
    a: &Mat2<T>,
) -> Result<(ProjectiveAngle<T>, T)> {
    let cond = a.cond();
    if !cond.is_finite() {
        return Err(Error::Degenerate("singular coordinate change".into()));
    }
    Ok((direction_map(a, theta)?, cond))
}
