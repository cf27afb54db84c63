//! Fixed-step RK4 for `y'' = W(x) y`, with step halving until the endpoint
//! values settle.

use super::angle::{direction_map, ProjectiveAngle, Provenance, TransferMatrix};
use crate::error::{Error, Result};
use crate::linalg::Mat2;

pub const BASE_STEP: f64 = 1e-3;
/// Endpoint values of successive refinements must agree to this (relative).
pub const REFINE_TOL: f64 = 1e-10;
const MAX_HALVINGS: u32 = 6;

/// Samples of one solution on a uniform grid from `x0`.
#[derive(Debug, Clone)]
pub(crate) struct Trajectory {
    pub y: Vec<f64>,
    pub yp: Vec<f64>,
}

/// Integrates from `x0` to `x1` (either order) in `steps` equal steps.
///
/// Stage evaluations stay strictly inside each step, so a `W` with jumps on
/// grid nodes is seen through its one-sided limits.
pub(crate) fn integrate(
    w: &dyn Fn(f64) -> f64,
    x0: f64,
    x1: f64,
    init: [f64; 2],
    steps: usize,
) -> Result<Trajectory> {
    let h = (x1 - x0) / steps as f64;
    let nudge = 1e-9 * h;
    let mut y = Vec::with_capacity(steps + 1);
    let mut yp = Vec::with_capacity(steps + 1);
    let (mut a, mut b) = (init[0], init[1]);
    y.push(a);
    yp.push(b);
    for i in 0..steps {
        let x = x0 + i as f64 * h;
        let (w0, wm, w1) = (w(x + nudge), w(x + 0.5 * h), w(x + h - nudge));
        let (k1a, k1b) = (b, w0 * a);
        let (k2a, k2b) = (b + 0.5 * h * k1b, wm * (a + 0.5 * h * k1a));
        let (k3a, k3b) = (b + 0.5 * h * k2b, wm * (a + 0.5 * h * k2a));
        let (k4a, k4b) = (b + h * k3b, w1 * (a + h * k3a));
        a += h / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
        b += h / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
        y.push(a);
        yp.push(b);
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Numeric(format!(
            "ODE integration overflowed with step {:e}",
            h.abs()
        )));
    }
    Ok(Trajectory { y, yp })
}

/// Steps per unit length (a power of two multiple of `1/BASE_STEP`) at which
/// both fundamental solutions from `x0` have settled at every `ends` point.
pub(crate) fn settled_resolution(
    w: &dyn Fn(f64) -> f64,
    x0: f64,
    ends: &[f64],
) -> Result<usize> {
    let endpoint_values = |per_unit: usize| -> Result<Vec<f64>> {
        let mut out = Vec::new();
        for &x1 in ends {
            let steps = ((x1 - x0).abs() * per_unit as f64).round().max(1.0) as usize;
            for init in [[1.0, 0.0], [0.0, 1.0]] {
                let t = integrate(w, x0, x1, init, steps)?;
                out.push(*t.y.last().expect("nonempty"));
                out.push(*t.yp.last().expect("nonempty"));
            }
        }
        Ok(out)
    };
    let mut per_unit = (1.0 / BASE_STEP).round() as usize;
    let mut prev = endpoint_values(per_unit)?;
    for _ in 0..MAX_HALVINGS {
        per_unit *= 2;
        let next = endpoint_values(per_unit)?;
        let scale = next.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let change = prev.iter().zip(&next).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if change <= REFINE_TOL * scale {
            return Ok(per_unit);
        }
        prev = next;
    }
    Err(Error::Numeric(format!(
        "ODE refinement did not settle at step {:e}",
        1.0 / per_unit as f64
    )))
}

/// `ℋ = [[h₁(x₂), h₂(x₂)], [h₁'(x₂), h₂'(x₂)]]` for `−y'' + W y = 0` with
/// `h₁(x₁) = h₂'(x₁) = 1`, `h₁'(x₁) = h₂(x₁) = 0`.
#[derive(Debug, Clone, Copy)]
pub struct DirectionTransport {
    pub matrix: TransferMatrix,
    /// Integration step actually used.
    pub step: f64,
}

impl DirectionTransport {
    /// Direction of `(y(x₂), y'(x₂))` for the solution with `(y, y')(x₁) ∝ Υ(θ)`.
    pub fn map(&self, theta: ProjectiveAngle) -> Result<ProjectiveAngle> {
        direction_map(&self.matrix.entries, theta)
    }

    /// Largest sampled displacement `sup_θ d(𝒯θ, 𝒯'θ)` against another transport.
    pub fn max_displacement(&self, other: &Self, samples: usize) -> Result<f64> {
        let pi = std::f64::consts::PI;
        let mut worst = 0.0f64;
        for k in 0..samples {
            let th = ProjectiveAngle::new(pi * k as f64 / samples as f64);
            worst = worst.max(self.map(th)?.distance(other.map(th)?));
        }
        Ok(worst)
    }
}

pub fn direction_transport(w: &dyn Fn(f64) -> f64, x1: f64, x2: f64) -> Result<DirectionTransport> {
    if !(x1 < x2) {
        return Err(Error::InvalidParameters(format!("need x1 < x2, got [{x1}, {x2}]")));
    }
    let per_unit = settled_resolution(w, x1, &[x2])?;
    let steps = ((x2 - x1) * per_unit as f64).round().max(1.0) as usize;
    let h1 = integrate(w, x1, x2, [1.0, 0.0], steps)?;
    let h2 = integrate(w, x1, x2, [0.0, 1.0], steps)?;
    let m = Mat2::new(
        *h1.y.last().expect("nonempty"),
        *h2.y.last().expect("nonempty"),
        *h1.yp.last().expect("nonempty"),
        *h2.yp.last().expect("nonempty"),
    );
    Ok(DirectionTransport {
        matrix: TransferMatrix::new(m, Provenance::ContinuumInterval),
        step: (x2 - x1) / steps as f64,
    })
}
