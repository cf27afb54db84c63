//! Eigenvalue counting for continuum boxes by Prüfer-angle winding.
//!
//! With `y = ρ sin φ`, `y' = ρ cos φ` the Dirichlet problem `−y'' + (V − E)y = 0`
//! becomes `φ' = cos²φ − (V − E) sin²φ`, `φ(0) = 0`. The angle only crosses
//! multiples of π upwards, and the number of eigenvalues below `E` equals the
//! number of interior zeros of the shooting solution, `⌈φ(L)/π⌉ − 1`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{evaluate_potential, DisorderSample, ModelSpec};

/// Number of Dirichlet eigenvalues of `−d²/dx² + V` on `[0, length]` strictly
/// below `energy`, integrating the angle with RK4 at the given step.
pub fn shooting_count_below(
    model: &ModelSpec,
    sample: &DisorderSample,
    length: f64,
    energy: f64,
    step: f64,
) -> Result<usize> {
    if !model.family.is_continuum() {
        return Err(Error::InvalidParameters("shooting count needs a continuum family".into()));
    }
    if !(length > 0.0 && step > 0.0) {
        return Err(Error::InvalidParameters("length and step must be positive".into()));
    }
    let steps = (length / step).ceil() as usize;
    let h = length / steps as f64;
    let nudge = 1e-9 * h;
    let rhs = |phi: f64, v: f64| {
        let (s, c) = phi.sin_cos();
        c * c - (v - energy) * s * s
    };
    let mut phi = 0.0f64;
    for i in 0..steps {
        let x = i as f64 * h;
        // stage points kept strictly inside the step so jumps at the grid are one-sided
        let v0 = evaluate_potential(model, sample, x + nudge)?;
        let vm = evaluate_potential(model, sample, x + 0.5 * h)?;
        let v1 = evaluate_potential(model, sample, x + h - nudge)?;
        let k1 = rhs(phi, v0);
        let k2 = rhs(phi + 0.5 * h * k1, vm);
        let k3 = rhs(phi + 0.5 * h * k2, vm);
        let k4 = rhs(phi + h * k3, v1);
        phi += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if !phi.is_finite() {
        return Err(Error::Numeric("Prüfer angle diverged".into()));
    }
    Ok(((phi / PI).ceil() as i64 - 1).max(0) as usize)
}

/// Eigenvalues in `[lo, hi)` by two shooting counts.
pub fn shooting_count_in(
    model: &ModelSpec,
    sample: &DisorderSample,
    length: f64,
    lo: f64,
    hi: f64,
    step: f64,
) -> Result<usize> {
    if !(lo <= hi) {
        return Err(Error::InvalidParameters(format!("interval [{lo}, {hi}] is empty")));
    }
    let a = shooting_count_below(model, sample, length, lo, step)?;
    let b = shooting_count_below(model, sample, length, hi, step)?;
    Ok(b.saturating_sub(a))
}
