//! Sign-change counts of sampled solutions and executable forms of the
//! oscillation lemmas for periodic one-dimensional equations.
//!
//! Continuum: `y'' = (λq̃ − E)y` with `q̃` one-periodic, `m = inf q̃ > 0`.
//! Lattice: `u(k+1) + u(k−1) = (E − λã_k)u(k)` with `ã` periodic, `λ < 0`,
//! `m = min ã > 0`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ode::integrate;
use crate::error::{Error, Result};

/// Strict sign changes, skipping exact zeros: a zero between opposite signs
/// counts once, a zero between equal signs not at all.
pub fn oscillation_sign_changes(y: &[f64]) -> Result<usize> {
    let mut last = 0.0f64;
    let mut changes = 0;
    for &v in y {
        if v.is_nan() {
            return Err(Error::Numeric("NaN in sampled solution".into()));
        }
        if v == 0.0 {
            continue;
        }
        if last != 0.0 && (v > 0.0) != (last > 0.0) {
            changes += 1;
        }
        last = v;
    }
    if last == 0.0 {
        return Err(Error::Degenerate("all-zero sequence has no sign".into()));
    }
    Ok(changes)
}

/// Outcome of one lemma instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub hypothesis_holds: bool,
    pub sign_changes: usize,
    pub bound: usize,
}

impl LemmaCheck {
    /// Vacuously true when the hypothesis fails.
    pub fn holds(&self) -> bool {
        !self.hypothesis_holds || self.sign_changes <= self.bound
    }
}

/// A one-periodic piecewise-linear `q̃` through `values` at `k/len`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicProfile {
    pub values: Vec<f64>,
}

impl PeriodicProfile {
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.values.len();
        let s = x.rem_euclid(1.0) * n as f64;
        let i = (s.floor() as usize).min(n - 1);
        let t = s - i as f64;
        self.values[i] * (1.0 - t) + self.values[(i + 1) % n] * t
    }

    pub fn inf(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

const GRID_STEP: f64 = 1e-3;

/// Samples of the solution of `y'' = (λq̃ − E)y` with `(y, y')(0) = init` on
/// `[−half, half + tail]`; the last sample is at the far right.
pub fn continuum_solution(
    q: &PeriodicProfile,
    lambda: f64,
    energy: f64,
    init: [f64; 2],
    half: f64,
    tail: f64,
) -> Result<Vec<f64>> {
    let w = |x: f64| lambda * q.eval(x) - energy;
    let right_steps = ((half + tail) / GRID_STEP).round() as usize;
    let left_steps = (half / GRID_STEP).round() as usize;
    let right = integrate(&w, 0.0, half + tail, init, right_steps)?;
    let left = integrate(&w, 0.0, -half, init, left_steps)?;
    let mut y: Vec<f64> = left.y.into_iter().rev().collect();
    y.extend_from_slice(&right.y[1..]);
    Ok(y)
}

/// Samples `u(k)` for `k ∈ [−half, half + tail]` from `(u(0), u(1)) = init`.
pub fn lattice_solution(
    a: &[f64],
    lambda: f64,
    energy: f64,
    init: [f64; 2],
    half: usize,
    tail: usize,
) -> Vec<f64> {
    let p = a.len() as i64;
    let coef = |k: i64| energy - lambda * a[k.rem_euclid(p) as usize];
    let (h, t) = (half as i64, tail as i64);
    let mut right = vec![init[0], init[1]];
    for k in 1..h + t {
        let next = coef(k) * right[k as usize] - right[k as usize - 1];
        right.push(next);
    }
    let mut left = vec![init[1], init[0]];
    // u(k−1) = coef(k)u(k) − u(k+1)
    for j in 1..=h {
        let k = 1 - j;
        let next = coef(k) * left[j as usize] - left[j as usize - 1];
        left.push(next);
    }
    let mut out: Vec<f64> = left[2..].iter().rev().copied().collect();
    out.extend_from_slice(&right);
    out
}

fn oriented_difference(u: &[f64], v: &[f64], keep: usize) -> Vec<f64> {
    // positive near +∞: the far-right sample fixes each sign
    let su = u.last().copied().unwrap_or(1.0).signum();
    let sv = v.last().copied().unwrap_or(1.0).signum();
    u[..keep].iter().zip(&v[..keep]).map(|(a, b)| sv * b - su * a).collect()
}

/// At most one zero of a solution when `λm > E`.
pub fn check_onezero(q: &PeriodicProfile, lambda: f64, energy: f64, init: [f64; 2], half: f64) -> Result<LemmaCheck> {
    let y = continuum_solution(q, lambda, energy, init, half, 0.0)?;
    Ok(LemmaCheck {
        hypothesis_holds: lambda * q.inf() > energy,
        sign_changes: oscillation_sign_changes(&y)?,
        bound: 1,
    })
}

/// `v − u` changes sign at most three times when `λm > E₁ > E₂`, `u` solves at
/// `E₁`, `v` at `E₂`, and both are positive near `+∞`.
pub fn check_threezero(
    q: &PeriodicProfile,
    lambda: f64,
    energies: (f64, f64),
    init_u: [f64; 2],
    init_v: [f64; 2],
    half: f64,
) -> Result<LemmaCheck> {
    let tail = 1.0;
    let u = continuum_solution(q, lambda, energies.0, init_u, half, tail)?;
    let v = continuum_solution(q, lambda, energies.1, init_v, half, tail)?;
    let keep = u.len() - (tail / GRID_STEP).round() as usize;
    let diff = oriented_difference(&u, &v, keep);
    Ok(LemmaCheck {
        hypothesis_holds: lambda * q.inf() > energies.0 && energies.0 > energies.1,
        sign_changes: oscillation_sign_changes(&diff)?,
        bound: 3,
    })
}

/// Lattice analogue of [`check_onezero`]: at most one sign change when
/// `λ < 0` and `E − λm > 2`.
pub fn check_onezero_lattice(a: &[f64], lambda: f64, energy: f64, init: [f64; 2], half: usize) -> Result<LemmaCheck> {
    let m = a.iter().copied().fold(f64::INFINITY, f64::min);
    let y = lattice_solution(a, lambda, energy, init, half, 0);
    Ok(LemmaCheck {
        hypothesis_holds: lambda < 0.0 && m > 0.0 && energy - lambda * m > 2.0,
        sign_changes: oscillation_sign_changes(&y)?,
        bound: 1,
    })
}

/// Lattice analogue of [`check_threezero`] with `E₂ − λm > E₁ − λm > 2`.
pub fn check_threezero_lattice(
    a: &[f64],
    lambda: f64,
    energies: (f64, f64),
    init_u: [f64; 2],
    init_v: [f64; 2],
    half: usize,
) -> Result<LemmaCheck> {
    let m = a.iter().copied().fold(f64::INFINITY, f64::min);
    let tail = 8;
    let u = lattice_solution(a, lambda, energies.0, init_u, half, tail);
    let v = lattice_solution(a, lambda, energies.1, init_v, half, tail);
    let keep = u.len() - tail;
    let diff = oriented_difference(&u, &v, keep);
    Ok(LemmaCheck {
        hypothesis_holds: lambda < 0.0
            && m > 0.0
            && energies.0 - lambda * m > 2.0
            && energies.1 > energies.0,
        sign_changes: oscillation_sign_changes(&diff)?,
        bound: 3,
    })
}

fn random_init(rng: &mut ChaCha8Rng) -> [f64; 2] {
    loop {
        let v = [rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0];
        if v[0].hypot(v[1]) > 0.1 {
            return v;
        }
    }
}

/// A random continuum instance satisfying the hypotheses of both lemmas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuumInstance {
    pub q: PeriodicProfile,
    pub lambda: f64,
    pub e1: f64,
    pub e2: f64,
    pub init_u: [f64; 2],
    pub init_v: [f64; 2],
}

impl ContinuumInstance {
    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let knots = rng.random_range(2..6);
        let values: Vec<f64> = (0..knots).map(|_| 0.2 + 0.8 * rng.random::<f64>()).collect();
        let q = PeriodicProfile { values };
        let lambda = 0.5 + 4.5 * rng.random::<f64>();
        let top = lambda * q.inf();
        let e1 = top - 0.05 - 2.0 * rng.random::<f64>();
        let e2 = e1 - 0.01 - 2.0 * rng.random::<f64>();
        Self {
            q,
            lambda,
            e1,
            e2,
            init_u: random_init(&mut rng),
            init_v: random_init(&mut rng),
        }
    }

    pub fn check_onezero(&self, half: f64) -> Result<LemmaCheck> {
        check_onezero(&self.q, self.lambda, self.e1, self.init_u, half)
    }

    pub fn check_threezero(&self, half: f64) -> Result<LemmaCheck> {
        check_threezero(&self.q, self.lambda, (self.e1, self.e2), self.init_u, self.init_v, half)
    }
}

/// A random lattice instance satisfying the hypotheses of both lemmas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeInstance {
    pub a: Vec<f64>,
    pub lambda: f64,
    pub e1: f64,
    pub e2: f64,
    pub init_u: [f64; 2],
    pub init_v: [f64; 2],
}

impl LatticeInstance {
    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let period = rng.random_range(1..5);
        let a: Vec<f64> = (0..period).map(|_| 0.2 + rng.random::<f64>()).collect();
        let m = a.iter().copied().fold(f64::INFINITY, f64::min);
        let lambda = -(0.1 + 3.0 * rng.random::<f64>());
        // E − λm just above 2
        let e1 = 2.0 + lambda * m + 0.01 + 1.5 * rng.random::<f64>();
        let e2 = e1 + 0.01 + 1.5 * rng.random::<f64>();
        Self {
            a,
            lambda,
            e1,
            e2,
            init_u: random_init(&mut rng),
            init_v: random_init(&mut rng),
        }
    }

    pub fn check_onezero(&self, half: usize) -> Result<LemmaCheck> {
        check_onezero_lattice(&self.a, self.lambda, self.e1, self.init_u, half)
    }

    pub fn check_threezero(&self, half: usize) -> Result<LemmaCheck> {
        check_threezero_lattice(&self.a, self.lambda, (self.e1, self.e2), self.init_u, self.init_v, half)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn counting_rules() {
        assert_eq!(oscillation_sign_changes(&[1.0, -1.0, 2.0]).unwrap(), 2);
        assert_eq!(oscillation_sign_changes(&[1.0, 0.0, -1.0]).unwrap(), 1);
        assert_eq!(oscillation_sign_changes(&[1.0, 0.0, 1.0]).unwrap(), 0);
        assert_eq!(oscillation_sign_changes(&[0.0, 0.0, -3.0]).unwrap(), 0);
        assert!(oscillation_sign_changes(&[0.0, 0.0]).is_err());
        assert!(oscillation_sign_changes(&[]).is_err());
    }

    #[test]
    fn sine_on_three_half_turns() {
        let y: Vec<f64> = (1..3000).map(|k| (k as f64 * 3.0 * PI / 3000.0).sin()).collect();
        assert_eq!(oscillation_sign_changes(&y).unwrap(), 2);
    }

    #[test]
    fn positive_increasing_recursion() {
        // u(m+1) = 3u(m) − u(m−1), u(0) = 0, u(1) = 1
        let u = lattice_solution(&[1.0], -1.0, 2.0, [0.0, 1.0], 0, 30);
        assert_eq!(u[0], 0.0);
        assert!(u[1..].windows(2).all(|w| w[1] > w[0] && w[0] > 0.0));
        assert_eq!(oscillation_sign_changes(&u[1..]).unwrap(), 0);
    }

    #[test]
    fn lattice_solution_indexing() {
        // constant coefficient 2: u(k) = u0 + k(u1 − u0)
        let u = lattice_solution(&[1.0], -1.0, 1.0, [1.0, 3.0], 3, 2);
        assert_eq!(u, vec![-5.0, -3.0, -1.0, 1.0, 3.0, 5.0, 7.0, 9.0, 11.0]);
    }

    #[test]
    fn hypothesis_violation_can_oscillate() {
        // λm < E: oscillatory, the lemma says nothing
        let q = PeriodicProfile { values: vec![1.0] };
        let c = check_onezero(&q, 1.0, 20.0, [0.0, 1.0], 3.0).unwrap();
        assert!(!c.hypothesis_holds && c.sign_changes > 1 && c.holds());
    }

    #[test]
    fn continuum_lemmas_on_random_instances() {
        for seed in 0..40 {
            let inst = ContinuumInstance::random(seed);
            let one = inst.check_onezero(3.0).unwrap();
            assert!(one.hypothesis_holds && one.holds(), "seed {seed}: {one:?}");
            let three = inst.check_threezero(3.0).unwrap();
            assert!(three.hypothesis_holds && three.holds(), "seed {seed}: {three:?}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]
        #[test]
        fn lattice_onezero(seed in any::<u64>()) {
            let inst = LatticeInstance::random(seed);
            let c = inst.check_onezero(25).unwrap();
            prop_assert!(c.hypothesis_holds && c.holds(), "{:?} {:?}", inst, c);
        }

        #[test]
        fn lattice_threezero(seed in any::<u64>()) {
            let inst = LatticeInstance::random(seed);
            let c = inst.check_threezero(25).unwrap();
            prop_assert!(c.hypothesis_holds && c.holds(), "{:?} {:?}", inst, c);
        }
    }
}
