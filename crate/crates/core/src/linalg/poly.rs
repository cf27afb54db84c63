//! Dense univariate polynomials over a ring, with a complex root finder for
//! the floating-point case.
//!
//! Coefficients are stored in ascending order and kept trimmed (no trailing
//! zeros), so structural equality is polynomial equality. The zero polynomial
//! has an empty coefficient list. `Polynomial<T>` is itself a [`Ring`], which
//! is what lets the Sylvester determinant run over `Polynomial<f64>` or
//! `Polynomial<Rational64>` unchanged.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::Ring;

#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial<T> {
    coeffs: Vec<T>,
}

impl<T: Ring> Polynomial<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn constant(c: T) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `X`.
    pub fn x() -> Self {
        Self::new(vec![T::zero(), T::one()])
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Coefficient of `X^k` (zero beyond the degree).
    pub fn coeff(&self, k: usize) -> T {
        self.coeffs.get(k).cloned().unwrap_or_else(T::zero)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, x: &T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    pub fn scale(&self, s: &T) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.clone() * s.clone()).collect())
    }

    /// Coefficients of `X^n p(1/X)` padded to length `n + 1`.
    pub fn reversed_padded(&self, n: usize) -> Vec<T> {
        let mut c: Vec<T> = (0..=n).map(|k| self.coeff(k)).collect();
        c.reverse();
        c
    }

    /// Padded ascending coefficient vector of length `n + 1`.
    pub fn padded(&self, n: usize) -> Vec<T> {
        (0..=n).map(|k| self.coeff(k)).collect()
    }
}

impl<T: Ring> Add for Polynomial<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }
}

impl<T: Ring> Sub for Polynomial<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k) - o.coeff(k)).collect())
    }
}

impl<T: Ring> Neg for Polynomial<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(self.coeffs.into_iter().map(|c| -c).collect())
    }
}

impl<T: Ring> Mul for Polynomial<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        if self.coeffs.is_empty() || o.coeffs.is_empty() {
            return Self::zero();
        }
        let mut out = vec![T::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Self::new(out)
    }
}

impl<T: Ring> Zero for Polynomial<T> {
    fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }
    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
}

impl<T: Ring> One for Polynomial<T> {
    fn one() -> Self {
        Self::constant(T::one())
    }
}

impl Polynomial<f64> {
    /// All complex roots by Aberth–Ehrlich simultaneous iteration.
    ///
    /// Fails on the zero polynomial; a nonzero constant has no roots.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        let Some(deg) = self.degree() else {
            return Err(Error::Degenerate("roots of the zero polynomial".into()));
        };
        // exact zero roots are split off; Aberth converges only linearly on them
        let zeros = self.coeffs.iter().take_while(|c| **c == 0.0).count();
        if zeros > 0 {
            let rest = Polynomial::new(self.coeffs[zeros..].to_vec());
            let mut out = vec![Complex64::new(0.0, 0.0); zeros];
            out.extend(rest.roots()?);
            return Ok(out);
        }
        if deg == 0 {
            return Ok(Vec::new());
        }
        let lead = self.coeffs[deg];
        let monic: Vec<f64> = self.coeffs.iter().map(|c| c / lead).collect();
        let deriv: Vec<f64> = (1..=deg).map(|k| k as f64 * monic[k]).collect();
        // Cauchy bound for the initial circle
        let radius = 1.0 + monic[..deg].iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let mut z: Vec<Complex64> = (0..deg)
            .map(|k| {
                let ang = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / deg as f64 + 0.4;
                Complex64::from_polar(radius * 0.5 + 0.1, ang)
            })
            .collect();
        let horner = |c: &[f64], x: Complex64| {
            c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * x + a)
        };
        for _ in 0..500 {
            let mut max_step = 0.0f64;
            for i in 0..deg {
                let p = horner(&monic, z[i]);
                if p.norm() == 0.0 {
                    continue;
                }
                let dp = horner(&deriv, z[i]);
                let ratio = p / dp;
                let mut sum = Complex64::new(0.0, 0.0);
                for j in 0..deg {
                    if j != i {
                        let d = z[i] - z[j];
                        if d.norm() > 0.0 {
                            sum += d.inv();
                        }
                    }
                }
                let denom = Complex64::new(1.0, 0.0) - ratio * sum;
                let step = if denom.norm() > 0.0 { ratio / denom } else { ratio };
                if step.is_finite() {
                    z[i] -= step;
                    max_step = max_step.max(step.norm() / (1.0 + z[i].norm()));
                }
            }
            if max_step < 1e-15 {
                break;
            }
        }
        if z.iter().any(|r| !r.is_finite()) {
            return Err(Error::Numeric("root iteration diverged".into()));
        }
        Ok(z)
    }
}
