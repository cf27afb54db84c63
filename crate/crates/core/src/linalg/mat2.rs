use std::ops::Mul;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Dense 2×2 matrix `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2<T = f64> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
}

impl<T: Scalar> Mat2<T> {
    pub const fn new(a: T, b: T, c: T, d: T) -> Self {
        Self { a, b, c, d }
    }

    pub fn identity() -> Self {
        Self::new(T::one(), T::zero(), T::zero(), T::one())
    }

    pub fn rotation(phi: T) -> Self {
        // acts on (sin θ, cos θ) as θ ↦ θ + φ
        let (s, c) = phi.sin_cos();
        Self::new(c, s, -s, c)
    }

    pub fn diag(x: T, y: T) -> Self {
        Self::new(x, T::zero(), T::zero(), y)
    }

    pub fn det(&self) -> T {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> T {
        self.a + self.d
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.a, self.c, self.b, self.d)
    }

    pub fn scale(&self, s: T) -> Self {
        Self::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if det == T::zero() || !det.is_finite() {
            return None;
        }
        Some(Self::new(self.d / det, -self.b / det, -self.c / det, self.a / det))
    }

    pub fn apply(&self, v: [T; 2]) -> [T; 2] {
        [self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1]]
    }

    pub fn frobenius(&self) -> T {
        (self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d).sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.a.abs().max(self.b.abs()).max(self.c.abs()).max(self.d.abs())
    }

    /// Singular values `(σ_max, σ_min)`.
    pub fn singular_values(&self) -> (T, T) {
        let f2 = self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d;
        let det = self.det().abs();
        let two = T::lit(2.0);
        // σ₁² + σ₂² = ‖M‖_F², σ₁σ₂ = |det|
        let s = (f2 + two * det).max(T::zero()).sqrt();
        let t = (f2 - two * det).max(T::zero()).sqrt();
        ((s + t) / two, ((s - t) / two).abs())
    }

    /// 2-norm condition number; infinite for singular matrices.
    pub fn cond(&self) -> T {
        let (hi, lo) = self.singular_values();
        if lo == T::zero() {
            T::infinity()
        } else {
            hi / lo
        }
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.d.is_finite()
    }
}

impl<T: Scalar> Mul for Mat2<T> {
    type Output = Self;

    fn mul(self, o: Self) -> Self {
        Self::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}
