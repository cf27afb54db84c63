use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quadrature {
    /// Composite trapezoid on a uniform grid.
    Trapezoid,
    /// Composite Simpson; needs an even number of cells.
    Simpson,
    /// Plain sum over lattice sites.
    Counting,
}

/// Nonnegative symmetric bilinear form `⟨f, g⟩ = ∫ f g q` (or `Σ a_m f g`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QForm {
    weights: Vec<f64>,
    origin: f64,
    step: f64,
    rule: Quadrature,
}

impl QForm {
    /// `⟨f, g⟩_a = Σ_m a_m f(m) g(m)` on sites `0..len`.
    pub fn discrete(a: Vec<f64>) -> Result<Self> {
        Self::checked(a, 0.0, 1.0, Quadrature::Counting)
    }

    /// `q` on `[−radius, radius]` with nodes `step` apart, Simpson when the
    /// cell count is even and trapezoid otherwise.
    ///
    /// At a jump of `q` the node value is the mean of the one-sided limits.
    /// Jumps on even nodes then split exactly between neighbouring panels.
    pub fn continuum(q: impl Fn(f64) -> f64, radius: f64, step: f64) -> Result<Self> {
        let cells = (2.0 * radius / step).round() as usize;
        let rule = if cells.is_multiple_of(2) { Quadrature::Simpson } else { Quadrature::Trapezoid };
        Self::continuum_with(q, radius, step, rule)
    }

    pub fn continuum_with(q: impl Fn(f64) -> f64, radius: f64, step: f64, rule: Quadrature) -> Result<Self> {
        let cells = (2.0 * radius / step).round();
        if !(radius > 0.0 && step > 0.0) || (cells * step - 2.0 * radius).abs() > 1e-9 * radius {
            return Err(Error::InvalidParameters(format!(
                "step {step} must divide the support [-{radius}, {radius}]"
            )));
        }
        let delta = 1e-9 * step;
        let weights = (0..=cells as usize)
            .map(|i| {
                let x = -radius + i as f64 * step;
                0.5 * (q(x - delta) + q(x + delta))
            })
            .collect();
        Self::checked(weights, -radius, step, rule)
    }

    pub fn from_samples(weights: Vec<f64>, origin: f64, step: f64) -> Result<Self> {
        Self::checked(weights, origin, step, Quadrature::Trapezoid)
    }

    fn checked(weights: Vec<f64>, origin: f64, step: f64, rule: Quadrature) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Shape("empty weight".into()));
        }
        if rule == Quadrature::Simpson && weights.len().is_multiple_of(2) {
            return Err(Error::InvalidParameters("Simpson rule needs an even number of cells".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
            return Err(Error::InvalidParameters(format!("weight {w} is negative or not finite")));
        }
        Ok(Self { weights, origin, step, rule })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn rule(&self) -> Quadrature {
        self.rule
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Sample positions of the support grid.
    pub fn grid(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.origin + i as f64 * self.step).collect()
    }

    pub fn inner(&self, f: &[f64], g: &[f64]) -> Result<f64> {
        let n = self.len();
        if f.len() != n || g.len() != n {
            return Err(Error::Shape(format!(
                "form has {n} nodes, arguments have {} and {}",
                f.len(),
                g.len()
            )));
        }
        let body = || -> f64 { (0..n).map(|i| self.weights[i] * (f[i] * g[i])).sum() };
        Ok(match self.rule {
            Quadrature::Counting => body(),
            Quadrature::Trapezoid | Quadrature::Simpson if n == 1 => 0.0,
            Quadrature::Trapezoid => {
                let ends = self.weights[0] * (f[0] * g[0]) + self.weights[n - 1] * (f[n - 1] * g[n - 1]);
                self.step * (body() - 0.5 * ends)
            }
            Quadrature::Simpson => {
                let s: f64 = (0..n)
                    .map(|i| {
                        let c = if i == 0 || i == n - 1 { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                        c * (self.weights[i] * (f[i] * g[i]))
                    })
                    .sum();
                self.step / 3.0 * s
            }
        })
    }

    /// Seminorm `‖f‖_q`.
    pub fn norm(&self, f: &[f64]) -> Result<f64> {
        Ok(self.inner(f, f)?.max(0.0).sqrt())
    }
}

pub fn q_inner(form: &QForm, f: &[f64], g: &[f64]) -> Result<f64> {
    form.inner(f, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn indicator(x: f64) -> f64 {
        if x.abs() <= 0.5 { 1.0 } else { 0.0 }
    }

    #[test]
    fn indicator_mass() {
        let q = QForm::continuum(indicator, 1.0, 1.0 / 64.0).unwrap();
        let one = vec![1.0; q.len()];
        assert_abs_diff_eq!(q_inner(&q, &one, &one).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn simpson_is_fourth_order() {
        let at = |per_unit: f64| {
            let form = QForm::continuum(|x: f64| 1.0 + x * x, 1.0, 1.0 / per_unit).unwrap();
            assert_eq!(form.rule(), Quadrature::Simpson);
            let f: Vec<f64> = form.grid().iter().map(|x| x.exp()).collect();
            form.inner(&f, &f).unwrap()
        };
        // ∫_{-1}^{1} (1+x²) e^{2x} dx
        let exact = ((2f64).exp() * 3.0 - (-2f64).exp() * 7.0) / 4.0;
        let (e16, e32) = ((at(16.0) - exact).abs(), (at(32.0) - exact).abs());
        assert!(e16 / e32 > 14.0 && e32 < 1e-5, "{e16} {e32}");
    }

    #[test]
    fn parity() {
        let q = QForm::continuum(|x: f64| 1.0 + x * x, 1.0, 0.01).unwrap();
        let s: Vec<f64> = q.grid().iter().map(|x| x.sin()).collect();
        let c: Vec<f64> = q.grid().iter().map(|x| x.cos()).collect();
        assert!(q.inner(&s, &c).unwrap().abs() < 1e-14);
    }

    #[test]
    fn counting_form() {
        let a = QForm::discrete(vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(a.inner(&[1.0, 1.0, 2.0], &[1.0, -1.0, 1.0]).unwrap(), 1.0 - 2.0 + 6.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(QForm::discrete(vec![1.0, -1.0]).is_err());
        assert!(QForm::continuum(indicator, 1.0, 0.3).is_err());
        let q = QForm::discrete(vec![1.0; 3]).unwrap();
        assert!(matches!(q.inner(&[1.0; 2], &[1.0; 3]), Err(Error::Shape(_))));
    }

    #[test]
    fn refinement_is_second_order() {
        let q = |x: f64| 1.0 + 0.5 * (3.0 * x).cos();
        let f = |x: f64| (2.0 * x).exp() - x;
        let g = |x: f64| (5.0 * x).sin() + 1.0;
        let at = |per_unit: f64| {
            let form = QForm::continuum_with(q, 1.0, 1.0 / per_unit, Quadrature::Trapezoid).unwrap();
            let xs = form.grid();
            let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
            let gs: Vec<f64> = xs.iter().map(|&x| g(x)).collect();
            form.inner(&fs, &gs).unwrap()
        };
        let (c64, c128, c256) = (at(64.0), at(128.0), at(256.0));
        let ratio = (c64 - c128) / (c128 - c256);
        assert!((ratio - 4.0).abs() < 0.05, "ratio {ratio}");
    }

    proptest! {
        #[test]
        fn bilinear_symmetric_nonnegative(
            w in prop::collection::vec(0.0..2.0f64, 9),
            f in prop::collection::vec(-1.0..1.0f64, 9),
            g in prop::collection::vec(-1.0..1.0f64, 9),
            h in prop::collection::vec(-1.0..1.0f64, 9),
            s in -3.0..3.0f64,
        ) {
            let q = QForm::from_samples(w, -1.0, 0.25).unwrap();
            let lin: Vec<f64> = f.iter().zip(&g).map(|(a, b)| a + s * b).collect();
            let lhs = q.inner(&lin, &h).unwrap();
            let rhs = q.inner(&f, &h).unwrap() + s * q.inner(&g, &h).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-12);
            prop_assert_eq!(q.inner(&f, &g).unwrap(), q.inner(&g, &f).unwrap());
            prop_assert!(q.inner(&f, &f).unwrap() >= 0.0);
        }
    }
}
