//! Operator families, disorder and finite-box restrictions.
//!
//! Every family is realised on a box anchored at the origin:
//!
//! * discrete families on the sites `0..L`, with
//!   `(Hu)(n) = −b_{n+1}u(n+1) − b_n u(n−1) + V(n)u(n)` and `b ≡ 1` unless the
//!   family is a multimer;
//! * continuum families on `[0, L]` with Dirichlet ends, discretised by central
//!   differences on a grid of step `h`.
//!
//! The potential is always affine in the disorder, `V = Σ_n ω_n w_n`, and the
//! box operator keeps the weights `w_n` per node so eigenvalue gradients are
//! exact quadratic forms of the eigenvector.

mod disorder;
mod operator;
mod profile;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use disorder::{sample_disorder, DisorderSample};
pub use operator::{build_box_operator, evaluate_potential, BoxOperator};
pub(crate) use operator::single_site_value;
pub use profile::{SingleSiteProfile, MIN_SAMPLES_PER_UNIT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// `V(x) = ω_n` on `[n, n+1)`.
    SimpleContinuum,
    /// `V(x) = Σ ω_n q(x − n)`.
    ContinuumAlloy,
    /// `V(m) = Σ_k d_k ω_{m−k}`.
    DiscreteAlloy,
    /// `V(Nj + m) = a_m ω_j` with hopping `b`.
    Multimer,
}

impl Family {
    pub fn is_continuum(self) -> bool {
        matches!(self, Family::SimpleContinuum | Family::ContinuumAlloy)
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::SimpleContinuum => "simple_continuum",
            Family::ContinuumAlloy => "continuum_alloy",
            Family::DiscreteAlloy => "discrete_alloy",
            Family::Multimer => "multimer",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [
            Family::SimpleContinuum,
            Family::ContinuumAlloy,
            Family::DiscreteAlloy,
            Family::Multimer,
        ]
        .into_iter()
        .find(|f| f.name() == s)
    }
}

/// Common density of the i.i.d. disorder variables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Density {
    /// Uniform on `[0, 1]`.
    Uniform01,
    /// Uniform on `[-M, M]`.
    UniformSymmetric { bound: f64 },
}

impl Density {
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Density::Uniform01 => (0.0, 1.0),
            Density::UniformSymmetric { bound } => (-bound, bound),
        }
    }

    /// `M` with `|ω| ≤ M` almost surely.
    pub fn bound(&self) -> f64 {
        let (lo, hi) = self.support();
        lo.abs().max(hi.abs())
    }

    pub fn mean(&self) -> f64 {
        let (lo, hi) = self.support();
        0.5 * (lo + hi)
    }
}

/// Box size: number of sites (discrete) or length (continuum).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BoxSize {
    Sites(usize),
    Length(f64),
}

impl BoxSize {
    /// |Λ| as used for densities of states.
    pub fn volume(&self) -> f64 {
        match *self {
            BoxSize::Sites(n) => n as f64,
            BoxSize::Length(l) => l,
        }
    }
}

/// Deterministic description of an operator family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: Family,
    /// ContinuumAlloy only.
    pub single_site_q: Option<SingleSiteProfile>,
    pub support_radius_n: usize,
    /// Multimer only, length N.
    pub multimer_weights_a: Vec<f64>,
    /// Multimer only; extended periodically, `b_k = hopping_b[k mod len]`.
    pub hopping_b: Vec<f64>,
    /// DiscreteAlloy only; `d_k` for `k = 0..len`.
    pub discrete_site_profile_d: Vec<f64>,
    pub disorder_density: Density,
    /// Continuum families only.
    pub grid_step_h: f64,
}

pub const DEFAULT_GRID_STEP: f64 = 0.01;

impl ModelSpec {
    /// Anderson model `−Δ + c·ω` with `ω ~ U[0,1]`.
    pub fn anderson(coupling: f64) -> Self {
        Self::discrete_alloy(vec![coupling], Density::Uniform01)
    }

    pub fn discrete_alloy(d: Vec<f64>, density: Density) -> Self {
        Self {
            family: Family::DiscreteAlloy,
            single_site_q: None,
            support_radius_n: d.len().saturating_sub(1).max(1),
            multimer_weights_a: Vec::new(),
            hopping_b: Vec::new(),
            discrete_site_profile_d: d,
            disorder_density: density,
            grid_step_h: DEFAULT_GRID_STEP,
        }
    }

    pub fn multimer(a: Vec<f64>, b: Vec<f64>, density: Density) -> Self {
        Self {
            family: Family::Multimer,
            single_site_q: None,
            support_radius_n: a.len(),
            multimer_weights_a: a,
            hopping_b: b,
            discrete_site_profile_d: Vec::new(),
            disorder_density: density,
            grid_step_h: DEFAULT_GRID_STEP,
        }
    }

    pub fn simple_continuum(h: f64) -> Self {
        Self {
            family: Family::SimpleContinuum,
            single_site_q: None,
            support_radius_n: 1,
            multimer_weights_a: Vec::new(),
            hopping_b: Vec::new(),
            discrete_site_profile_d: Vec::new(),
            disorder_density: Density::Uniform01,
            grid_step_h: h,
        }
    }

    pub fn continuum_alloy(q: SingleSiteProfile, h: f64) -> Self {
        Self {
            family: Family::ContinuumAlloy,
            support_radius_n: q.radius(),
            single_site_q: Some(q),
            multimer_weights_a: Vec::new(),
            hopping_b: Vec::new(),
            discrete_site_profile_d: Vec::new(),
            disorder_density: Density::Uniform01,
            grid_step_h: h,
        }
    }

    pub fn with_density(mut self, density: Density) -> Self {
        self.disorder_density = density;
        self
    }

    /// Every violated invariant as `(field, message)`; empty when valid.
    pub fn violations(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        if self.support_radius_n == 0 {
            out.push(("support_radius_N", "must be a positive integer".into()));
        }
        match self.disorder_density {
            Density::Uniform01 => {}
            Density::UniformSymmetric { bound } => {
                if !(bound.is_finite() && bound > 0.0) {
                    out.push(("disorder_density", format!("bound M must be positive, got {bound}")));
                }
            }
        }
        if self.family.is_continuum() && !(self.grid_step_h.is_finite() && self.grid_step_h > 0.0) {
            out.push(("grid_step_h", format!("must be positive, got {}", self.grid_step_h)));
        }
        match self.family {
            Family::SimpleContinuum => {}
            Family::ContinuumAlloy => match &self.single_site_q {
                None => out.push(("single_site_q", "required for the continuum alloy".into())),
                Some(q) => {
                    if q.radius() != self.support_radius_n {
                        out.push((
                            "single_site_q",
                            format!(
                                "table radius {} differs from support_radius_N {}",
                                q.radius(),
                                self.support_radius_n
                            ),
                        ));
                    }
                    if q.eta() <= 0.0 {
                        out.push(("single_site_q", "covering condition fails".into()));
                    }
                }
            },
            Family::DiscreteAlloy => {
                let d = &self.discrete_site_profile_d;
                if d.is_empty() || d.iter().all(|&x| x == 0.0) {
                    out.push(("discrete_site_profile_d", "must not be identically zero".into()));
                } else if d.iter().any(|x| !x.is_finite()) {
                    out.push(("discrete_site_profile_d", "entries must be finite".into()));
                } else if d.iter().any(|&x| x > 0.0) && d.iter().any(|&x| x < 0.0) {
                    out.push(("discrete_site_profile_d", "entries must share one sign".into()));
                }
            }
            Family::Multimer => {
                let a = &self.multimer_weights_a;
                if a.len() < 2 {
                    out.push(("multimer_weights_a", "period N must be at least 2".into()));
                }
                if a.iter().any(|&x| !(x.is_finite() && x > 0.0)) {
                    out.push(("multimer_weights_a", "all weights must be strictly positive".into()));
                }
                let b = &self.hopping_b;
                if b.is_empty() {
                    out.push(("hopping_b", "must be nonempty".into()));
                } else if b.iter().any(|&x| !(x.is_finite() && x != 0.0)) {
                    out.push(("hopping_b", "all hoppings must be nonzero".into()));
                }
                if !a.is_empty() && a.len() != self.support_radius_n {
                    out.push((
                        "support_radius_N",
                        format!("must equal the multimer period {}", a.len()),
                    ));
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        match self.violations().into_iter().next() {
            None => Ok(()),
            Some((key, msg)) => Err(Error::config(key, msg)),
        }
    }

    /// Period N of a multimer.
    pub fn period(&self) -> usize {
        self.multimer_weights_a.len()
    }

    /// Hopping `b_k`; identically 1 outside the multimer family.
    pub fn hopping(&self, k: i64) -> f64 {
        if self.family != Family::Multimer || self.hopping_b.is_empty() {
            return 1.0;
        }
        let n = self.hopping_b.len() as i64;
        self.hopping_b[k.rem_euclid(n) as usize]
    }

    /// Inclusive range of disorder indices needed for a box.
    pub fn disorder_range(&self, size: BoxSize) -> Result<(i64, i64)> {
        let r = self.support_radius_n as i64;
        match (self.family, size) {
            (Family::SimpleContinuum, BoxSize::Length(l)) if l > 0.0 => Ok((-1, l.ceil() as i64)),
            (Family::ContinuumAlloy, BoxSize::Length(l)) if l > 0.0 => {
                Ok((-r, l.ceil() as i64 + r))
            }
            (Family::DiscreteAlloy, BoxSize::Sites(n)) if n > 0 => {
                let r = r.max(self.discrete_site_profile_d.len() as i64 - 1);
                Ok((-r, n as i64 - 1 + r))
            }
            (Family::Multimer, BoxSize::Sites(n)) if n > 0 => {
                let p = self.period().max(1);
                Ok((-1, n.div_ceil(p) as i64))
            }
            (_, BoxSize::Sites(0)) => Err(Error::InvalidParameters("empty box".into())),
            (_, BoxSize::Length(l)) if !(l > 0.0) => {
                Err(Error::InvalidParameters(format!("box length must be positive, got {l}")))
            }
            (fam, size) => Err(Error::InvalidParameters(format!(
                "box {size:?} does not fit family {}",
                fam.name()
            ))),
        }
    }
}
