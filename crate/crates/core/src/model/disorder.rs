use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{BoxSize, Density, ModelSpec};
use crate::error::{Error, Result};

/// One disorder realization `ω_n`, `n ∈ [first, first + len)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderSample {
    first: i64,
    omegas: Vec<f64>,
    seed: u64,
    bound_m: f64,
}

impl DisorderSample {
    /// A sample with explicit values (seed recorded as given).
    pub fn from_values(first: i64, omegas: Vec<f64>, seed: u64, bound_m: f64) -> Result<Self> {
        if let Some(w) = omegas.iter().find(|w| !(w.abs() <= bound_m)) {
            return Err(Error::OutOfRange {
                what: "disorder value",
                detail: format!("{w} exceeds bound {bound_m}"),
            });
        }
        Ok(Self {
            first,
            omegas,
            seed,
            bound_m,
        })
    }

    pub fn draw(density: Density, first: i64, last: i64, seed: u64) -> Self {
        let (lo, hi) = density.support();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let omegas = (first..=last)
            .map(|_| lo + (hi - lo) * rng.random::<f64>())
            .collect();
        Self {
            first,
            omegas,
            seed,
            bound_m: density.bound(),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn bound(&self) -> f64 {
        self.bound_m
    }

    pub fn first_index(&self) -> i64 {
        self.first
    }

    pub fn last_index(&self) -> i64 {
        self.first + self.omegas.len() as i64 - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.omegas
    }

    pub fn contains(&self, n: i64) -> bool {
        n >= self.first && n <= self.last_index()
    }

    pub fn omega(&self, n: i64) -> Result<f64> {
        if !self.contains(n) {
            return Err(Error::OutOfRange {
                what: "disorder index",
                detail: format!("{n} outside [{}, {}]", self.first, self.last_index()),
            });
        }
        Ok(self.omegas[(n - self.first) as usize])
    }

    /// Copy with `ω_n` shifted by `delta`; the bound widens if needed.
    pub fn perturbed(&self, n: i64, delta: f64) -> Result<Self> {
        self.omega(n)?;
        let mut out = self.clone();
        let w = &mut out.omegas[(n - self.first) as usize];
        *w += delta;
        out.bound_m = out.bound_m.max(w.abs());
        Ok(out)
    }

    /// Copy with `ω_n` replaced.
    pub fn with_value(&self, n: i64, value: f64) -> Result<Self> {
        let cur = self.omega(n)?;
        self.perturbed(n, value - cur)
    }
}

/// Draws one `ω` per disorder index the box needs (box plus margin), in index
/// order, from a ChaCha8 stream seeded with `seed`.
pub fn sample_disorder(model: &ModelSpec, size: BoxSize, seed: u64) -> Result<DisorderSample> {
    model.validate()?;
    let (first, last) = model.disorder_range(size)?;
    Ok(DisorderSample::draw(model.disorder_density, first, last, seed))
}
