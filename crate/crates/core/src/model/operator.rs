use super::{BoxSize, DisorderSample, Family, ModelSpec};
use crate::error::{Error, Result};
use crate::linalg::Tridiagonal;

/// Sub-samples per dual cell when averaging `q` onto a grid node.
const CELL_SUBSAMPLES: usize = 8;

/// Dirichlet restriction of a model to a finite box, as a symmetric
/// tridiagonal matrix together with the affine dependence of its diagonal on
/// the disorder: `diag_i = kinetic + Σ_{(n, w) ∈ weights_i} w·ω_n`.
#[derive(Debug, Clone)]
pub struct BoxOperator {
    size: BoxSize,
    model: ModelSpec,
    sample: DisorderSample,
    matrix: Tridiagonal<f64>,
    kinetic: f64,
    positions: Vec<f64>,
    weights: Vec<Vec<(i64, f64)>>,
}

impl BoxOperator {
    pub fn matrix(&self) -> &Tridiagonal<f64> {
        &self.matrix
    }

    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    pub fn sample(&self) -> &DisorderSample {
        &self.sample
    }

    pub fn size(&self) -> BoxSize {
        self.size
    }

    pub fn family(&self) -> Family {
        self.model.family
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// |Λ|: number of sites or box length.
    pub fn volume(&self) -> f64 {
        self.size.volume()
    }

    /// Grid step for continuum boxes, 1 for lattices.
    pub fn spacing(&self) -> f64 {
        if self.model.family.is_continuum() {
            self.model.grid_step_h
        } else {
            1.0
        }
    }

    /// Lattice site or grid coordinate of matrix row `i`.
    pub fn position(&self, i: usize) -> f64 {
        self.positions[i]
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    /// Matrix row of a lattice site (discrete families).
    pub fn index_of_site(&self, site: i64) -> Option<usize> {
        if self.model.family.is_continuum() || site < 0 || site as usize >= self.dim() {
            None
        } else {
            Some(site as usize)
        }
    }

    /// `(n, ∂diag_i/∂ω_n)` pairs for row `i`.
    pub fn node_weights(&self, i: usize) -> &[(i64, f64)] {
        &self.weights[i]
    }

    /// Potential value on row `i` (diagonal minus the kinetic part).
    pub fn potential_at(&self, i: usize) -> f64 {
        self.matrix.diag()[i] - self.kinetic
    }

    /// Same box and model with another disorder sample.
    pub fn with_sample(&self, sample: DisorderSample) -> Result<Self> {
        let diag = assemble_diag(self.kinetic, &self.weights, &sample)?;
        let matrix = Tridiagonal::new(diag, self.matrix.off().to_vec())?;
        Ok(Self {
            sample,
            matrix,
            ..self.clone()
        })
    }

    /// Disorder indices that influence the box.
    pub fn active_sites(&self) -> Vec<i64> {
        let mut v: Vec<i64> = self
            .weights
            .iter()
            .flat_map(|w| w.iter().filter(|p| p.1 != 0.0).map(|p| p.0))
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

fn assemble_diag(kinetic: f64, weights: &[Vec<(i64, f64)>], sample: &DisorderSample) -> Result<Vec<f64>> {
    weights
        .iter()
        .map(|ws| {
            ws.iter().try_fold(kinetic, |acc, &(n, w)| {
                sample.omega(n).map(|o| acc + w * o).map_err(|_| coverage_error(n, sample))
            })
        })
        .collect()
}

fn coverage_error(n: i64, sample: &DisorderSample) -> Error {
    Error::OutOfRange {
        what: "box coverage",
        detail: format!(
            "disorder index {n} needed but sample covers [{}, {}]",
            sample.first_index(),
            sample.last_index()
        ),
    }
}

/// Number of grid cells for a continuum box; `L/h` must be an integer.
fn grid_cells(length: f64, h: f64) -> Result<usize> {
    let cells = (length / h).round();
    if (cells * h - length).abs() > 1e-9 * length.max(1.0) || cells < 2.0 {
        return Err(Error::InvalidParameters(format!(
            "box length {length} is not a multiple (≥ 2) of grid step {h}"
        )));
    }
    Ok(cells as usize)
}

pub(crate) fn single_site_value(model: &ModelSpec, y: f64) -> f64 {
    match model.family {
        Family::SimpleContinuum => {
            if (0.0..1.0).contains(&y) {
                1.0
            } else {
                0.0
            }
        }
        Family::ContinuumAlloy => model.single_site_q.as_ref().map_or(0.0, |q| q.eval(y)),
        _ => 0.0,
    }
}

/// Mean of `q(· − n)` over the dual cell of node `x`, for every `n` it meets.
fn continuum_weights(model: &ModelSpec, x: f64, h: f64) -> Vec<(i64, f64)> {
    let r = match model.family {
        Family::SimpleContinuum => 1.0,
        _ => model.support_radius_n as f64,
    };
    let lo = (x - 0.5 * h - r).floor() as i64;
    let hi = (x + 0.5 * h + r).ceil() as i64;
    let mut out = Vec::new();
    for n in lo..=hi {
        let mut acc = 0.0;
        for k in 0..CELL_SUBSAMPLES {
            let s = x + h * (-0.5 + (k as f64 + 0.5) / CELL_SUBSAMPLES as f64);
            acc += single_site_value(model, s - n as f64);
        }
        if acc != 0.0 {
            out.push((n, acc / CELL_SUBSAMPLES as f64));
        }
    }
    out
}

fn discrete_weights(model: &ModelSpec, m: i64) -> Vec<(i64, f64)> {
    match model.family {
        Family::DiscreteAlloy => model
            .discrete_site_profile_d
            .iter()
            .enumerate()
            .filter(|(_, &d)| d != 0.0)
            .map(|(k, &d)| (m - k as i64, d))
            .collect(),
        Family::Multimer => {
            let p = model.period() as i64;
            vec![(m.div_euclid(p), model.multimer_weights_a[m.rem_euclid(p) as usize])]
        }
        _ => Vec::new(),
    }
}

/// Restriction of the model to the box described by `size`.
pub fn build_box_operator(model: &ModelSpec, sample: &DisorderSample, size: BoxSize) -> Result<BoxOperator> {
    model.validate()?;
    let (kinetic, positions, weights, off) = match (model.family.is_continuum(), size) {
        (true, BoxSize::Length(length)) => {
            let h = model.grid_step_h;
            let cells = grid_cells(length, h)?;
            let positions: Vec<f64> = (1..cells).map(|i| i as f64 * h).collect();
            let weights: Vec<Vec<(i64, f64)>> = positions.iter().map(|&x| continuum_weights(model, x, h)).collect();
            let off = vec![-1.0 / (h * h); positions.len() - 1];
            (2.0 / (h * h), positions, weights, off)
        }
        (false, BoxSize::Sites(n)) if n > 0 => {
            let positions: Vec<f64> = (0..n).map(|i| i as f64).collect();
            let weights: Vec<Vec<(i64, f64)>> = (0..n as i64).map(|m| discrete_weights(model, m)).collect();
            // row i couples to i+1 through b_{i+1}
            let off = (1..n as i64).map(|k| -model.hopping(k)).collect();
            (0.0, positions, weights, off)
        }
        _ => {
            return Err(Error::InvalidParameters(format!(
                "box {size:?} does not fit family {}",
                model.family.name()
            )))
        }
    };
    let diag = assemble_diag(kinetic, &weights, sample)?;
    let matrix = Tridiagonal::new(diag, off)?;
    Ok(BoxOperator {
        size,
        model: model.clone(),
        sample: sample.clone(),
        matrix,
        kinetic,
        positions,
        weights,
    })
}

/// `V_ω(x)`. Discrete families require an integer `x`.
pub fn evaluate_potential(model: &ModelSpec, sample: &DisorderSample, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::OutOfRange {
            what: "position",
            detail: format!("{x}"),
        });
    }
    let get = |n: i64| sample.omega(n).map_err(|_| coverage_error(n, sample));
    match model.family {
        Family::SimpleContinuum => get(x.floor() as i64),
        Family::ContinuumAlloy => {
            let r = model.support_radius_n as f64;
            let mut acc = 0.0;
            for n in (x - r).ceil() as i64..=(x + r).floor() as i64 {
                let q = single_site_value(model, x - n as f64);
                if q != 0.0 {
                    acc += q * get(n)?;
                }
            }
            Ok(acc)
        }
        Family::DiscreteAlloy | Family::Multimer => {
            let m = x.round();
            if (x - m).abs() > 1e-9 {
                return Err(Error::OutOfRange {
                    what: "lattice position",
                    detail: format!("{x} is not an integer site"),
                });
            }
            discrete_weights(model, m as i64)
                .into_iter()
                .try_fold(0.0, |acc, (n, w)| Ok(acc + w * get(n)?))
        }
    }
}
