//! Multimer transfer matrices.
//!
//! They act in the staggered frame `ũ(k) = (−1)^k u(k)`, where an eigenvector
//! of `Hu(k) = −b_{k+1}u(k+1) − b_k u(k−1) + V(k)u(k)` satisfies
//! `b_{k+1}ũ(k+1) + b_k ũ(k−1) + (V(k) − E)ũ(k) = 0`.

use super::angle::{Provenance, TransferMatrix};
use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::model::{DisorderSample, Family, ModelSpec};

pub(crate) fn require_multimer(model: &ModelSpec) -> Result<usize> {
    if model.family != Family::Multimer {
        return Err(Error::InvalidParameters(format!(
            "transfer matrices need the multimer family, got {}",
            model.family.name()
        )));
    }
    Ok(model.period())
}

/// `P_{n,m}` from `(ũ(k), ũ(k−1))` to `(ũ(k+1), ũ(k))`, `k = Nn + m`:
/// `(1/b_{k+1})·[[E − a_m ω_n, −b_k], [b_{k+1}, 0]]`, determinant `b_k/b_{k+1}`.
pub fn one_step_transfer(
    model: &ModelSpec,
    sample: &DisorderSample,
    energy: f64,
    n: i64,
    m: usize,
) -> Result<TransferMatrix> {
    let period = require_multimer(model)?;
    if m >= period {
        return Err(Error::OutOfRange {
            what: "sub-site",
            detail: format!("m = {m} with period {period}"),
        });
    }
    let k = period as i64 * n + m as i64;
    let (b0, b1) = (model.hopping(k), model.hopping(k + 1));
    let omega = sample.omega(n)?;
    let diag = energy - model.multimer_weights_a[m] * omega;
    Ok(TransferMatrix::new(
        Mat2::new(diag / b1, -b0 / b1, 1.0, 0.0),
        Provenance::OneStep,
    ))
}

/// `T⁰_n = P_{n,N−1} ··· P_{n,0}`.
pub fn n_step_transfer(
    model: &ModelSpec,
    sample: &DisorderSample,
    energy: f64,
    n: i64,
) -> Result<TransferMatrix> {
    let period = require_multimer(model)?;
    let mut acc = Mat2::identity();
    for m in 0..period {
        acc = one_step_transfer(model, sample, energy, n, m)?.entries * acc;
    }
    Ok(TransferMatrix::new(acc, Provenance::NStep))
}

/// Product of `T⁰_n` over `cells` in increasing order.
pub fn chain_transfer(
    model: &ModelSpec,
    sample: &DisorderSample,
    energy: f64,
    cells: std::ops::Range<i64>,
) -> Result<TransferMatrix> {
    let mut acc = Mat2::identity();
    for n in cells {
        acc = n_step_transfer(model, sample, energy, n)?.entries * acc;
    }
    Ok(TransferMatrix::new(acc, Provenance::Composite))
}
