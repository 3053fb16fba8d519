//! Comparators for the ensemble estimate: the Tikhonov-Phillips solution of a
//! linear problem, least squares restricted to a subspace, and the best
//! approximation of the truth within that subspace.

mod least_squares;

pub use least_squares::{subspace_ls, LsOutcome, LsSettings, Regularization};

use crate::error::{Error, Result};
use crate::field::{Field, GaussianMeasure, Subspace, WeightedNorm};
use crate::forward::ForwardModel;
use crate::numerics::{gemm, spd_solve, DenseMatrix, Op};

/// `ū + C Gᵀ (G C Gᵀ + Γ)⁻¹ (y − G ū)` for a linear model.
pub fn tikhonov_linear(
    model: &dyn ForwardModel,
    prior: &GaussianMeasure,
    y: &[f64],
    noise: &WeightedNorm,
) -> Result<Field> {
    let g = model
        .linear_operator()
        .ok_or_else(|| Error::NotLinearModel(model.name().to_string()))?;
    let mean = prior.mean();
    if *mean.basis() != model.input_basis() {
        return Err(Error::BasisMismatch {
            expected: model.input_basis().to_string(),
            found: mean.basis().to_string(),
        });
    }
    if y.len() != g.rows() {
        return Err(Error::DimensionMismatch(format!(
            "data of length {} for an operator with {} rows",
            y.len(),
            g.rows()
        )));
    }
    let c = prior.coefficient_covariance();
    let cgt = gemm(1.0, &c, Op::N, &g, Op::T)?;
    let mut s = g.matmul(&cgt)?;
    s.symmetrize();
    s.add_to_diagonal(&noise.variances(y.len())?);
    let gm = g.mul_vec(mean.coeffs())?;
    let innovation: Vec<f64> = y.iter().zip(&gm).map(|(a, b)| a - b).collect();
    let w = spd_solve(&s, &DenseMatrix::from_columns(&[&innovation])?)?;
    let correction = cgt.mul_vec(&w.column(0))?;
    let coeffs = mean.coeffs().iter().zip(&correction).map(|(a, b)| a + b).collect();
    Field::new(*mean.basis(), coeffs)
}

/// L² projection of `truth` onto the span of `a`.
pub fn best_approximation(a: &Subspace, truth: &Field) -> Result<Field> {
    a.combine(&a.project(truth)?.coeffs)
}
