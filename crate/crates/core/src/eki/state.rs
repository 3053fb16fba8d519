use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{Basis, Field, Subspace, WeightedNorm};
use crate::forward::{forward_response, ForwardModel};
use crate::numerics::{gemm, Cholesky, DenseMatrix, Op, RandomStream};

/// Ensemble of pairs `(u⁽ʲ⁾, p⁽ʲ⁾)`: parameter coefficients and predicted data.
///
/// Row `j` of `u` and `p` belongs to member `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct EkiState {
    basis: Basis,
    u: DenseMatrix,
    p: DenseMatrix,
    iteration: usize,
}

/// Means and cross-covariances of the ensemble, normalized by `1/J`.
#[derive(Debug, Clone)]
pub struct EnsembleStats {
    pub mean_u: Field,
    pub mean_p: Vec<f64>,
    /// `dim × κ`.
    pub c_up: DenseMatrix,
    /// `κ × κ`, symmetric.
    pub c_pp: DenseMatrix,
}

impl EkiState {
    /// Initial ensemble from the members of `a`, each paired with its forward
    /// response.
    pub fn init(a: &Subspace, model: &dyn ForwardModel) -> Result<Self> {
        Self::from_fields(a.members(), model)
    }

    /// Same as [`EkiState::init`] for a plain list of fields.
    pub fn from_fields(fields: &[Field], model: &dyn ForwardModel) -> Result<Self> {
        let predictions = fields
            .par_iter()
            .map(|f| forward_response(model, f))
            .collect::<Result<Vec<_>>>()?;
        Self::from_blocks(fields, &predictions)
    }

    /// Ensemble with explicitly given predictions.
    pub fn from_blocks(fields: &[Field], predictions: &[Vec<f64>]) -> Result<Self> {
        let first = fields.first().ok_or(Error::EnsembleTooSmall(0))?;
        if predictions.len() != fields.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} members but {} predictions",
                fields.len(),
                predictions.len()
            )));
        }
        for f in &fields[1..] {
            first.ensure_same_basis(f)?;
        }
        let u = DenseMatrix::from_rows(&fields.iter().map(|f| f.coeffs().to_vec()).collect::<Vec<_>>())?;
        let p = DenseMatrix::from_rows(predictions)?;
        Ok(Self {
            basis: *first.basis(),
            u,
            p,
            iteration: 0,
        })
    }

    pub fn ensemble_size(&self) -> usize {
        self.u.rows()
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn data_len(&self) -> usize {
        self.p.cols()
    }

    pub fn member(&self, j: usize) -> Field {
        Field::new(self.basis, self.u.row(j).to_vec()).expect("ensemble rows match the basis")
    }

    pub fn members(&self) -> Vec<Field> {
        (0..self.ensemble_size()).map(|j| self.member(j)).collect()
    }

    pub fn prediction(&self, j: usize) -> &[f64] {
        self.p.row(j)
    }

    /// Replaces every prediction by the forward response of its member.
    pub fn predict(&mut self, model: &dyn ForwardModel) -> Result<()> {
        let predictions = (0..self.ensemble_size())
            .into_par_iter()
            .map(|j| forward_response(model, &self.member(j)))
            .collect::<Result<Vec<_>>>()?;
        self.p = DenseMatrix::from_rows(&predictions)?;
        Ok(())
    }

    /// Member mean `(1/J) Σ u⁽ʲ⁾`.
    pub fn estimate(&self) -> Field {
        Field::new(self.basis, column_means(&self.u)).expect("ensemble rows match the basis")
    }

    pub fn stats(&self) -> Result<EnsembleStats> {
        let j = self.ensemble_size();
        if j < 2 {
            return Err(Error::EnsembleTooSmall(j));
        }
        let mean_p = column_means(&self.p);
        let dev = self.p_deviations(&mean_p);
        let inv = 1.0 / j as f64;
        let c_up = gemm(inv, &self.u, Op::T, &dev, Op::N)?;
        let mut c_pp = gemm(inv, &self.p, Op::T, &dev, Op::N)?;
        c_pp.symmetrize();
        Ok(EnsembleStats {
            mean_u: self.estimate(),
            mean_p,
            c_up,
            c_pp,
        })
    }

    fn p_deviations(&self, mean_p: &[f64]) -> DenseMatrix {
        let mut dev = self.p.clone();
        for j in 0..dev.rows() {
            for (v, m) in dev.row_mut(j).iter_mut().zip(mean_p) {
                *v -= m;
            }
        }
        dev
    }

    /// Kalman innovations `d⁽ʲ⁾ = (C^pp + Γ)⁻¹(y + η⁽ʲ⁾ − p⁽ʲ⁾)`, one per row.
    fn innovations(
        &self,
        stats: &EnsembleStats,
        y: &[f64],
        noise: &WeightedNorm,
        stream: &RandomStream,
        perturb: bool,
    ) -> Result<DenseMatrix> {
        let kappa = self.data_len();
        if y.len() != kappa {
            return Err(Error::DimensionMismatch(format!(
                "data of length {} for predictions of length {kappa}",
                y.len()
            )));
        }
        let mut gain = stats.c_pp.clone();
        gain.add_to_diagonal(&noise.variances(kappa)?);
        let chol = Cholesky::factor(&gain)?;
        let jsize = self.ensemble_size();
        let mut rhs = DenseMatrix::zeros(kappa, jsize);
        for j in 0..jsize {
            let eta = if perturb {
                let s = stream.with_member(j as u64).with_iteration(self.iteration as u64);
                noise.sample(&s, kappa)?
            } else {
                vec![0.0; kappa]
            };
            let p = self.p.row(j);
            for i in 0..kappa {
                rhs[(i, j)] = y[i] + eta[i] - p[i];
            }
        }
        Ok(chol.solve(&rhs)?.transpose())
    }

    /// One analysis step: `u⁽ʲ⁾ += C^up d⁽ʲ⁾`, `p⁽ʲ⁾ += C^pp d⁽ʲ⁾`.
    ///
    /// With `perturb` each member sees its own noisy copy of `y`, drawn from
    /// `stream` keyed by member and iteration.
    pub fn analyze(
        &mut self,
        y: &[f64],
        noise: &WeightedNorm,
        stream: &RandomStream,
        perturb: bool,
    ) -> Result<()> {
        let stats = self.stats()?;
        let d = self.innovations(&stats, y, noise, stream, perturb)?;
        self.u.add_scaled(1.0, &gemm(1.0, &d, Op::N, &stats.c_up, Op::T)?)?;
        self.p.add_scaled(1.0, &gemm(1.0, &d, Op::N, &stats.c_pp, Op::N)?)?;
        self.iteration += 1;
        Ok(())
    }

    /// Weights `W` of the same analysis step written on the current members:
    /// the updated member `j` equals `u⁽ʲ⁾ + Σₖ W[j, k] u⁽ᵏ⁾`, with
    /// `W[j, k] = ⟨p̃⁽ᵏ⁾, d⁽ʲ⁾⟩ / J`.
    pub fn analysis_weights(
        &self,
        y: &[f64],
        noise: &WeightedNorm,
        stream: &RandomStream,
        perturb: bool,
    ) -> Result<DenseMatrix> {
        let stats = self.stats()?;
        let d = self.innovations(&stats, y, noise, stream, perturb)?;
        let dev = self.p_deviations(&stats.mean_p);
        gemm(1.0 / self.ensemble_size() as f64, &d, Op::N, &dev, Op::T)
    }

    /// Members after applying analysis weights.
    pub fn combine_weights(&self, w: &DenseMatrix) -> Result<Vec<Field>> {
        let mut u = gemm(1.0, w, Op::N, &self.u, Op::N)?;
        u.add_scaled(1.0, &self.u)?;
        (0..u.rows())
            .map(|j| Field::new(self.basis, u.row(j).to_vec()))
            .collect()
    }
}

/// Column means, accumulated relative to the first row so that identical
/// rows give an exact mean.
fn column_means(m: &DenseMatrix) -> Vec<f64> {
    let base = m.row(0);
    let mut shift = vec![0.0; m.cols()];
    for j in 1..m.rows() {
        for ((a, v), b) in shift.iter_mut().zip(m.row(j)).zip(base) {
            *a += v - b;
        }
    }
    let inv = 1.0 / m.rows() as f64;
    base.iter().zip(shift).map(|(b, a)| b + a * inv).collect()
}
