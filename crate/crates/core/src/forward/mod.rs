//! Forward response operators `G: u ↦ data` behind the [`ForwardModel`]
//! trait, with two built-in models: a 1D elliptic operator that is diagonal in
//! the sine basis and a steady 2D Darcy flow observed at wells.

mod darcy;
mod elliptic;
mod observation;

pub use darcy::{
    benchmark_source, darcy_solve, Boundary, DarcyGrid, DarcyProblem, DarcySystem, BOTTOM_HEAD,
    LEFT_INFLOW,
};
pub use elliptic::{elliptic_apply, elliptic_symbol};
pub use observation::{observe, well_lattice, ObservationSpec};

use crate::error::{Error, Result};
use crate::field::{Basis, Field, DARCY_SIDE};
use crate::numerics::DenseMatrix;

/// A deterministic map from a parameter field to a data vector.
///
/// Implementations are immutable and may be evaluated concurrently.
pub trait ForwardModel: Send + Sync {
    fn name(&self) -> &str;

    /// Basis the parameter field must be expressed in.
    fn input_basis(&self) -> Basis;

    fn observation(&self) -> &ObservationSpec;

    /// Data vector of length `observation().size()`.
    fn evaluate(&self, u: &Field) -> Result<Vec<f64>>;

    /// Matrix of `G` in input coefficients, for linear models.
    fn linear_operator(&self) -> Option<DenseMatrix> {
        None
    }
}

/// `G(u)`, with the output length checked against the observation spec.
pub fn forward_response(model: &dyn ForwardModel, u: &Field) -> Result<Vec<f64>> {
    let data = model.evaluate(u)?;
    let expected = model.observation().size();
    if data.len() != expected {
        return Err(Error::DimensionMismatch(format!(
            "{} returned {} values, expected {expected}",
            model.name(),
            data.len()
        )));
    }
    Ok(data)
}

/// Elliptic problem observed through all of its sine coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipticModel {
    modes: usize,
    observation: ObservationSpec,
}

impl EllipticModel {
    pub fn new(modes: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::InvalidParameter("elliptic model needs at least one mode".into()));
        }
        Ok(Self {
            modes,
            observation: ObservationSpec::AllCoefficients { size: modes },
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }
}

impl ForwardModel for EllipticModel {
    fn name(&self) -> &str {
        "elliptic"
    }

    fn input_basis(&self) -> Basis {
        Basis::sine(self.modes)
    }

    fn observation(&self) -> &ObservationSpec {
        &self.observation
    }

    fn evaluate(&self, u: &Field) -> Result<Vec<f64>> {
        if *u.basis() != self.input_basis() {
            return Err(Error::BasisMismatch {
                expected: self.input_basis().to_string(),
                found: u.basis().to_string(),
            });
        }
        observe(&elliptic_apply(u)?, &self.observation)
    }

    fn linear_operator(&self) -> Option<DenseMatrix> {
        Some(DenseMatrix::from_diagonal(&elliptic_symbol(self.modes)))
    }
}

/// Benchmark Darcy flow with head observed at wells.
///
/// Accepts the log-permeability either at cell centers or as cosine
/// coefficients, which are synthesized onto the grid first.
#[derive(Debug, Clone, PartialEq)]
pub struct DarcyModel {
    problem: DarcyProblem,
    observation: ObservationSpec,
}

impl DarcyModel {
    pub fn new(grid: DarcyGrid, wells: Vec<[f64; 2]>) -> Result<Self> {
        Ok(Self {
            problem: DarcyProblem::benchmark(grid),
            observation: ObservationSpec::points(wells, DARCY_SIDE)?,
        })
    }

    /// `per_side²` wells on a regular lattice.
    pub fn with_lattice(grid: DarcyGrid, per_side: usize) -> Result<Self> {
        Self::new(grid, well_lattice(per_side, DARCY_SIDE))
    }

    pub fn grid(&self) -> DarcyGrid {
        self.problem.grid()
    }

    pub fn problem(&self) -> &DarcyProblem {
        &self.problem
    }

    /// Head field for `u`.
    pub fn head(&self, u: &Field) -> Result<Field> {
        match u.basis() {
            Basis::CosineTensor2d { .. } => {
                let nodal = u.cosine_to_grid(self.grid().cells_per_side())?;
                self.problem.solve(&nodal)
            }
            _ => self.problem.solve(u),
        }
    }
}

impl ForwardModel for DarcyModel {
    fn name(&self) -> &str {
        "darcy"
    }

    fn input_basis(&self) -> Basis {
        self.grid().basis()
    }

    fn observation(&self) -> &ObservationSpec {
        &self.observation
    }

    fn evaluate(&self, u: &Field) -> Result<Vec<f64>> {
        observe(&self.head(u)?, &self.observation)
    }
}
