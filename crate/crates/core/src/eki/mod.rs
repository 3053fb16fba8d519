//! Iterated ensemble Kalman inversion: prediction through the forward model,
//! analysis against perturbed data, mean estimate, and discrepancy-principle
//! stopping.
//!
//! Every iterate stays in the span of the initial ensemble, so the method is
//! a derivative-free search over that subspace.

mod run;
mod state;

pub use run::{
    run, Diagnostics, EkiRun, ErrorReference, StoppingRule, DEFAULT_MAX_ITERATIONS, DEFAULT_TAU,
};
pub use state::{EkiState, EnsembleStats};
