use serde::{Deserialize, Serialize};

use crate::eki::state::EkiState;
use crate::error::{Error, Result};
use crate::field::{weighted_misfit, Field, Subspace, WeightedNorm};
use crate::forward::{forward_response, ForwardModel};
use crate::numerics::RandomStream;

pub const DEFAULT_TAU: f64 = 1.1;
pub const DEFAULT_MAX_ITERATIONS: usize = 30;

/// Discrepancy principle: stop once `‖y − G(uₙ)‖_Γ ≤ τ · noise_level`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StoppingRule {
    pub tau: f64,
    pub noise_level: f64,
    pub max_iterations: usize,
    /// When false the loop keeps iterating to `max_iterations` after the
    /// discrepancy is met; the crossing is still recorded.
    pub halt: bool,
}

impl StoppingRule {
    pub fn new(tau: f64, noise_level: f64, max_iterations: usize) -> Result<Self> {
        if !(tau > 1.0) || !tau.is_finite() {
            return Err(Error::InvalidParameter(format!("tau = {tau} must exceed 1")));
        }
        if !(noise_level >= 0.0) || !noise_level.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "noise level {noise_level} must be non-negative"
            )));
        }
        if max_iterations == 0 {
            return Err(Error::InvalidParameter("max_iterations must be at least 1".into()));
        }
        Ok(Self {
            tau,
            noise_level,
            max_iterations,
            halt: true,
        })
    }

    /// Defaults with the given noise level.
    pub fn with_noise_level(noise_level: f64) -> Result<Self> {
        Self::new(DEFAULT_TAU, noise_level, DEFAULT_MAX_ITERATIONS)
    }

    /// Defaults for data of length `kappa` without a known noise draw, using
    /// the expected whitened noise norm `√κ`.
    pub fn for_data_len(kappa: usize) -> Result<Self> {
        Self::with_noise_level((kappa as f64).sqrt())
    }

    /// Same rule, but iterating through to `max_iterations`.
    pub fn continuing(self) -> Self {
        Self { halt: false, ..self }
    }

    pub fn threshold(&self) -> f64 {
        self.tau * self.noise_level
    }

    pub fn is_met(&self, misfit: f64) -> bool {
        misfit <= self.threshold()
    }
}

/// Truth against which errors are measured: `‖u − truth‖ / scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReference {
    pub truth: Field,
    pub scale: f64,
}

impl ErrorReference {
    /// Relative to `‖truth‖`.
    pub fn relative(truth: Field) -> Self {
        let scale = truth.norm();
        Self { truth, scale }
    }

    /// Relative to the distance of the truth from a prior mean.
    pub fn centered(truth: Field, mean: &Field) -> Result<Self> {
        let scale = truth.sub(mean)?.norm();
        Ok(Self { truth, scale })
    }

    pub fn error(&self, u: &Field) -> Result<f64> {
        Ok(u.sub(&self.truth)?.norm() / self.scale)
    }
}

/// Per-iteration record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub iteration: usize,
    pub relative_error: Option<f64>,
    /// `‖y − G(uₙ)‖_Γ` for the ensemble mean `uₙ`.
    pub misfit: f64,
    pub member_misfits: Vec<f64>,
}

/// Outcome of [`run`].
#[derive(Debug, Clone)]
pub struct EkiRun {
    /// Estimate at the stopping iteration, or at the last one when the
    /// discrepancy was never met.
    pub estimate: Field,
    /// First iteration meeting the discrepancy principle.
    pub stopping_iteration: Option<usize>,
    pub converged: bool,
    pub history: Vec<Diagnostics>,
    pub estimates: Vec<Field>,
    pub ensembles: Vec<Vec<Field>>,
}

impl EkiRun {
    pub fn misfits(&self) -> Vec<f64> {
        self.history.iter().map(|d| d.misfit).collect()
    }

    pub fn errors(&self) -> Option<Vec<f64>> {
        self.history.iter().map(|d| d.relative_error).collect()
    }
}

fn diagnose(
    state: &EkiState,
    model: &dyn ForwardModel,
    y: &[f64],
    noise: &WeightedNorm,
    truth: Option<&ErrorReference>,
) -> Result<(Diagnostics, Field)> {
    let estimate = state.estimate();
    let misfit = weighted_misfit(y, &forward_response(model, &estimate)?, noise)?;
    let member_misfits = (0..state.ensemble_size())
        .map(|j| weighted_misfit(y, state.prediction(j), noise))
        .collect::<Result<Vec<_>>>()?;
    let relative_error = truth.map(|t| t.error(&estimate)).transpose()?;
    let diag = Diagnostics {
        iteration: state.iteration(),
        relative_error,
        misfit,
        member_misfits,
    };
    if !diag.misfit.is_finite() || diag.relative_error.is_some_and(|e| !e.is_finite()) {
        return Err(Error::SolveFailure(format!(
            "non-finite diagnostics at iteration {}",
            diag.iteration
        )));
    }
    Ok((diag, estimate))
}

/// Iterated ensemble Kalman inversion from the members of `a`.
///
/// Every step analyzes against perturbed data drawn from `stream`, then
/// re-predicts. The run stops at the first iteration meeting `rule`, unless
/// `rule.halt` is off.
pub fn run(
    a: &Subspace,
    model: &dyn ForwardModel,
    y: &[f64],
    noise: &WeightedNorm,
    rule: &StoppingRule,
    stream: &RandomStream,
    truth: Option<&ErrorReference>,
) -> Result<EkiRun> {
    let mut state = EkiState::init(a, model)?;
    let mut history = Vec::new();
    let mut estimates = Vec::new();
    let mut ensembles = Vec::new();
    let mut stopping = None;
    loop {
        let (diag, estimate) = diagnose(&state, model, y, noise, truth)?;
        let n = state.iteration();
        if stopping.is_none() && rule.is_met(diag.misfit) {
            stopping = Some(n);
        }
        history.push(diag);
        estimates.push(estimate);
        ensembles.push(state.members());
        if (stopping.is_some() && rule.halt) || n >= rule.max_iterations {
            break;
        }
        state.analyze(y, noise, stream, true)?;
        state.predict(model)?;
    }
    let stop = stopping.unwrap_or(estimates.len() - 1);
    Ok(EkiRun {
        estimate: estimates[stop].clone(),
        stopping_iteration: stopping,
        converged: stopping.is_some(),
        history,
        estimates,
        ensembles,
    })
}
