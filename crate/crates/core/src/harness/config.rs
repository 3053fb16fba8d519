use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::eki::{DEFAULT_MAX_ITERATIONS, DEFAULT_TAU};
use crate::error::{Error, Result};

/// Forward model and prior of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelConfig {
    /// Sine-basis elliptic problem, prior `β k⁻²`, white noise of level `γ`.
    Elliptic { beta: f64, gamma: f64, modes: usize },
    /// Darcy flow with prior `N(mean, β L^{-α})` and wells on a lattice.
    Darcy {
        alpha: f64,
        beta: f64,
        mean: f64,
        gamma: f64,
        cells_per_side: usize,
        wells_per_side: usize,
        /// Cosine modes per side kept in the prior; at most `cells_per_side`.
        prior_modes_per_side: usize,
    },
}

impl ModelConfig {
    pub fn elliptic() -> Self {
        ModelConfig::Elliptic {
            beta: 10.0,
            gamma: 0.01,
            modes: 512,
        }
    }

    pub fn darcy(cells_per_side: usize) -> Self {
        ModelConfig::Darcy {
            alpha: 1.3,
            beta: 0.5,
            mean: 4.0,
            gamma: 7.0,
            cells_per_side,
            wells_per_side: 10,
            prior_modes_per_side: cells_per_side,
        }
    }

    pub fn gamma(&self) -> f64 {
        match self {
            ModelConfig::Elliptic { gamma, .. } | ModelConfig::Darcy { gamma, .. } => *gamma,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelConfig::Elliptic { .. } => "elliptic",
            ModelConfig::Darcy { .. } => "darcy",
        }
    }
}

/// How the initial ensemble spanning the search subspace is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnsembleMode {
    /// Independent prior draws.
    R,
    /// Prior mean plus the leading scaled KL eigenfields.
    KL,
}

impl fmt::Display for EnsembleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EnsembleMode::R => "R",
            EnsembleMode::KL => "KL",
        })
    }
}

/// Everything needed to reproduce an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub ensemble: EnsembleMode,
    pub ensemble_size: usize,
    pub tau: f64,
    pub max_iterations: usize,
    pub seed: u64,
    pub replications: usize,
}

impl ExperimentConfig {
    pub fn elliptic(ensemble: EnsembleMode) -> Self {
        let (ensemble_size, replications) = match ensemble {
            EnsembleMode::R => (25, 100),
            EnsembleMode::KL => (20, 1),
        };
        Self {
            model: ModelConfig::elliptic(),
            ensemble,
            ensemble_size,
            tau: DEFAULT_TAU,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            seed: 20_130_501,
            replications,
        }
    }

    pub fn darcy(ensemble: EnsembleMode, cells_per_side: usize) -> Self {
        Self {
            model: ModelConfig::darcy(cells_per_side),
            ensemble,
            ensemble_size: 25,
            tau: DEFAULT_TAU,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            seed: 20_130_501,
            replications: match ensemble {
                EnsembleMode::R => 20,
                EnsembleMode::KL => 1,
            },
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks ranges; a zero noise level is accepted for noiseless truth
    /// generation only.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        let positive = |v: f64| v > 0.0 && v.is_finite();
        match &self.model {
            ModelConfig::Elliptic { beta, gamma, modes } => {
                if !positive(*beta) {
                    return bad(format!("beta = {beta} must be positive"));
                }
                if !(*gamma >= 0.0) || !gamma.is_finite() {
                    return bad(format!("gamma = {gamma} must be non-negative"));
                }
                if *modes == 0 {
                    return bad("modes must be at least 1".into());
                }
            }
            ModelConfig::Darcy {
                alpha,
                beta,
                mean,
                gamma,
                cells_per_side,
                wells_per_side,
                prior_modes_per_side,
            } => {
                if !(*alpha > 1.0) || !alpha.is_finite() {
                    return bad(format!("alpha = {alpha} must exceed 1"));
                }
                if !positive(*beta) || !mean.is_finite() {
                    return bad("beta must be positive and mean finite".into());
                }
                if !(*gamma >= 0.0) || !gamma.is_finite() {
                    return bad(format!("gamma = {gamma} must be non-negative"));
                }
                if *cells_per_side < 8 {
                    return bad(format!("cells_per_side = {cells_per_side} must be at least 8"));
                }
                if *wells_per_side == 0 {
                    return bad("wells_per_side must be at least 1".into());
                }
                if *prior_modes_per_side < 2 || prior_modes_per_side > cells_per_side {
                    return bad(format!(
                        "prior_modes_per_side = {prior_modes_per_side} must lie in 2..={cells_per_side}"
                    ));
                }
            }
        }
        if self.ensemble_size < 2 {
            return bad(format!("ensemble_size = {} must be at least 2", self.ensemble_size));
        }
        if !(self.tau > 1.0) || !self.tau.is_finite() {
            return bad(format!("tau = {} must exceed 1", self.tau));
        }
        if self.max_iterations == 0 || self.replications == 0 {
            return bad("max_iterations and replications must be at least 1".into());
        }
        Ok(())
    }
}
