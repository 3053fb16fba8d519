use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{best_approximation, subspace_ls, LsSettings, Regularization};
use crate::eki::{self, Diagnostics, ErrorReference, StoppingRule};
use crate::error::{Error, Result};
use crate::field::{
    covariance_darcy, covariance_elliptic, kl_ensemble, sample_prior, Field, GaussianMeasure,
    Subspace, WeightedNorm,
};
use crate::forward::{forward_response, DarcyGrid, DarcyModel, EllipticModel, ForwardModel};
use crate::harness::config::{EnsembleMode, ExperimentConfig, ModelConfig};
use crate::numerics::{derive_seed, Purpose, RandomStream};

/// Synthetic truth and the data generated from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub field: Field,
    pub noise: Vec<f64>,
    pub data: Vec<f64>,
    /// `‖η†‖_Γ`; zero for noiseless data.
    pub noise_level: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seeds {
    pub master: u64,
    /// Seed of this replication's ensemble and perturbation streams.
    pub replication: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnkfRecord {
    pub history: Vec<Diagnostics>,
    /// First iteration meeting the discrepancy principle.
    pub stopping_iteration: Option<usize>,
    pub converged: bool,
    /// Iteration whose error is reported in comparisons.
    pub reported_iteration: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsRecord {
    pub misfit: f64,
    pub iterations: usize,
    pub converged: bool,
    pub forward_solves: usize,
}

/// Relative errors `‖u − u†‖ / ‖u† − ū‖` of the three estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodErrors {
    pub enkf: Option<f64>,
    pub ls: Option<f64>,
    pub ba: Option<f64>,
}

/// Outcome of one replication, i.e. one search subspace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config: ExperimentConfig,
    pub replication: usize,
    pub seeds: Seeds,
    pub truth: Truth,
    /// Denominator of every relative error, `‖u† − ū‖`.
    pub error_scale: f64,
    pub enkf: Option<EnkfRecord>,
    pub ls: Option<LsRecord>,
    pub errors: MethodErrors,
    /// Messages of failed solvers; empty on success.
    pub failures: Vec<String>,
}

impl RunRecord {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("record serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn failed(&self) -> bool {
        !self.failures.is_empty()
    }

    /// Relative EnKF errors per iteration.
    pub fn enkf_errors(&self) -> Vec<f64> {
        self.enkf
            .iter()
            .flat_map(|e| e.history.iter().filter_map(|d| d.relative_error))
            .collect()
    }

    pub fn enkf_misfits(&self) -> Vec<f64> {
        self.enkf
            .iter()
            .flat_map(|e| e.history.iter().map(|d| d.misfit))
            .collect()
    }
}

/// A configured experiment: model, prior and noise model.
pub struct Experiment {
    config: ExperimentConfig,
    model: Box<dyn ForwardModel>,
    prior: GaussianMeasure,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let (model, prior): (Box<dyn ForwardModel>, GaussianMeasure) = match &config.model {
            ModelConfig::Elliptic { beta, modes, .. } => (
                Box::new(EllipticModel::new(*modes)?),
                covariance_elliptic(*beta, *modes)?,
            ),
            ModelConfig::Darcy {
                alpha,
                beta,
                mean,
                cells_per_side,
                wells_per_side,
                prior_modes_per_side,
                ..
            } => (
                Box::new(DarcyModel::with_lattice(DarcyGrid::new(*cells_per_side)?, *wells_per_side)?),
                covariance_darcy(*beta, *alpha, *prior_modes_per_side)?.onto_grid(*cells_per_side, *mean)?,
            ),
        };
        Ok(Self {
            config,
            model,
            prior,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn model(&self) -> &dyn ForwardModel {
        self.model.as_ref()
    }

    pub fn prior(&self) -> &GaussianMeasure {
        &self.prior
    }

    fn noise(&self) -> Result<WeightedNorm> {
        WeightedNorm::white(self.config.model.gamma())
            .map_err(|_| Error::Config("gamma must be positive to run an inversion".into()))
    }

    /// `u† ~ prior`, `η† ~ N(0, γ²I)`, `y = G(u†) + η†`.
    pub fn make_truth(&self) -> Result<Truth> {
        let seed = self.config.seed;
        let field = sample_prior(&self.prior, &RandomStream::new(seed, Purpose::Truth, 0, 0));
        let clean = forward_response(self.model(), &field)?;
        let gamma = self.config.model.gamma();
        let (noise, noise_level) = if gamma == 0.0 {
            (vec![0.0; clean.len()], 0.0)
        } else {
            let norm = WeightedNorm::white(gamma)?;
            let eta = norm.sample(&RandomStream::new(seed, Purpose::TruthNoise, 0, 0), clean.len())?;
            let level = norm.norm(&eta)?;
            (eta, level)
        };
        let data = clean.iter().zip(&noise).map(|(g, e)| g + e).collect();
        Ok(Truth {
            field,
            noise,
            data,
            noise_level,
        })
    }

    pub fn seeds(&self, replication: usize) -> Seeds {
        Seeds {
            master: self.config.seed,
            replication: derive_seed(self.config.seed, replication as u64),
        }
    }

    /// Search subspace of a replication.
    pub fn subspace(&self, replication: usize) -> Result<Subspace> {
        let j = self.config.ensemble_size;
        match self.config.ensemble {
            EnsembleMode::KL => kl_ensemble(&self.prior, j),
            EnsembleMode::R => {
                let seed = self.seeds(replication).replication;
                Subspace::new(
                    (0..j)
                        .map(|m| sample_prior(&self.prior, &RandomStream::new(seed, Purpose::Ensemble, m as u64, 0)))
                        .collect(),
                )
            }
        }
    }

    pub fn error_reference(&self, truth: &Truth) -> Result<ErrorReference> {
        ErrorReference::centered(truth.field.clone(), self.prior.mean())
    }

    fn regularization(&self) -> Regularization<'_> {
        match self.config.model {
            ModelConfig::Elliptic { .. } => Regularization::Tikhonov(&self.prior),
            ModelConfig::Darcy { .. } => Regularization::None,
        }
    }

    /// EnKF, least squares and best approximation on one subspace.
    ///
    /// Solver failures are recorded in the returned record rather than
    /// propagated; invalid input is still an error.
    pub fn run_replication(&self, truth: &Truth, replication: usize) -> Result<RunRecord> {
        let noise = self.noise()?;
        let seeds = self.seeds(replication);
        let reference = self.error_reference(truth)?;
        let a = self.subspace(replication)?;
        let rule = StoppingRule::new(self.config.tau, truth.noise_level, self.config.max_iterations)?;
        let mut failures = Vec::new();
        let mut errors = MethodErrors {
            enkf: None,
            ls: None,
            ba: None,
        };
        let mut note = |e: Error, what: &str| -> Result<()> {
            if e.is_solver_failure() {
                failures.push(format!("{what}: {e}"));
                Ok(())
            } else {
                Err(e)
            }
        };

        let perturbation = RandomStream::new(seeds.replication, Purpose::Perturbation, 0, 0);
        let enkf = match eki::run(
            &a,
            self.model(),
            &truth.data,
            &noise,
            &rule.continuing(),
            &perturbation,
            Some(&reference),
        ) {
            Ok(run) => {
                let last = run.history.len() - 1;
                let reported = match self.config.ensemble {
                    EnsembleMode::R => last.min(1),
                    EnsembleMode::KL => last,
                };
                errors.enkf = run.history[reported].relative_error;
                Some(EnkfRecord {
                    history: run.history,
                    stopping_iteration: run.stopping_iteration,
                    converged: run.converged,
                    reported_iteration: reported,
                })
            }
            Err(e) => {
                note(e, "enkf")?;
                None
            }
        };

        let settings = LsSettings::new(rule);
        let ls = match subspace_ls(self.model(), &a, &truth.data, &noise, &settings, self.regularization()) {
            Ok(out) => {
                errors.ls = Some(reference.error(&out.estimate)?);
                Some(LsRecord {
                    misfit: out.misfit,
                    iterations: out.iterations,
                    converged: out.converged,
                    forward_solves: out.forward_solves,
                })
            }
            Err(e) => {
                note(e, "least squares")?;
                None
            }
        };

        errors.ba = Some(reference.error(&best_approximation(&a, &truth.field)?)?);
        Ok(RunRecord {
            config: self.config.clone(),
            replication,
            seeds,
            truth: truth.clone(),
            error_scale: reference.scale,
            enkf,
            ls,
            errors,
            failures,
        })
    }

    /// All replications against one shared truth, in replication order.
    pub fn run_all(&self) -> Result<Vec<(RunRecord, f64)>> {
        let truth = self.make_truth()?;
        (0..self.config.replications)
            .into_par_iter()
            .map(|r| {
                let start = Instant::now();
                let record = self.run_replication(&truth, r)?;
                Ok((record, start.elapsed().as_secs_f64()))
            })
            .collect()
    }
}

/// Files written for replication `r`.
pub fn record_path(dir: &Path, r: usize) -> PathBuf {
    dir.join(format!("rep-{r:03}.json"))
}

/// Runs the experiment and writes, per replication, the record JSON and the
/// error and misfit curves as CSV; wall times go to `timing.json`.
pub fn run_experiment(config: &ExperimentConfig, out: &Path) -> Result<Vec<RunRecord>> {
    let experiment = Experiment::new(config.clone())?;
    let results = experiment.run_all()?;
    fs::create_dir_all(out)?;
    fs::write(out.join("config.json"), config.to_json())?;
    let mut timing = Vec::new();
    let mut records = Vec::new();
    for (record, seconds) in results {
        let r = record.replication;
        fs::write(record_path(out, r), record.to_json())?;
        fs::write(out.join(format!("rep-{r:03}-error.csv")), error_csv(&record))?;
        fs::write(out.join(format!("rep-{r:03}-misfit.csv")), misfit_csv(&record))?;
        timing.push(serde_json::json!({ "replication": r, "seconds": seconds }));
        records.push(record);
    }
    fs::write(out.join("timing.json"), serde_json::to_string_pretty(&timing)?)?;
    Ok(records)
}

fn error_csv(record: &RunRecord) -> String {
    let mut s = String::from("iteration,relative_error\n");
    for d in record.enkf.iter().flat_map(|e| &e.history) {
        if let Some(err) = d.relative_error {
            s.push_str(&format!("{},{}\n", d.iteration, err));
        }
    }
    s
}

fn misfit_csv(record: &RunRecord) -> String {
    let mut s = String::from("iteration,misfit,noise_level\n");
    for d in record.enkf.iter().flat_map(|e| &e.history) {
        s.push_str(&format!("{},{},{}\n", d.iteration, d.misfit, record.truth.noise_level));
    }
    s
}

/// Reads every replication record in a directory, ordered by file name.
pub fn load_records(dir: &Path) -> Result<Vec<RunRecord>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
            name.starts_with("rep-") && name.ends_with(".json")
        })
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| RunRecord::from_json(&fs::read_to_string(p)?))
        .collect()
}
