//! Experiment configuration, synthetic truths, the multi-subspace study,
//! summaries against published reference values, and output files.

mod config;
mod experiment;
mod summary;

pub use config::{EnsembleMode, ExperimentConfig, ModelConfig};
pub use experiment::{
    load_records, record_path, run_experiment, EnkfRecord, Experiment, LsRecord, MethodErrors,
    RunRecord, Seeds, Truth,
};
pub use summary::{summarize, table1_configs, table1_reference, Column, Summary, SummaryRow};
