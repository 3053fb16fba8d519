//! A reproducible multi-subspace study driven by a JSON config, written to a
//! directory and summarized, as `eki run` and `eki summarize` do.
//!
//! ```bash
//! cargo run --release --example experiment_harness
//! ```

use eki::harness::{load_records, run_experiment, summarize, EnsembleMode, ExperimentConfig, ModelConfig};

pub fn run_example() -> eki::Result<()> {
    let mut config = ExperimentConfig::elliptic(EnsembleMode::R);
    config.model = ModelConfig::Elliptic {
        beta: 10.0,
        gamma: 0.01,
        modes: 128,
    };
    config.replications = 4;
    println!("config:\n{}", config.to_json());

    let dir = std::env::temp_dir().join(format!("eki-example-{}", std::process::id()));
    run_experiment(&config, &dir)?;
    let records = load_records(&dir)?;
    print!("{}", summarize(&records)?.to_text());
    for r in &records {
        let e = r.enkf.as_ref().expect("no solver failure on this config");
        println!(
            "replication {}: seed {}, discrepancy met at {:?}",
            r.replication, r.seeds.replication, e.stopping_iteration
        );
    }
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> eki::Result<()> {
    run_example()
}
