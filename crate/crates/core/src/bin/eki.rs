use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use eki::harness::{
    load_records, run_experiment, summarize, table1_configs, Column, Experiment, ExperimentConfig,
    RunRecord,
};
use eki::Error;

#[derive(Parser)]
#[command(name = "eki", version, about = "Ensemble Kalman inversion experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "eki-out")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        replications: Option<usize>,
    },
    /// Mean errors over the records in a run directory.
    Summarize { dir: PathBuf },
    /// Reproduce one column of the reference error table.
    Table1 {
        #[arg(long, value_enum)]
        column: ColumnArg,
        /// Also write records under this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ColumnArg {
    Elliptic,
    Groundwater,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidParameter(_) | Error::AlphaTooSmall(_) | Error::TooFewModes { .. } => 2,
        e if e.is_solver_failure() => 3,
        _ => 1,
    }
}

fn report(records: &[RunRecord]) -> Result<u8, Error> {
    let summary = summarize(records)?;
    print!("{}", summary.to_text());
    let failed: Vec<&RunRecord> = records.iter().filter(|r| r.failed()).collect();
    for r in &failed {
        for f in &r.failures {
            eprintln!("replication {}: {f}", r.replication);
        }
    }
    Ok(if failed.is_empty() { 0 } else { 3 })
}

fn execute(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Run {
            config,
            out,
            seed,
            replications,
        } => {
            let mut config = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                config.seed = s;
            }
            if let Some(n) = replications {
                config.replications = n;
            }
            config.validate()?;
            let records = run_experiment(&config, &out)?;
            println!("model {}, J = {}, {} replication(s), records in {}", config.model.name(), config.ensemble_size, records.len(), out.display());
            report(&records)
        }
        Command::Summarize { dir } => {
            let records = load_records(&dir)?;
            let summary = summarize(&records)?;
            std::fs::write(dir.join("summary.csv"), summary.to_csv())?;
            print!("{}", summary.to_text());
            Ok(0)
        }
        Command::Table1 { column, out } => {
            let column = match column {
                ColumnArg::Elliptic => Column::Elliptic,
                ColumnArg::Groundwater => Column::Groundwater,
            };
            let mut records = Vec::new();
            for config in table1_configs(column) {
                let batch = match &out {
                    Some(dir) => run_experiment(&config, &dir.join(config.ensemble.to_string()))?,
                    None => Experiment::new(config)?
                        .run_all()?
                        .into_iter()
                        .map(|(r, _)| r)
                        .collect(),
                };
                records.extend(batch);
            }
            report(&records)
        }
    }
}

fn main() -> ExitCode {
    if let Ok(n) = std::env::var("EKI_THREADS") {
        match n.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: EKI_THREADS must be a positive integer, got `{n}`");
                return ExitCode::from(2);
            }
        }
    }
    match execute(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
