use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::config::{EnsembleMode, ExperimentConfig};
use crate::harness::experiment::RunRecord;

/// Mean relative error of one estimator over the replications of one mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: String,
    pub ensemble_size: usize,
    pub mean_error: f64,
    /// Replications contributing to the mean.
    pub count: usize,
    /// Replications where this estimator failed.
    pub failures: usize,
    pub reference: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub rows: Vec<SummaryRow>,
}

impl Summary {
    pub fn row(&self, method: &str) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.method == method)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("method,J,mean_relative_error,count,failures,reference\n");
        for r in &self.rows {
            let reference = r.reference.map(|v| v.to_string()).unwrap_or_default();
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                r.method, r.ensemble_size, r.mean_error, r.count, r.failures, reference
            );
        }
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "{:<10} {:>4} {:>12} {:>6} {:>9} {:>10}\n",
            "method", "J", "mean error", "count", "failures", "reference"
        );
        for r in &self.rows {
            let reference = r.reference.map(|v| format!("{v:.3}")).unwrap_or_else(|| "-".into());
            let _ = writeln!(
                s,
                "{:<10} {:>4} {:>12.4} {:>6} {:>9} {:>10}",
                r.method, r.ensemble_size, r.mean_error, r.count, r.failures, reference
            );
        }
        s
    }
}

/// Which published column a set of records corresponds to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Column {
    Elliptic,
    Groundwater,
}

/// Published mean relative errors for `method` (e.g. `"EnKF_R"`).
pub fn table1_reference(column: Column, method: &str) -> Option<f64> {
    let values = match column {
        Column::Elliptic => [0.257, 0.264, 0.111, 0.270, 0.250, 0.070],
        Column::Groundwater => [0.597, 0.581, 0.367, 0.591, 0.569, 0.278],
    };
    let names = ["EnKF_R", "LS_R", "BA_R", "EnKF_KL", "LS_KL", "BA_KL"];
    names.iter().position(|n| *n == method).map(|i| values[i])
}

/// Configurations reproducing one column: the random and the KL study.
pub fn table1_configs(column: Column) -> [ExperimentConfig; 2] {
    match column {
        Column::Elliptic => [
            ExperimentConfig::elliptic(EnsembleMode::R),
            ExperimentConfig::elliptic(EnsembleMode::KL),
        ],
        Column::Groundwater => [
            ExperimentConfig::darcy(EnsembleMode::R, 40),
            ExperimentConfig::darcy(EnsembleMode::KL, 40),
        ],
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Per-mode, per-method mean relative errors, rows ordered EnKF, LS, BA with
/// the random mode first.
pub fn summarize(records: &[RunRecord]) -> Result<Summary> {
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }
    let column = match records[0].config.model.name() {
        "elliptic" => Column::Elliptic,
        _ => Column::Groundwater,
    };
    let mut rows = Vec::new();
    for mode in [EnsembleMode::R, EnsembleMode::KL] {
        let group: Vec<&RunRecord> = records.iter().filter(|r| r.config.ensemble == mode).collect();
        if group.is_empty() {
            continue;
        }
        let pick: [(&str, fn(&RunRecord) -> Option<f64>); 3] = [
            ("EnKF", |r| r.errors.enkf),
            ("LS", |r| r.errors.ls),
            ("BA", |r| r.errors.ba),
        ];
        for (name, get) in pick {
            let values: Vec<f64> = group.iter().filter_map(|r| get(r)).collect();
            let method = format!("{name}_{mode}");
            rows.push(SummaryRow {
                reference: table1_reference(column, &method),
                method,
                ensemble_size: group[0].config.ensemble_size,
                mean_error: if values.is_empty() { f64::NAN } else { mean(&values) },
                count: values.len(),
                failures: group.len() - values.len(),
            });
        }
    }
    Ok(Summary { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::experiment::{Experiment, MethodErrors};
    use crate::harness::config::ModelConfig;

    fn record_with(errors: [f64; 3]) -> RunRecord {
        let mut c = ExperimentConfig::elliptic(EnsembleMode::R);
        c.model = ModelConfig::Elliptic {
            beta: 10.0,
            gamma: 0.01,
            modes: 8,
        };
        c.ensemble_size = 3;
        c.max_iterations = 1;
        let e = Experiment::new(c).unwrap();
        let t = e.make_truth().unwrap();
        let mut r = e.run_replication(&t, 0).unwrap();
        r.errors = MethodErrors {
            enkf: Some(errors[0]),
            ls: Some(errors[1]),
            ba: Some(errors[2]),
        };
        r
    }

    #[test]
    fn single_record_passes_through() {
        let s = summarize(&[record_with([0.3, 0.2, 0.1])]).unwrap();
        assert_eq!(s.rows.len(), 3);
        assert_eq!(s.row("EnKF_R").unwrap().mean_error, 0.3);
        assert_eq!(s.row("LS_R").unwrap().mean_error, 0.2);
        assert_eq!(s.row("BA_R").unwrap().mean_error, 0.1);
        assert_eq!(s.row("EnKF_R").unwrap().reference, Some(0.257));
    }

    #[test]
    fn averages() {
        let s = summarize(&[record_with([0.2, 0.2, 0.2]), record_with([0.4, 0.4, 0.4])]).unwrap();
        assert!((s.row("EnKF_R").unwrap().mean_error - 0.3).abs() < 1e-15);
        assert!(s.to_csv().starts_with("method,J,"));
        assert!(s.to_text().contains("EnKF_R"));
    }

    #[test]
    fn empty_input() {
        assert!(matches!(summarize(&[]), Err(Error::EmptyInput)));
    }

    #[test]
    fn references() {
        assert_eq!(table1_reference(Column::Groundwater, "BA_KL"), Some(0.278));
        assert_eq!(table1_reference(Column::Elliptic, "BA_X"), None);
        let [r, kl] = table1_configs(Column::Elliptic);
        assert_eq!((r.ensemble, kl.ensemble), (EnsembleMode::R, EnsembleMode::KL));
    }
}
