//! Report types, summary statistics, and CSV writers.

use std::io::Write;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::Method;
use crate::error::Result;
use crate::kernelcore::HyperParams;
use crate::model::TrainedModel;

/// Mean and sample standard deviation (`n − 1`); the deviation of a single
/// value is 0.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Hex SHA-256 of the compact JSON form of `config` (object keys sorted).
pub fn config_hash(config: &serde_json::Value) -> String {
    let text = serde_json::to_string(config).unwrap_or_default();
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Solver diagnostics for one trained model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub objective: f64,
    pub kkt_gap: f64,
    pub iterations: usize,
    pub alpha_sum: f64,
}

impl FitDiagnostics {
    pub fn of(model: &TrainedModel) -> Self {
        FitDiagnostics {
            objective: model.objective(),
            kkt_gap: model.kkt_gap(),
            iterations: model.iterations(),
            alpha_sum: model.alpha().iter().sum(),
        }
    }
}

/// One method's outcome in one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub method: Method,
    pub seed_train: u64,
    pub seed_val: u64,
    pub seed_test: u64,
    pub hyper: HyperParams,
    pub failed_cells: usize,
    pub train_accuracy: Vec<f64>,
    pub val_accuracy: Vec<f64>,
    pub test_accuracy: Vec<f64>,
    pub fits: Vec<FitDiagnostics>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl RunRecord {
    /// Test accuracy averaged over tasks.
    pub fn test_mean(&self) -> f64 {
        super::mean_accuracy(&self.test_accuracy)
    }
}

/// Aggregate test accuracy of one method over all runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    pub runs: usize,
    pub mean_per_task: Vec<f64>,
    pub std_per_task: Vec<f64>,
    /// Mean over runs of the task-averaged test accuracy.
    pub mean: f64,
    pub std: f64,
}

impl MethodSummary {
    pub fn from_runs(method: Method, rows: &[&RunRecord]) -> Self {
        let k = rows.first().map_or(0, |r| r.test_accuracy.len());
        let (mut mean_per_task, mut std_per_task) = (Vec::new(), Vec::new());
        for t in 0..k {
            let col: Vec<f64> = rows.iter().map(|r| r.test_accuracy[t]).collect();
            let (m, s) = mean_std(&col);
            mean_per_task.push(m);
            std_per_task.push(s);
        }
        let overall: Vec<f64> = rows.iter().map(|r| r.test_mean()).collect();
        let (mean, std) = mean_std(&overall);
        MethodSummary {
            method,
            runs: rows.len(),
            mean_per_task,
            std_per_task,
            mean,
            std,
        }
    }
}

/// Full record of a repeated-run experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    /// The fully resolved configuration that produced this report.
    pub config: serde_json::Value,
    pub config_hash: String,
    pub per_run: Vec<RunRecord>,
    pub summary: Vec<MethodSummary>,
    pub wall_clock_secs: f64,
}

impl ExperimentReport {
    pub fn new(config: serde_json::Value, per_run: Vec<RunRecord>, wall_clock_secs: f64) -> Self {
        let config_hash = config_hash(&config);
        let summary = summarize(&per_run);
        ExperimentReport {
            config,
            config_hash,
            per_run,
            summary,
            wall_clock_secs,
        }
    }

    pub fn summary_for(&self, method: Method) -> Option<&MethodSummary> {
        self.summary.iter().find(|s| s.method == method)
    }

    /// Mean accuracy of `a` minus that of `b`.
    pub fn gap(&self, a: Method, b: Method) -> Option<f64> {
        Some(self.summary_for(a)?.mean - self.summary_for(b)?.mean)
    }

    pub fn rows_for(&self, method: Method) -> Vec<&RunRecord> {
        self.per_run.iter().filter(|r| r.method == method).collect()
    }

    /// Flat per-run table, one row per (run, method).
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let k = self.per_run.first().map_or(0, |r| r.test_accuracy.len());
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = [
            "run", "method", "seed_train", "seed_val", "seed_test", "c", "kernel", "sigma", "gamma", "lambda",
            "failed_cells", "val_mean",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        header.extend((1..=k).map(|t| format!("test_task{t}")));
        header.push("test_mean".into());
        w.write_record(&header)?;
        for r in &self.per_run {
            let mut row = vec![
                r.run.to_string(),
                r.method.to_string(),
                r.seed_train.to_string(),
                r.seed_val.to_string(),
                r.seed_test.to_string(),
                r.hyper.c.to_string(),
                match r.hyper.kernel.sigma() {
                    Some(_) => "gaussian".to_string(),
                    None => "linear".to_string(),
                },
                r.hyper.kernel.sigma().map(|s| s.to_string()).unwrap_or_default(),
                r.hyper.gamma.to_string(),
                r.hyper.lambda.to_string(),
                r.failed_cells.to_string(),
                super::mean_accuracy(&r.val_accuracy).to_string(),
            ];
            row.extend(r.test_accuracy.iter().map(|a| a.to_string()));
            row.push(r.test_mean().to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Per-method summaries in method order.
pub(crate) fn summarize(rows: &[RunRecord]) -> Vec<MethodSummary> {
    let mut methods: Vec<Method> = rows.iter().map(|r| r.method).collect();
    methods.sort();
    methods.dedup();
    methods
        .into_iter()
        .map(|m| {
            let mine: Vec<&RunRecord> = rows.iter().filter(|r| r.method == m).collect();
            MethodSummary::from_runs(m, &mine)
        })
        .collect()
}

/// One point of a plot-ready series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotPoint {
    pub series: String,
    pub x: f64,
    pub y: f64,
    pub yerr: f64,
}

/// Writes `series,x,y,yerr` rows.
pub fn write_plot_csv<W: Write>(points: &[PlotPoint], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for p in points {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}
