//! Sliding train / validate / predict-next-batch protocol.
//!
//! With `N` training batches and `T` batches in total, the step predicting
//! batch `b` (for `b = N+1..=T`) works as follows:
//!
//! 1. fit every grid cell on batches `b−N..=b−2` and score it on batch
//!    `b−1`, which is evaluated with the last trained window;
//! 2. refit the best cell on batches `b−N..=b−1`;
//! 3. predict batch `b` with the last (`N`-th) window's classifier.
//!
//! That gives `T − N` prediction steps.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::report::config_hash;
use super::{accuracy_by_task, mean_accuracy, search_cells, Grid, KernelFamily, Method, MethodModel};
use crate::error::{Error, Result};
use crate::kernelcore::{HyperParams, MultiTaskStream};
use crate::qp_solver::SolverOptions;
use crate::streams::loaders::standardize;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrequentialConfig {
    /// Number of batches used for training at each step (`N`).
    pub n_train: usize,
    pub kernel: KernelFamily,
    pub grid: Grid,
    pub methods: Vec<Method>,
    /// Z-score features using the training batches of each step.
    pub standardize: bool,
    pub solver: SolverOptions,
}

impl PrequentialConfig {
    pub fn new(n_train: usize, kernel: KernelFamily) -> Self {
        PrequentialConfig {
            n_train,
            kernel,
            grid: Grid::desk(),
            methods: vec![Method::Dc, Method::SingleChain],
            standardize: false,
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrequentialStep {
    /// 1-based index of the predicted batch.
    pub target_batch: usize,
    pub hyper: HyperParams,
    pub val_accuracy: f64,
    /// Accuracy on the predicted batch, per task.
    pub accuracy: Vec<f64>,
    pub mean_accuracy: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrequentialRun {
    pub method: Method,
    pub steps: Vec<PrequentialStep>,
    /// Mean over steps of the per-step mean accuracy.
    pub mean_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrequentialReport {
    pub config: serde_json::Value,
    pub config_hash: String,
    pub batches: usize,
    pub runs: Vec<PrequentialRun>,
    pub wall_clock_secs: f64,
}

impl PrequentialReport {
    pub fn run_for(&self, method: Method) -> Option<&PrequentialRun> {
        self.runs.iter().find(|r| r.method == method)
    }
}

fn single_class_note(stream: &MultiTaskStream, what: &str) -> Option<String> {
    stream
        .has_single_class_window()
        .then(|| format!("{what} has a window with a single class"))
}

/// Runs the protocol on a batched stream (one window per batch).
pub fn run_prequential(stream: &MultiTaskStream, cfg: &PrequentialConfig) -> Result<PrequentialReport> {
    let n = cfg.n_train;
    let total = stream.m();
    if n < 2 {
        return Err(Error::input(format!("N must be at least 2, got {n}")));
    }
    if total < n + 1 {
        return Err(Error::input(format!(
            "{total} batches are too few for N = {n} (need at least N + 1)"
        )));
    }
    if cfg.methods.is_empty() {
        return Err(Error::input("no methods selected"));
    }
    let start = Instant::now();
    let mut runs = Vec::new();
    for &method in &cfg.methods {
        let cells = cfg.grid.cells(cfg.kernel, method)?;
        let mut steps = Vec::new();
        for b in n + 1..=total {
            let mut warnings = Vec::new();
            let mut tune = stream.window_range(b - n, b - 2)?;
            let mut val = stream.window_range(b - 1, b - 1)?;
            let mut train = stream.window_range(b - n, b - 1)?;
            let mut target = stream.window_range(b, b)?;
            if cfg.standardize {
                val = standardize(&val, &tune)?;
                tune = standardize(&tune, &tune)?;
                target = standardize(&target, &train)?;
                train = standardize(&train, &train)?;
            }
            warnings.extend(single_class_note(&train, "training data"));
            warnings.extend(single_class_note(&target, "predicted batch"));

            let last_tuned = n - 1;
            let best = search_cells(&tune, &cells, method, &cfg.solver, |m| {
                accuracy_by_task(m, val.samples(), Some(last_tuned))
            })?;
            let model = MethodModel::fit(method, &train, &best.hyper, None, &cfg.solver)?;
            let accuracy = accuracy_by_task(&model, target.samples(), Some(n))?;
            steps.push(PrequentialStep {
                target_batch: b,
                hyper: best.hyper,
                val_accuracy: best.val_accuracy,
                mean_accuracy: mean_accuracy(&accuracy),
                accuracy,
                warnings,
            });
        }
        let mean = steps.iter().map(|s| s.mean_accuracy).sum::<f64>() / steps.len() as f64;
        runs.push(PrequentialRun {
            method,
            steps,
            mean_accuracy: mean,
        });
    }
    let config = serde_json::to_value(cfg)?;
    Ok(PrequentialReport {
        config_hash: config_hash(&config),
        config,
        batches: total,
        runs,
        wall_clock_secs: start.elapsed().as_secs_f64(),
    })
}
