//! Repeated-run synthetic protocol and the coupling-weight sweep.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::report::{config_hash, mean_std, ExperimentReport, RunRecord};
use super::{eval_windowed, search_cells, Grid, KernelFamily, Method, MethodModel};
use crate::error::{Error, Result};
use crate::kernelcore::{HyperParams, KernelSpec};
use crate::qp_solver::SolverOptions;
use crate::streams::synthetic::{gen_ds1, Ds1Spec, SyntheticSpec};

/// Derives a child seed from a master seed and a path of tags.
pub fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    for t in tags {
        h.update(t.to_le_bytes());
    }
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest has 32 bytes"))
}

const ROLE_TRAIN: u64 = 1;
const ROLE_VAL: u64 = 2;
const ROLE_TEST: u64 = 3;

/// Configuration of the repeated-run protocol: every run draws fresh
/// train, validation and test streams, tunes each method on validation,
/// refits on train, and records test accuracy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticProtocol {
    pub spec: SyntheticSpec,
    pub kernel: KernelFamily,
    pub grid: Grid,
    pub runs: usize,
    pub methods: Vec<Method>,
    pub seed: u64,
    pub solver: SolverOptions,
}

impl SyntheticProtocol {
    pub fn new(spec: SyntheticSpec, kernel: KernelFamily, seed: u64) -> Self {
        SyntheticProtocol {
            spec,
            kernel,
            grid: Grid::desk(),
            runs: 10,
            methods: vec![Method::Dc, Method::SingleChain],
            seed,
            solver: SolverOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        self.grid.validate(self.kernel)?;
        if self.runs == 0 {
            return Err(Error::input("runs must be at least 1"));
        }
        if self.methods.is_empty() {
            return Err(Error::input("no methods selected"));
        }
        Ok(())
    }
}

/// Runs the protocol.
pub fn run_synthetic_protocol(cfg: &SyntheticProtocol) -> Result<ExperimentReport> {
    run_synthetic_protocol_with(cfg, |_| {})
}

/// Runs the protocol, calling `on_record` after each (run, method).
pub fn run_synthetic_protocol_with<F: FnMut(&RunRecord)>(
    cfg: &SyntheticProtocol,
    mut on_record: F,
) -> Result<ExperimentReport> {
    cfg.validate()?;
    let start = Instant::now();
    let mut rows = Vec::new();
    for run in 0..cfg.runs {
        let tag = run as u64;
        let seed_train = derive_seed(cfg.seed, &[tag, ROLE_TRAIN]);
        let seed_val = derive_seed(cfg.seed, &[tag, ROLE_VAL]);
        let seed_test = derive_seed(cfg.seed, &[tag, ROLE_TEST]);
        let train = cfg.spec.generate(seed_train, true)?;
        let val = cfg.spec.generate(seed_val, true)?;
        let test = cfg.spec.generate(seed_test, false)?;
        for &method in &cfg.methods {
            let cells = cfg.grid.cells(cfg.kernel, method)?;
            let best = search_cells(&train, &cells, method, &cfg.solver, |m| eval_windowed(m, &val))?;
            let model = MethodModel::fit(method, &train, &best.hyper, None, &cfg.solver)?;
            let record = RunRecord {
                run,
                method,
                seed_train,
                seed_val,
                seed_test,
                hyper: best.hyper,
                failed_cells: best.failed,
                train_accuracy: eval_windowed(&model, &train)?,
                val_accuracy: best.val_per_task,
                test_accuracy: eval_windowed(&model, &test)?,
                fits: model.diagnostics(),
                warnings: model.warnings(),
            };
            on_record(&record);
            rows.push(record);
        }
    }
    let config = serde_json::to_value(cfg)?;
    Ok(ExperimentReport::new(config, rows, start.elapsed().as_secs_f64()))
}

/// Configuration of the coupling-weight sweep: for each deviation `r`,
/// search `(γ, λ)` with `C` and the Gaussian `σ` fixed, on fresh sliding-sine
/// streams per run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaSweepConfig {
    pub r_values: Vec<f64>,
    pub c: f64,
    pub sigma: f64,
    pub gamma_values: Vec<f64>,
    pub lambda_values: Vec<f64>,
    pub runs: usize,
    pub seed: u64,
    /// Stream shape; `r` and `seed` are overridden per run.
    pub base: Ds1Spec,
    pub solver: SolverOptions,
}

impl LambdaSweepConfig {
    pub fn new(r_values: Vec<f64>, seed: u64) -> Self {
        let desk = Grid::desk();
        LambdaSweepConfig {
            r_values,
            c: 10.0,
            sigma: 1.0,
            gamma_values: desk.gamma_values,
            lambda_values: desk.lambda_values,
            runs: 10,
            seed,
            base: Ds1Spec::default(),
            solver: SolverOptions::default(),
        }
    }
}

/// Selected coupling weights for one deviation value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub r: f64,
    pub best_lambda: Vec<f64>,
    pub best_gamma: Vec<f64>,
    pub mean_lambda: f64,
    pub std_lambda: f64,
    pub mean_gamma: f64,
    pub std_gamma: f64,
    /// Mean of `log2 λ`; absent when a selected value is zero.
    pub mean_log2_lambda: Option<f64>,
    pub mean_log2_gamma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaSweepReport {
    pub config: serde_json::Value,
    pub config_hash: String,
    pub rows: Vec<SweepRow>,
    pub wall_clock_secs: f64,
}

fn mean_log2(xs: &[f64]) -> Option<f64> {
    if xs.iter().any(|&x| x <= 0.0) {
        return None;
    }
    Some(xs.iter().map(|x| x.log2()).sum::<f64>() / xs.len() as f64)
}

/// Runs the sweep.
pub fn sweep_optimal_lambda(cfg: &LambdaSweepConfig) -> Result<LambdaSweepReport> {
    if cfg.runs == 0 || cfg.r_values.is_empty() {
        return Err(Error::input("sweep needs at least one run and one r value"));
    }
    let grid = Grid {
        c_values: vec![cfg.c],
        sigma_values: vec![cfg.sigma],
        gamma_values: cfg.gamma_values.clone(),
        lambda_values: cfg.lambda_values.clone(),
    };
    let cells = grid.cells(KernelFamily::Gaussian, Method::Dc)?;
    debug_assert!(cells.iter().all(|h| h.kernel == KernelSpec::Gaussian { sigma: cfg.sigma }));
    let start = Instant::now();
    let mut rows = Vec::new();
    for (ri, &r) in cfg.r_values.iter().enumerate() {
        let (mut lambdas, mut gammas) = (Vec::new(), Vec::new());
        for run in 0..cfg.runs {
            let spec = |role| Ds1Spec {
                r,
                seed: derive_seed(cfg.seed, &[ri as u64, run as u64, role]),
                ..cfg.base
            };
            let train = gen_ds1(&spec(ROLE_TRAIN))?;
            let val = gen_ds1(&spec(ROLE_VAL))?;
            let best = search_cells(&train, &cells, Method::Dc, &cfg.solver, |m| eval_windowed(m, &val))?;
            let HyperParams { gamma, lambda, .. } = best.hyper;
            lambdas.push(lambda);
            gammas.push(gamma);
        }
        let (mean_lambda, std_lambda) = mean_std(&lambdas);
        let (mean_gamma, std_gamma) = mean_std(&gammas);
        rows.push(SweepRow {
            r,
            mean_log2_lambda: mean_log2(&lambdas),
            mean_log2_gamma: mean_log2(&gammas),
            best_lambda: lambdas,
            best_gamma: gammas,
            mean_lambda,
            std_lambda,
            mean_gamma,
            std_gamma,
        });
    }
    let config = serde_json::to_value(cfg)?;
    Ok(LambdaSweepReport {
        config_hash: config_hash(&config),
        config,
        rows,
        wall_clock_secs: start.elapsed().as_secs_f64(),
    })
}
