//! Experiment orchestration: methods, grid search, and the repeated-run and
//! prequential protocols.
//!
//! Three methods share the same machinery:
//!
//! * [`Method::Dc`] fits all tasks jointly with both coupling terms,
//! * [`Method::SingleChain`] fits every task on its own as a chain (`k = 1`),
//! * [`Method::Merged`] pools all tasks into one chain and scores each task
//!   with the pooled window classifier.
//!
//! Grid cells may be evaluated in parallel; results are always reduced in
//! cell order, so the thread count never changes a report.

mod prequential;
mod protocol;
mod report;

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernelcore::{kernel_matrix, HyperParams, KernelSpec, MultiTaskStream, Sample};
use crate::model::{fit_with, merge_tasks, Prediction, TrainedModel};
use crate::qp_solver::SolverOptions;

pub use prequential::{run_prequential, PrequentialConfig, PrequentialReport, PrequentialRun, PrequentialStep};
pub use protocol::{
    derive_seed, run_synthetic_protocol, run_synthetic_protocol_with, sweep_optimal_lambda, LambdaSweepConfig,
    LambdaSweepReport, SweepRow, SyntheticProtocol,
};
pub use report::{
    config_hash, mean_std, write_plot_csv, ExperimentReport, FitDiagnostics, MethodSummary, PlotPoint, RunRecord,
};

/// Which model family to train.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Dc,
    SingleChain,
    Merged,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Dc, Method::SingleChain, Method::Merged];

    pub fn name(self) -> &'static str {
        match self {
            Method::Dc => "dc",
            Method::SingleChain => "single_chain",
            Method::Merged => "merged",
        }
    }

    /// Whether the external-coupling axis of a grid matters for this method.
    pub fn uses_lambda(self) -> bool {
        matches!(self, Method::Dc)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "dc" | "dc_svm" => Ok(Method::Dc),
            "single_chain" | "single" | "chain" => Ok(Method::SingleChain),
            "merged" | "merge" => Ok(Method::Merged),
            other => Err(Error::input(format!(
                "unknown method {other:?} (expected dc, single_chain or merged)"
            ))),
        }
    }
}

/// Kernel family searched by a grid; the Gaussian bandwidth comes from the
/// grid's sigma axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelFamily {
    Linear,
    Gaussian,
}

impl FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linear" => Ok(KernelFamily::Linear),
            "gaussian" | "gauss" | "rbf" => Ok(KernelFamily::Gaussian),
            other => Err(Error::input(format!(
                "unknown kernel {other:?} (expected linear or gaussian)"
            ))),
        }
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KernelFamily::Linear => "linear",
            KernelFamily::Gaussian => "gaussian",
        })
    }
}

/// Candidate values for each hyper-parameter axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub c_values: Vec<f64>,
    pub sigma_values: Vec<f64>,
    pub gamma_values: Vec<f64>,
    pub lambda_values: Vec<f64>,
}

fn powers(base: f64, lo: i32, hi: i32, step: i32) -> Vec<f64> {
    (lo..=hi).step_by(step as usize).map(|e| base.powi(e)).collect()
}

impl Grid {
    /// Reduced grid that keeps a repeated-run protocol within minutes.
    pub fn desk() -> Self {
        Grid {
            c_values: vec![1.0, 10.0, 100.0],
            sigma_values: powers(2.0, -1, 2, 1),
            gamma_values: powers(2.0, 0, 16, 4),
            lambda_values: powers(2.0, 0, 16, 4),
        }
    }

    /// Full-resolution grid: C in 10^-1..10^5, sigma in 2^-2..2^5, and
    /// gamma, lambda in 2^0..2^20.
    pub fn full() -> Self {
        Grid {
            c_values: powers(10.0, -1, 5, 1),
            sigma_values: powers(2.0, -2, 5, 1),
            gamma_values: powers(2.0, 0, 20, 1),
            lambda_values: powers(2.0, 0, 20, 1),
        }
    }

    /// The one-cell grid holding `hyper`.
    pub fn singleton(hyper: &HyperParams) -> Self {
        Grid {
            c_values: vec![hyper.c],
            sigma_values: hyper.kernel.sigma().into_iter().collect(),
            gamma_values: vec![hyper.gamma],
            lambda_values: vec![hyper.lambda],
        }
    }

    pub fn validate(&self, family: KernelFamily) -> Result<()> {
        let axis = |name: &str, v: &[f64], positive: bool| -> Result<()> {
            if v.is_empty() {
                return Err(Error::input(format!("grid axis {name} is empty")));
            }
            for &x in v {
                let ok = x.is_finite() && if positive { x > 0.0 } else { x >= 0.0 };
                if !ok {
                    return Err(Error::input(format!("grid axis {name} has invalid value {x}")));
                }
            }
            Ok(())
        };
        axis("C", &self.c_values, true)?;
        if family == KernelFamily::Gaussian {
            axis("sigma", &self.sigma_values, true)?;
        }
        axis("gamma", &self.gamma_values, false)?;
        axis("lambda", &self.lambda_values, false)
    }

    /// All cells in lexicographic `(C, σ, γ, λ)` order. Linear kernels skip
    /// the sigma axis; methods without external coupling collapse the
    /// lambda axis to zero.
    pub fn cells(&self, family: KernelFamily, method: Method) -> Result<Vec<HyperParams>> {
        self.validate(family)?;
        let sorted = |v: &[f64]| {
            let mut v = v.to_vec();
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        };
        let kernels: Vec<KernelSpec> = match family {
            KernelFamily::Linear => vec![KernelSpec::Linear],
            KernelFamily::Gaussian => sorted(&self.sigma_values)
                .into_iter()
                .map(|sigma| KernelSpec::Gaussian { sigma })
                .collect(),
        };
        let lambdas = if method.uses_lambda() {
            sorted(&self.lambda_values)
        } else {
            vec![0.0]
        };
        let mut out = Vec::new();
        for &c in &sorted(&self.c_values) {
            for &kernel in &kernels {
                for &gamma in &sorted(&self.gamma_values) {
                    for &lambda in &lambdas {
                        out.push(HyperParams::new(c, kernel, gamma, lambda)?);
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Anything that scores a point for a given task and time window.
pub trait Classifier {
    fn tasks(&self) -> usize;
    fn windows(&self) -> usize;
    fn predict(&self, task: usize, time: usize, x: &[f64]) -> Result<Prediction>;
}

impl Classifier for TrainedModel {
    fn tasks(&self) -> usize {
        self.k()
    }

    fn windows(&self) -> usize {
        self.m()
    }

    fn predict(&self, task: usize, time: usize, x: &[f64]) -> Result<Prediction> {
        TrainedModel::predict(self, task, time, x)
    }
}

/// A fitted model of one [`Method`].
#[derive(Debug, Clone)]
pub enum MethodModel {
    Coupled(TrainedModel),
    /// One chain per task, in task order.
    Chains(Vec<TrainedModel>),
    /// One chain over all tasks pooled; `k` is the original task count.
    Merged { model: TrainedModel, k: usize },
}

/// Extracts the rows and columns `idx` of a square matrix.
fn select(g: &Array2<f64>, idx: &[usize]) -> Array2<f64> {
    Array2::from_shape_fn((idx.len(), idx.len()), |(a, b)| g[[idx[a], idx[b]]])
}

impl MethodModel {
    /// Fits `method` on `stream`. `gram`, if given, is the kernel matrix of
    /// the whole stream in stream order and is reused for sub-streams.
    pub fn fit(
        method: Method,
        stream: &MultiTaskStream,
        hyper: &HyperParams,
        gram: Option<&Array2<f64>>,
        opts: &SolverOptions,
    ) -> Result<Self> {
        let chain_hyper = HyperParams {
            lambda: 0.0,
            ..*hyper
        };
        match method {
            Method::Dc => Ok(MethodModel::Coupled(fit_with(stream, hyper, gram, opts)?)),
            Method::SingleChain => {
                let mut models = Vec::with_capacity(stream.k());
                for t in 1..=stream.k() {
                    let sub = stream.task(t)?;
                    let g = gram.map(|g| {
                        let idx: Vec<usize> = (0..stream.len())
                            .filter(|&i| stream.samples()[i].task == t)
                            .collect();
                        select(g, &idx)
                    });
                    models.push(fit_with(&sub, &chain_hyper, g.as_ref(), opts)?);
                }
                Ok(MethodModel::Chains(models))
            }
            Method::Merged => {
                let merged = merge_tasks(stream)?;
                // merging orders samples stably by (time, task)
                let g = gram.map(|g| {
                    let s = stream.samples();
                    let mut idx: Vec<usize> = (0..s.len()).collect();
                    idx.sort_by_key(|&i| (s[i].time, s[i].task));
                    select(g, &idx)
                });
                let model = fit_with(&merged, &chain_hyper, g.as_ref(), opts)?;
                Ok(MethodModel::Merged {
                    model,
                    k: stream.k(),
                })
            }
        }
    }

    pub fn method(&self) -> Method {
        match self {
            MethodModel::Coupled(_) => Method::Dc,
            MethodModel::Chains(_) => Method::SingleChain,
            MethodModel::Merged { .. } => Method::Merged,
        }
    }

    /// The underlying trained models.
    pub fn models(&self) -> Vec<&TrainedModel> {
        match self {
            MethodModel::Coupled(m) => vec![m],
            MethodModel::Chains(v) => v.iter().collect(),
            MethodModel::Merged { model, .. } => vec![model],
        }
    }

    pub fn warnings(&self) -> Vec<String> {
        self.models()
            .into_iter()
            .flat_map(|m| m.warnings().iter().cloned())
            .collect()
    }

    pub fn diagnostics(&self) -> Vec<FitDiagnostics> {
        self.models().into_iter().map(FitDiagnostics::of).collect()
    }
}

impl Classifier for MethodModel {
    fn tasks(&self) -> usize {
        match self {
            MethodModel::Coupled(m) => m.k(),
            MethodModel::Chains(v) => v.len(),
            MethodModel::Merged { k, .. } => *k,
        }
    }

    fn windows(&self) -> usize {
        match self {
            MethodModel::Coupled(m) => m.m(),
            MethodModel::Chains(v) => v[0].m(),
            MethodModel::Merged { model, .. } => model.m(),
        }
    }

    fn predict(&self, task: usize, time: usize, x: &[f64]) -> Result<Prediction> {
        if task == 0 || task > self.tasks() {
            return Err(Error::input(format!("task {task} outside 1..={}", self.tasks())));
        }
        match self {
            MethodModel::Coupled(m) => m.predict(task, time, x),
            MethodModel::Chains(v) => v[task - 1].predict(1, time, x),
            MethodModel::Merged { model, .. } => model.predict(1, time, x),
        }
    }
}

/// Per-task accuracy of `model` on `samples`, scoring every sample at
/// `time` when given and at its own window otherwise. Tasks without samples
/// report `NaN`.
pub fn accuracy_by_task<C: Classifier + ?Sized>(
    model: &C,
    samples: &[Sample],
    time: Option<usize>,
) -> Result<Vec<f64>> {
    let k = model.tasks();
    let mut hit = vec![0usize; k];
    let mut total = vec![0usize; k];
    for s in samples {
        if s.task == 0 || s.task > k {
            return Err(Error::input(format!("sample task {} outside 1..={k}", s.task)));
        }
        let p = model.predict(s.task, time.unwrap_or(s.time), &s.features)?;
        total[s.task - 1] += 1;
        if p.label == s.label {
            hit[s.task - 1] += 1;
        }
    }
    Ok(hit
        .iter()
        .zip(&total)
        .map(|(&h, &t)| if t == 0 { f64::NAN } else { h as f64 / t as f64 })
        .collect())
}

/// Window-matched accuracy per task: every test sample is scored by the
/// sub-classifier of its own `(task, time)` window.
pub fn eval_windowed<C: Classifier + ?Sized>(model: &C, test: &MultiTaskStream) -> Result<Vec<f64>> {
    if test.m() != model.windows() {
        return Err(Error::input(format!(
            "test stream has {} windows, model has {}",
            test.m(),
            model.windows()
        )));
    }
    if test.k() != model.tasks() {
        return Err(Error::input(format!(
            "test stream has {} tasks, model has {}",
            test.k(),
            model.tasks()
        )));
    }
    accuracy_by_task(model, test.samples(), None)
}

/// Mean of the finite entries.
pub fn mean_accuracy(per_task: &[f64]) -> f64 {
    let finite: Vec<f64> = per_task.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.is_empty() {
        f64::NAN
    } else {
        finite.iter().sum::<f64>() / finite.len() as f64
    }
}

/// Outcome of a grid search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub hyper: HyperParams,
    /// Mean validation accuracy across tasks of the chosen cell.
    pub val_accuracy: f64,
    pub val_per_task: Vec<f64>,
    pub evaluated: usize,
    /// Cells whose fit or evaluation failed.
    pub failed: usize,
}

/// Kernel matrices of `stream` for every distinct kernel in `cells`.
fn gram_cache(stream: &MultiTaskStream, cells: &[HyperParams]) -> Result<Vec<(KernelSpec, Array2<f64>)>> {
    let mut kernels: Vec<KernelSpec> = Vec::new();
    for h in cells {
        if !kernels.contains(&h.kernel) {
            kernels.push(h.kernel);
        }
    }
    let xs = stream.features();
    kernels
        .into_iter()
        .map(|k| Ok((k, kernel_matrix(&k, &xs)?)))
        .collect()
}

/// Fits every cell on `train` and scores it with `score`; returns the first
/// cell with the highest mean score. Fails only when every cell fails, with
/// the first cell's error.
pub(crate) fn search_cells<F>(
    train: &MultiTaskStream,
    cells: &[HyperParams],
    method: Method,
    opts: &SolverOptions,
    score: F,
) -> Result<GridResult>
where
    F: Fn(&MethodModel) -> Result<Vec<f64>> + Sync,
{
    if cells.is_empty() {
        return Err(Error::input("grid has no cells"));
    }
    let grams = gram_cache(train, cells)?;
    let outcomes: Vec<Result<Vec<f64>>> = cells
        .par_iter()
        .map(|h| {
            let gram = grams.iter().find(|(k, _)| *k == h.kernel).map(|(_, g)| g);
            let model = MethodModel::fit(method, train, h, gram, opts)?;
            score(&model)
        })
        .collect();

    let mut best: Option<(usize, f64)> = None;
    let mut failed = 0;
    let mut first_err = None;
    for (i, out) in outcomes.iter().enumerate() {
        match out {
            Ok(acc) => {
                let s = mean_accuracy(acc);
                if best.map_or(true, |(_, b)| s > b) {
                    best = Some((i, s));
                }
            }
            Err(_) => {
                failed += 1;
                if first_err.is_none() {
                    first_err = Some(i);
                }
            }
        }
    }
    match best {
        Some((i, s)) => Ok(GridResult {
            hyper: cells[i],
            val_accuracy: s,
            val_per_task: outcomes[i].as_ref().cloned().unwrap_or_default(),
            evaluated: cells.len(),
            failed,
        }),
        None => {
            let i = first_err.unwrap_or(0);
            Err(outcomes
                .into_iter()
                .nth(i)
                .and_then(|r| r.err())
                .unwrap_or_else(|| Error::Numeric("every grid cell failed".into())))
        }
    }
}

/// Exhaustive search: fits every cell on `train`, scores it window-matched
/// on `val`, and returns the cell with the best mean validation accuracy
/// across tasks. Ties go to the lexicographically smallest `(C, σ, γ, λ)`.
pub fn grid_search(
    train: &MultiTaskStream,
    val: &MultiTaskStream,
    grid: &Grid,
    family: KernelFamily,
    method: Method,
    opts: &SolverOptions,
) -> Result<GridResult> {
    let cells = grid.cells(family, method)?;
    search_cells(train, &cells, method, opts, |m| eval_windowed(m, val))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernelcore::Label;
    use crate::streams::{gen_ds1, Ds1Spec};

    struct Constant(Label, usize);

    impl Classifier for Constant {
        fn tasks(&self) -> usize {
            self.1
        }
        fn windows(&self) -> usize {
            5
        }
        fn predict(&self, _: usize, _: usize, _: &[f64]) -> Result<Prediction> {
            Ok(Prediction::from_score(self.0.sign()))
        }
    }

    fn small(seed: u64) -> MultiTaskStream {
        gen_ds1(&Ds1Spec {
            n: 40,
            m: 5,
            r: 0.05,
            seed,
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn constant_predictor_scores_half_on_balanced_labels() {
        let s = small(1);
        let acc = eval_windowed(&Constant(Label::Positive, 2), &s).unwrap();
        assert_eq!(acc, vec![0.5, 0.5]);
    }

    #[test]
    fn window_mismatch_is_an_input_error() {
        let s = gen_ds1(&Ds1Spec {
            n: 40,
            m: 4,
            ..Default::default()
        })
        .unwrap();
        assert!(matches!(
            eval_windowed(&Constant(Label::Positive, 2), &s),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn cells_are_lexicographic_and_skip_unused_axes() {
        let grid = Grid {
            c_values: vec![10.0, 1.0],
            sigma_values: vec![2.0, 0.5],
            gamma_values: vec![4.0, 1.0],
            lambda_values: vec![8.0, 2.0],
        };
        let lin = grid.cells(KernelFamily::Linear, Method::Dc).unwrap();
        assert_eq!(lin.len(), 8);
        let key = |h: &HyperParams| (h.c, h.kernel.sigma().unwrap_or(0.0), h.gamma, h.lambda);
        for w in lin.windows(2) {
            assert!(key(&w[0]) < key(&w[1]));
        }
        let gauss = grid.cells(KernelFamily::Gaussian, Method::Dc).unwrap();
        assert_eq!(gauss.len(), 16);
        assert_eq!(gauss[0].kernel, KernelSpec::Gaussian { sigma: 0.5 });
        let chain = grid.cells(KernelFamily::Linear, Method::SingleChain).unwrap();
        assert_eq!(chain.len(), 4);
        assert!(chain.iter().all(|h| h.lambda == 0.0));
    }

    #[test]
    fn desk_and_full_grid_sizes() {
        let d = Grid::desk();
        assert_eq!(d.cells(KernelFamily::Gaussian, Method::Dc).unwrap().len(), 3 * 4 * 5 * 5);
        let p = Grid::full();
        assert_eq!(p.c_values.len(), 7);
        assert_eq!(p.sigma_values.len(), 8);
        assert_eq!(p.gamma_values.len(), 21);
        assert_eq!(p.lambda_values[20], 1048576.0);
    }

    #[test]
    fn singleton_grid_returns_its_cell() {
        let h = HyperParams::new(10.0, KernelSpec::Linear, 16.0, 4.0).unwrap();
        let (train, val) = (small(1), small(2));
        let r = grid_search(
            &train,
            &val,
            &Grid::singleton(&h),
            KernelFamily::Linear,
            Method::Dc,
            &SolverOptions::default(),
        )
        .unwrap();
        assert_eq!(r.hyper, h);
        assert_eq!(r.evaluated, 1);
    }

    #[test]
    fn cached_gram_matches_direct_fit_for_every_method() {
        let s = small(3);
        let h = HyperParams::new(10.0, KernelSpec::Gaussian { sigma: 1.0 }, 4.0, 4.0).unwrap();
        let g = kernel_matrix(&h.kernel, &s.features()).unwrap();
        let opts = SolverOptions::default();
        for method in Method::ALL {
            let a = MethodModel::fit(method, &s, &h, Some(&g), &opts).unwrap();
            let b = MethodModel::fit(method, &s, &h, None, &opts).unwrap();
            for (ma, mb) in a.models().iter().zip(b.models()) {
                assert_eq!(ma.alpha(), mb.alpha(), "{method}");
            }
        }
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("ita".parse::<Method>().is_err());
    }
}
