//! Fitting and evaluating double-coupling SVMs.
//!
//! The dual problem is `min ½·αᵀQα` over the simplex with
//!
//! ```text
//! Q_ij = Minv[μ(i)][μ(j)] · (K(x_i, x_j) + 1) · y_i · y_j  +  [i = j] / C
//! ```
//!
//! where `Minv` is the inverse coupling matrix. Stationarity of the primal
//! gives the window-`ν` decision function
//!
//! ```text
//! f_ν(x) = Σ_i Minv[ν][μ(i)] · α_i · y_i · (K(x_i, x) + 1)
//! ```
//!
//! so every sub-classifier is a weighted kernel expansion over *all* training
//! samples, with weights `β[ν][i]` read off the rows of `Minv`. A single task
//! (`k = 1`) gives the chain-coupled single-stream baseline.

use std::io::{Read, Write};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::coupling::{window_of, CouplingStructure};
use crate::error::{Error, Result};
use crate::kernelcore::{
    augmented_kernel, kernel_matrix, sort_time_major, HyperParams, Label, MultiTaskStream, Sample,
};
use crate::qp_solver::{solve_simplex_qp, SolverOptions};

/// Dual weights at or below this are treated as zero when recovering the
/// margin and checking complementary slackness.
pub const SUPPORT_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub score: f64,
    pub label: Label,
}

impl Prediction {
    pub fn from_score(score: f64) -> Self {
        Prediction {
            score,
            label: Label::from_score(score),
        }
    }
}

/// `Q = (Minv lifted to samples) ∘ K̃ ∘ yyᵀ + I/C`.
pub fn assemble_q(
    coupling: &CouplingStructure,
    k_aug: &Array2<f64>,
    y: &[f64],
    c: f64,
) -> Result<Array2<f64>> {
    let n = y.len();
    if k_aug.dim() != (n, n) || coupling.assignment().len() != n {
        return Err(Error::input(format!(
            "assemble_q: {} labels, {}x{} kernel, {} assigned samples",
            n,
            k_aug.nrows(),
            k_aug.ncols(),
            coupling.assignment().len()
        )));
    }
    if !(c > 0.0) {
        return Err(Error::input(format!("C must be positive, got {c}")));
    }
    let inv = coupling.inverse();
    let mu = coupling.assignment();
    let mut q = Array2::zeros((n, n));
    for i in 0..n {
        let wi = mu[i] - 1;
        for j in 0..=i {
            let v = inv[[wi, mu[j] - 1]] * k_aug[[i, j]] * y[i] * y[j];
            q[[i, j]] = v;
            q[[j, i]] = v;
        }
        q[[i, i]] += 1.0 / c;
    }
    Ok(q)
}

/// A fitted model: dual weights plus everything needed to evaluate any
/// sub-classifier. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    hyper: HyperParams,
    coupling: CouplingStructure,
    samples: Vec<Sample>,
    d: usize,
    alpha: Vec<f64>,
    rho: f64,
    /// `beta[[ν, i]] = Minv[ν][μ(i)]·α_i·y_i`, zero outside the support.
    beta: Array2<f64>,
    support: Vec<usize>,
    objective: f64,
    kkt_gap: f64,
    iterations: usize,
    warnings: Vec<String>,
}

/// Fits with default solver settings.
pub fn fit(stream: &MultiTaskStream, hyper: &HyperParams) -> Result<TrainedModel> {
    fit_with(stream, hyper, None, &SolverOptions::default())
}

/// Fits, optionally reusing a precomputed (non-augmented) Gram matrix of the
/// stream's samples in stream order.
pub fn fit_with(
    stream: &MultiTaskStream,
    hyper: &HyperParams,
    gram: Option<&Array2<f64>>,
    opts: &SolverOptions,
) -> Result<TrainedModel> {
    hyper.validate()?;
    let coupling = CouplingStructure::build(stream, hyper.gamma, hyper.lambda)?;
    let owned;
    let gram = match gram {
        Some(g) => {
            if g.dim() != (stream.len(), stream.len()) {
                return Err(Error::input("precomputed Gram matrix has the wrong size"));
            }
            g
        }
        None => {
            owned = kernel_matrix(&hyper.kernel, &stream.features())?;
            &owned
        }
    };
    let k_aug = augmented_kernel(gram)?;
    let y = stream.labels();
    let q = assemble_q(&coupling, &k_aug, &y, hyper.c)?;
    let sol = solve_simplex_qp(&q, opts)?;
    drop(q);

    let mut warnings = Vec::new();
    let counts = stream.cell_counts();
    let single = (0..stream.m())
        .filter(|&t| {
            let (mut pos, mut neg) = (false, false);
            for s in stream.samples().iter().filter(|s| s.time == t + 1) {
                match s.label {
                    Label::Positive => pos = true,
                    Label::Negative => neg = true,
                }
            }
            !(pos && neg)
        })
        .count();
    if single > 0 {
        warnings.push(format!(
            "{single} of {} windows contain a single class",
            counts.len()
        ));
    }

    let beta = expansion_weights(&coupling, &sol.alpha, &y);
    let support: Vec<usize> = (0..y.len()).filter(|&i| sol.alpha[i] > 0.0).collect();
    let mu = coupling.assignment();
    // rho = mean over support vectors of y_i f_{μ(i)}(x_i) + α_i / C
    let (mut total, mut count) = (0.0, 0usize);
    for i in (0..y.len()).filter(|&i| sol.alpha[i] > SUPPORT_THRESHOLD) {
        let row = beta.row(mu[i] - 1);
        let f: f64 = support.iter().map(|&j| row[j] * k_aug[[i, j]]).sum();
        total += y[i] * f + sol.alpha[i] / hyper.c;
        count += 1;
    }
    let rho = total / count.max(1) as f64;

    Ok(TrainedModel {
        hyper: *hyper,
        coupling,
        samples: stream.samples().to_vec(),
        d: stream.d(),
        alpha: sol.alpha,
        rho,
        beta,
        support,
        objective: sol.objective,
        kkt_gap: sol.kkt_gap,
        iterations: sol.iterations,
        warnings,
    })
}

fn expansion_weights(coupling: &CouplingStructure, alpha: &[f64], y: &[f64]) -> Array2<f64> {
    let inv = coupling.inverse();
    let mu = coupling.assignment();
    Array2::from_shape_fn((coupling.windows(), alpha.len()), |(nu, i)| {
        if alpha[i] > 0.0 {
            inv[[nu, mu[i] - 1]] * alpha[i] * y[i]
        } else {
            0.0
        }
    })
}

/// Fits each task on its own as a single chain (`k = 1`); `lambda` is unused.
pub fn fit_single_chain(
    stream: &MultiTaskStream,
    hyper: &HyperParams,
    opts: &SolverOptions,
) -> Result<Vec<TrainedModel>> {
    (1..=stream.k())
        .map(|t| fit_with(&stream.task(t)?, hyper, None, opts))
        .collect()
}

/// Pools single-task streams window by window into one single-task stream.
pub fn merge_streams(a: &MultiTaskStream, b: &MultiTaskStream) -> Result<MultiTaskStream> {
    if a.k() != 1 || b.k() != 1 {
        return Err(Error::input("merge_streams expects single-task streams"));
    }
    if a.m() != b.m() {
        return Err(Error::input(format!(
            "window-count mismatch: {} vs {}",
            a.m(),
            b.m()
        )));
    }
    if a.d() != b.d() {
        return Err(Error::input(format!(
            "dimension mismatch: {} vs {}",
            a.d(),
            b.d()
        )));
    }
    let mut samples: Vec<Sample> = a.samples().iter().chain(b.samples()).cloned().collect();
    sort_time_major(&mut samples);
    MultiTaskStream::new(samples, 1, a.m())
}

/// Merges every task of `stream` into a single chain.
pub fn merge_tasks(stream: &MultiTaskStream) -> Result<MultiTaskStream> {
    let mut merged = stream.task(1)?;
    for t in 2..=stream.k() {
        merged = merge_streams(&merged, &stream.task(t)?)?;
    }
    Ok(merged)
}

impl TrainedModel {
    pub fn hyper(&self) -> &HyperParams {
        &self.hyper
    }

    pub fn coupling(&self) -> &CouplingStructure {
        &self.coupling
    }

    pub fn k(&self) -> usize {
        self.coupling.k()
    }

    pub fn m(&self) -> usize {
        self.coupling.m()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn beta(&self) -> &Array2<f64> {
        &self.beta
    }

    /// Indices with non-zero dual weight.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn objective(&self) -> f64 {
        self.objective
    }

    pub fn kkt_gap(&self) -> f64 {
        self.kkt_gap
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// `f_μ(x)` for the 1-based window `μ`.
    pub fn decision(&self, window: usize, x: &[f64]) -> Result<f64> {
        if window == 0 || window > self.coupling.windows() {
            return Err(Error::input(format!(
                "window {window} outside 1..={}",
                self.coupling.windows()
            )));
        }
        if x.len() != self.d {
            return Err(Error::input(format!(
                "point has dimension {}, model expects {}",
                x.len(),
                self.d
            )));
        }
        Ok(self.decision_unchecked(window - 1, x))
    }

    fn decision_unchecked(&self, w0: usize, x: &[f64]) -> f64 {
        let row = self.beta.row(w0);
        self.support
            .iter()
            .map(|&i| row[i] * (self.hyper.kernel.eval_unchecked(&self.samples[i].features, x) + 1.0))
            .sum()
    }

    /// Scores `x` with the sub-classifier of `(task, time)`; times past the
    /// last trained window use the last window.
    pub fn predict(&self, task: usize, time: usize, x: &[f64]) -> Result<Prediction> {
        if time == 0 {
            return Err(Error::input("time index is 1-based"));
        }
        let window = window_of(task, time.min(self.m()), self.k())?;
        Ok(Prediction::from_score(self.decision(window, x)?))
    }

    /// Predictions for every sample of `stream`, matched to their own window.
    pub fn predict_stream(&self, stream: &MultiTaskStream) -> Result<Vec<Prediction>> {
        if stream.k() != self.k() {
            return Err(Error::input(format!(
                "stream has {} tasks, model has {}",
                stream.k(),
                self.k()
            )));
        }
        stream
            .samples()
            .iter()
            .map(|s| self.predict(s.task, s.time, &s.features))
            .collect()
    }

    /// Squared RKHS distance `‖f_ν − f_η‖²` in the bias-augmented feature space.
    pub fn classifier_distance(&self, nu: usize, eta: usize) -> Result<f64> {
        let w = self.coupling.windows();
        if nu == 0 || eta == 0 || nu > w || eta > w {
            return Err(Error::input(format!("windows must lie in 1..={w}")));
        }
        if nu == eta {
            return Ok(0.0);
        }
        let diff: Vec<(usize, f64)> = self
            .support
            .iter()
            .map(|&i| (i, self.beta[[nu - 1, i]] - self.beta[[eta - 1, i]]))
            .collect();
        let kern = &self.hyper.kernel;
        let mut total = 0.0;
        for &(i, di) in &diff {
            let xi = &self.samples[i].features;
            for &(j, dj) in &diff {
                total += di * dj * (kern.eval_unchecked(xi, &self.samples[j].features) + 1.0);
            }
        }
        Ok(total.max(0.0))
    }

    /// Largest `|y_i f_{μ(i)}(x_i) + α_i/C − ρ|` over support vectors.
    pub fn kkt_residual(&self) -> f64 {
        let mu = self.coupling.assignment();
        (0..self.alpha.len())
            .filter(|&i| self.alpha[i] > SUPPORT_THRESHOLD)
            .map(|i| {
                let s = &self.samples[i];
                let f = self.decision_unchecked(mu[i] - 1, &s.features);
                (s.label.sign() * f + self.alpha[i] / self.hyper.c - self.rho).abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn to_json_writer<W: Write>(&self, writer: W, config: Option<serde_json::Value>) -> Result<()> {
        let file = ModelFile {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            hyper: self.hyper,
            k: self.k(),
            m: self.m(),
            d: self.d,
            samples: self.samples.clone(),
            alpha: self.alpha.clone(),
            rho: self.rho,
            m_inv: self
                .coupling
                .inverse()
                .rows()
                .into_iter()
                .map(|r| r.to_vec())
                .collect(),
            objective: self.objective,
            kkt_gap: self.kkt_gap,
            iterations: self.iterations,
            warnings: self.warnings.clone(),
            config,
        };
        serde_json::to_writer_pretty(writer, &file)?;
        Ok(())
    }

    pub fn to_json_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.to_json_writer(&mut buf, None)?;
        Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
    }

    /// Restores a model written by [`TrainedModel::to_json_writer`]. Decision
    /// values of the restored model are bit-identical to the original.
    pub fn from_json_reader<R: Read>(reader: R) -> Result<Self> {
        let file: ModelFile = serde_json::from_reader(reader)?;
        Self::from_file(file)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Self::from_file(serde_json::from_str(s)?)
    }

    fn from_file(file: ModelFile) -> Result<Self> {
        if file.format != MODEL_FORMAT {
            return Err(Error::input(format!("not a model file (format {:?})", file.format)));
        }
        if file.version != MODEL_VERSION {
            return Err(Error::input(format!("unsupported model version {}", file.version)));
        }
        file.hyper.validate()?;
        let n = file.samples.len();
        if file.alpha.len() != n {
            return Err(Error::input("alpha length does not match sample count"));
        }
        let windows = file.k * file.m;
        if file.m_inv.len() != windows || file.m_inv.iter().any(|r| r.len() != windows) {
            return Err(Error::input("m_inv has the wrong shape"));
        }
        let stream = MultiTaskStream::new(file.samples, file.k, file.m)?;
        if stream.d() != file.d {
            return Err(Error::input("sample dimension does not match d"));
        }
        let mut coupling = CouplingStructure::build(&stream, file.hyper.gamma, file.hyper.lambda)?;
        let inv = Array2::from_shape_fn((windows, windows), |(a, b)| file.m_inv[a][b]);
        coupling.set_inverse(inv);
        let y = stream.labels();
        let beta = expansion_weights(&coupling, &file.alpha, &y);
        let support = (0..n).filter(|&i| file.alpha[i] > 0.0).collect();
        Ok(TrainedModel {
            hyper: file.hyper,
            coupling,
            samples: stream.into_samples(),
            d: file.d,
            alpha: file.alpha,
            rho: file.rho,
            beta,
            support,
            objective: file.objective,
            kkt_gap: file.kkt_gap,
            iterations: file.iterations,
            warnings: file.warnings,
        })
    }
}

const MODEL_FORMAT: &str = "dcsvm-model";
const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    hyper: HyperParams,
    k: usize,
    m: usize,
    d: usize,
    samples: Vec<Sample>,
    alpha: Vec<f64>,
    rho: f64,
    m_inv: Vec<Vec<f64>>,
    objective: f64,
    kkt_gap: f64,
    iterations: usize,
    #[serde(default)]
    warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    config: Option<serde_json::Value>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernelcore::KernelSpec;
    use approx::assert_abs_diff_eq;
    use ndarray::arr2;

    fn sample(x: &[f64], y: i8, task: usize, time: usize) -> Sample {
        Sample::new(x.to_vec(), Label::try_from(y).unwrap(), task, time)
    }

    fn tight() -> SolverOptions {
        SolverOptions::absolute(1e-12)
    }

    #[test]
    fn assemble_q_single_window() {
        let cs = CouplingStructure::from_parts(1, 1, vec![1, 1], 0.0, 0.0).unwrap();
        let q = assemble_q(&cs, &arr2(&[[2.0, 1.0], [1.0, 2.0]]), &[1.0, -1.0], 1.0).unwrap();
        assert_eq!(q, arr2(&[[3.0, -1.0], [-1.0, 3.0]]));
    }

    #[test]
    fn assemble_q_cross_window_weight() {
        // m = 1, k = 2, lambda = 1: Minv = [[2, 1], [1, 2]] / 3
        let cs = CouplingStructure::from_parts(2, 1, vec![1, 2], 0.0, 1.0).unwrap();
        let q = assemble_q(&cs, &arr2(&[[1.0, 1.0], [1.0, 1.0]]), &[1.0, 1.0], 1.0).unwrap();
        assert_abs_diff_eq!(q[[0, 1]], 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q[[0, 0]], 2.0 / 3.0 + 1.0, epsilon = 1e-15);
    }

    #[test]
    fn assemble_q_has_no_cross_task_terms_without_external_coupling() {
        let mu: Vec<usize> = (0..12).map(|i| i % 6 + 1).collect();
        let cs = CouplingStructure::from_parts(2, 3, mu.clone(), 4.0, 0.0).unwrap();
        let n = mu.len();
        let kaug = Array2::from_shape_fn((n, n), |(i, j)| 1.0 + 1.0 / (1.0 + (i + j) as f64));
        let y: Vec<f64> = (0..n).map(|i| if i % 3 == 0 { -1.0 } else { 1.0 }).collect();
        let q = assemble_q(&cs, &kaug, &y, 2.0).unwrap();
        for i in 0..n {
            for j in 0..n {
                // task of window w (1-based) is (w - 1) % k
                if i != j && (mu[i] - 1) % 2 != (mu[j] - 1) % 2 {
                    assert_eq!(q[[i, j]], 0.0);
                }
            }
        }
    }

    fn separable() -> MultiTaskStream {
        MultiTaskStream::new(
            vec![
                sample(&[2.0, 1.0], 1, 1, 1),
                sample(&[-2.0, -1.0], -1, 1, 1),
                sample(&[1.5, 2.0], 1, 2, 1),
                sample(&[-1.0, -2.5], -1, 2, 1),
            ],
            2,
            1,
        )
        .unwrap()
    }

    #[test]
    fn fit_separable_two_tasks() {
        let st = separable();
        let h = HyperParams::new(10.0, KernelSpec::Linear, 1.0, 1.0).unwrap();
        let model = fit(&st, &h).unwrap();
        assert_abs_diff_eq!(model.alpha().iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        for s in st.samples() {
            assert_eq!(model.predict(s.task, s.time, &s.features).unwrap().label, s.label);
        }
        assert!(model.rho().is_finite());
        assert!(model.kkt_residual() < 1e-4);
        assert!(model.warnings().is_empty());
    }

    #[test]
    fn decision_reads_off_inverse_rows() {
        // Two samples, one per window, m = 1, k = 2, lambda = 1.
        let st = MultiTaskStream::new(
            vec![sample(&[1.0], 1, 1, 1), sample(&[-1.0], 1, 2, 1)],
            2,
            1,
        )
        .unwrap();
        let h = HyperParams::new(1.0, KernelSpec::Linear, 0.0, 1.0).unwrap();
        let model = fit_with(&st, &h, None, &tight()).unwrap();
        let a = model.alpha();
        let probe = [0.3];
        let k0 = 1.0 * 0.3 + 1.0;
        let k1 = -1.0 * 0.3 + 1.0;
        let f1 = model.decision(1, &probe).unwrap();
        assert_abs_diff_eq!(f1, 2.0 / 3.0 * a[0] * k0 + 1.0 / 3.0 * a[1] * k1, epsilon = 1e-14);
        let f2 = model.decision(2, &probe).unwrap();
        assert_abs_diff_eq!(f2, 1.0 / 3.0 * a[0] * k0 + 2.0 / 3.0 * a[1] * k1, epsilon = 1e-14);
        assert!(model.decision(3, &probe).is_err());
        assert!(model.decision(0, &probe).is_err());
    }

    #[test]
    fn negated_labels_negate_decisions() {
        let st = separable();
        let flipped = MultiTaskStream::new(
            st.samples()
                .iter()
                .map(|s| Sample {
                    label: s.label.flipped(),
                    ..s.clone()
                })
                .collect(),
            2,
            1,
        )
        .unwrap();
        let h = HyperParams::new(3.0, KernelSpec::gaussian(1.0).unwrap(), 1.0, 2.0).unwrap();
        let a = fit(&st, &h).unwrap();
        let b = fit(&flipped, &h).unwrap();
        assert_eq!(a.alpha(), b.alpha());
        for x in [[0.0, 0.0], [1.0, -3.0], [0.2, 0.7]] {
            for w in 1..=2 {
                assert_abs_diff_eq!(
                    a.decision(w, &x).unwrap(),
                    -b.decision(w, &x).unwrap(),
                    epsilon = 1e-14
                );
            }
        }
    }

    #[test]
    fn predict_clamps_time_and_breaks_ties_positive() {
        assert_eq!(Prediction::from_score(0.7).label, Label::Positive);
        assert_eq!(Prediction::from_score(-0.7).label, Label::Negative);
        assert_eq!(Prediction::from_score(0.0).label, Label::Positive);

        let samples = (1..=3)
            .flat_map(|t| {
                let s = t as f64;
                [sample(&[s, 1.0], 1, 1, t), sample(&[-s, -1.0], -1, 1, t)]
            })
            .collect();
        let st = MultiTaskStream::new(samples, 1, 3).unwrap();
        let model = fit(&st, &HyperParams::new(1.0, KernelSpec::Linear, 1.0, 0.0).unwrap()).unwrap();
        let x = [0.4, -0.2];
        let late = model.predict(1, 3 + 3, &x).unwrap();
        assert_eq!(late.score, model.decision(3, &x).unwrap());
        assert!(model.predict(2, 1, &x).is_err());
    }

    #[test]
    fn classifier_distance_basics() {
        let st = separable();
        let h = HyperParams::new(10.0, KernelSpec::Linear, 1.0, 1.0).unwrap();
        let model = fit(&st, &h).unwrap();
        assert_eq!(model.classifier_distance(1, 1).unwrap(), 0.0);
        let d12 = model.classifier_distance(1, 2).unwrap();
        assert!(d12 > 0.0);
        assert_eq!(d12, model.classifier_distance(2, 1).unwrap());
        assert!(model.classifier_distance(1, 3).is_err());
    }

    #[test]
    fn single_class_windows_produce_a_warning() {
        let st = MultiTaskStream::new(
            vec![sample(&[1.0], 1, 1, 1), sample(&[2.0], 1, 1, 1)],
            1,
            1,
        )
        .unwrap();
        let model = fit(&st, &HyperParams::new(1.0, KernelSpec::Linear, 0.0, 0.0).unwrap()).unwrap();
        assert_eq!(model.warnings().len(), 1);
        assert!(model.rho().is_finite());
    }

    #[test]
    fn merge_examples() {
        let st = separable();
        let (a, b) = (st.task(1).unwrap(), st.task(2).unwrap());
        let merged = merge_streams(&a, &b).unwrap();
        assert_eq!(merged.len(), a.len() + b.len());
        assert_eq!(merged.k(), 1);
        let doubled = merge_streams(&a, &a).unwrap();
        assert_eq!(doubled.cell_counts(), vec![vec![4]]);
        let three = MultiTaskStream::new(
            (1..=3).map(|t| sample(&[t as f64, 0.0], 1, 1, t)).collect(),
            1,
            3,
        )
        .unwrap();
        assert!(merge_streams(&a, &three).is_err());
        let m = fit(&merged, &HyperParams::new(1.0, KernelSpec::Linear, 1.0, 5.0).unwrap()).unwrap();
        assert_eq!(m.coupling().r_external().sum(), 0.0);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let st = separable();
        let h = HyperParams::new(2.0, KernelSpec::gaussian(0.5).unwrap(), 4.0, 8.0).unwrap();
        let model = fit(&st, &h).unwrap();
        let text = model.to_json_string().unwrap();
        let back = TrainedModel::from_json_str(&text).unwrap();
        assert_eq!(back, model);
        for x in [[0.1, 0.2], [-3.0, 1.0]] {
            for w in 1..=2 {
                assert_eq!(back.decision(w, &x).unwrap(), model.decision(w, &x).unwrap());
            }
        }
        assert!(TrainedModel::from_json_str("{\"format\": 3").is_err());
        assert!(TrainedModel::from_json_str(&text.replace("dcsvm-model", "other")).is_err());
    }
}
