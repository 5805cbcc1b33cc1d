//! Shared domain types, kernels, and the canonical stream CSV format.
//!
//! A [`MultiTaskStream`] holds labelled samples for `k` correlated tasks,
//! each split into `m` consecutive time windows. Task and time indices are
//! 1-based throughout the crate so they line up with the stream CSV files.

use std::io::{Read, Write};

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A binary class label, stored strictly as ±1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Label {
    Positive,
    Negative,
}

impl Label {
    pub fn from_score(score: f64) -> Self {
        if score >= 0.0 {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Label::Positive => 1.0,
            Label::Negative => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Label::Positive => Label::Negative,
            Label::Negative => Label::Positive,
        }
    }
}

impl From<Label> for i8 {
    fn from(l: Label) -> i8 {
        match l {
            Label::Positive => 1,
            Label::Negative => -1,
        }
    }
}

impl TryFrom<i8> for Label {
    type Error = Error;

    fn try_from(v: i8) -> Result<Self> {
        match v {
            1 => Ok(Label::Positive),
            -1 => Ok(Label::Negative),
            other => Err(Error::input(format!("label must be +1 or -1, got {other}"))),
        }
    }
}

/// One labelled observation belonging to a (task, time window) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub features: Vec<f64>,
    pub label: Label,
    /// 1-based task index.
    pub task: usize,
    /// 1-based time-window index.
    pub time: usize,
}

impl Sample {
    pub fn new(features: Vec<f64>, label: Label, task: usize, time: usize) -> Self {
        Sample {
            features,
            label,
            task,
            time,
        }
    }
}

/// Ordered, windowed, labelled samples for `k` tasks over `m` windows.
///
/// Construction validates that every sample has dimension `d`, that all
/// task/time indices are in range, and that no (task, time) cell is empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiTaskStream {
    samples: Vec<Sample>,
    k: usize,
    m: usize,
    d: usize,
}

impl MultiTaskStream {
    pub fn new(samples: Vec<Sample>, k: usize, m: usize) -> Result<Self> {
        if k == 0 || m == 0 {
            return Err(Error::input("stream needs k >= 1 and m >= 1"));
        }
        let d = samples
            .first()
            .map(|s| s.features.len())
            .ok_or_else(|| Error::input("stream has no samples"))?;
        if d == 0 {
            return Err(Error::input("samples must have at least one feature"));
        }
        let mut counts = vec![0usize; k * m];
        for (i, s) in samples.iter().enumerate() {
            if s.features.len() != d {
                return Err(Error::input(format!(
                    "sample {i} has dimension {}, expected {d}",
                    s.features.len()
                )));
            }
            if s.task == 0 || s.task > k {
                return Err(Error::input(format!(
                    "sample {i} has task {} outside 1..={k}",
                    s.task
                )));
            }
            if s.time == 0 || s.time > m {
                return Err(Error::input(format!(
                    "sample {i} has time {} outside 1..={m}",
                    s.time
                )));
            }
            if s.features.iter().any(|v| !v.is_finite()) {
                return Err(Error::input(format!("sample {i} has a non-finite feature")));
            }
            counts[k * (s.time - 1) + (s.task - 1)] += 1;
        }
        if let Some(pos) = counts.iter().position(|&c| c == 0) {
            return Err(Error::input(format!(
                "empty cell: task {} time {}",
                pos % k + 1,
                pos / k + 1
            )));
        }
        Ok(MultiTaskStream { samples, k, m, d })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Sample> {
        self.samples
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn features(&self) -> Vec<&[f64]> {
        self.samples.iter().map(|s| s.features.as_slice()).collect()
    }

    pub fn labels(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.label.sign()).collect()
    }

    /// Sample count per cell, indexed `[time - 1][task - 1]`.
    pub fn cell_counts(&self) -> Vec<Vec<usize>> {
        let mut counts = vec![vec![0usize; self.k]; self.m];
        for s in &self.samples {
            counts[s.time - 1][s.task - 1] += 1;
        }
        counts
    }

    /// True when some window holds only one class (across all tasks).
    pub fn has_single_class_window(&self) -> bool {
        let mut seen = vec![(false, false); self.m];
        for s in &self.samples {
            match s.label {
                Label::Positive => seen[s.time - 1].0 = true,
                Label::Negative => seen[s.time - 1].1 = true,
            }
        }
        seen.iter().any(|&(p, n)| !(p && n))
    }

    /// Extracts one task as a single-task stream (task index becomes 1).
    pub fn task(&self, task: usize) -> Result<MultiTaskStream> {
        if task == 0 || task > self.k {
            return Err(Error::input(format!("task {task} outside 1..={}", self.k)));
        }
        let samples = self
            .samples
            .iter()
            .filter(|s| s.task == task)
            .map(|s| Sample {
                task: 1,
                ..s.clone()
            })
            .collect();
        MultiTaskStream::new(samples, 1, self.m)
    }

    /// Keeps windows `first..=last` (1-based), renumbering them from 1.
    pub fn window_range(&self, first: usize, last: usize) -> Result<MultiTaskStream> {
        if first == 0 || first > last || last > self.m {
            return Err(Error::input(format!(
                "window range {first}..={last} invalid for m = {}",
                self.m
            )));
        }
        let samples = self
            .samples
            .iter()
            .filter(|s| s.time >= first && s.time <= last)
            .map(|s| Sample {
                time: s.time - first + 1,
                ..s.clone()
            })
            .collect();
        MultiTaskStream::new(samples, self.k, last - first + 1)
    }

    /// Stacks single-task streams into one multi-task stream; stream `j`
    /// becomes task `j + 1`.
    pub fn combine_tasks(streams: &[MultiTaskStream]) -> Result<MultiTaskStream> {
        let first = streams
            .first()
            .ok_or_else(|| Error::input("no streams to combine"))?;
        let m = first.m;
        let mut samples = Vec::new();
        for (j, s) in streams.iter().enumerate() {
            if s.k != 1 {
                return Err(Error::input(format!("stream {j} is not single-task")));
            }
            if s.m != m {
                return Err(Error::input(format!(
                    "stream {j} has {} windows, expected {m}",
                    s.m
                )));
            }
            samples.extend(s.samples.iter().map(|x| Sample {
                task: j + 1,
                ..x.clone()
            }));
        }
        sort_time_major(&mut samples);
        MultiTaskStream::new(samples, streams.len(), m)
    }
}

/// Stable sort by (time, task), the canonical row order.
pub fn sort_time_major(samples: &mut [Sample]) {
    samples.sort_by_key(|s| (s.time, s.task));
}

/// Kernel choice. The Gaussian kernel is `exp(-‖x − z‖² / (2σ²))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KernelSpec {
    Linear,
    Gaussian { sigma: f64 },
}

impl KernelSpec {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        let spec = KernelSpec::Gaussian { sigma };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Gaussian { sigma } if !(sigma > 0.0 && sigma.is_finite()) => Err(
                Error::input(format!("gaussian sigma must be positive, got {sigma}")),
            ),
            _ => Ok(()),
        }
    }

    pub fn sigma(&self) -> Option<f64> {
        match *self {
            KernelSpec::Linear => None,
            KernelSpec::Gaussian { sigma } => Some(sigma),
        }
    }

    /// Evaluates without checking dimensions; callers guarantee equal lengths.
    #[inline]
    pub(crate) fn eval_unchecked(&self, x: &[f64], z: &[f64]) -> f64 {
        match *self {
            KernelSpec::Linear => x.iter().zip(z).map(|(a, b)| a * b).sum(),
            KernelSpec::Gaussian { sigma } => {
                let sq: f64 = x.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
                (-sq / (2.0 * sigma * sigma)).exp()
            }
        }
    }
}

/// Regularization and coupling weights for one fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub c: f64,
    pub kernel: KernelSpec,
    pub gamma: f64,
    pub lambda: f64,
}

impl HyperParams {
    pub fn new(c: f64, kernel: KernelSpec, gamma: f64, lambda: f64) -> Result<Self> {
        let h = HyperParams {
            c,
            kernel,
            gamma,
            lambda,
        };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::input(format!("C must be positive, got {}", self.c)));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::input(format!("gamma must be >= 0, got {}", self.gamma)));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::input(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        self.kernel.validate()
    }
}

pub fn kernel_eval(spec: &KernelSpec, x: &[f64], z: &[f64]) -> Result<f64> {
    if x.len() != z.len() {
        return Err(Error::input(format!(
            "dimension mismatch: {} vs {}",
            x.len(),
            z.len()
        )));
    }
    Ok(spec.eval_unchecked(x, z))
}

/// Gram matrix `K[i][j] = k(x_i, x_j)`. Rows are computed in parallel; the
/// result does not depend on the thread count.
pub fn kernel_matrix<X: AsRef<[f64]> + Sync>(spec: &KernelSpec, xs: &[X]) -> Result<Array2<f64>> {
    let n = xs.len();
    let d = xs
        .first()
        .map(|x| x.as_ref().len())
        .ok_or_else(|| Error::input("kernel_matrix needs at least one point"))?;
    if let Some(bad) = xs.iter().position(|x| x.as_ref().len() != d) {
        return Err(Error::input(format!(
            "dimension mismatch at point {bad}: expected {d}"
        )));
    }
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = xs[i].as_ref();
            (0..=i).map(|j| spec.eval_unchecked(xi, xs[j].as_ref())).collect()
        })
        .collect();
    let mut k = Array2::zeros((n, n));
    for (i, row) in rows.into_iter().enumerate() {
        for (j, v) in row.into_iter().enumerate() {
            k[[i, j]] = v;
            k[[j, i]] = v;
        }
    }
    Ok(k)
}

/// Adds the all-ones matrix, absorbing the per-window bias into the kernel.
pub fn augmented_kernel(k: &Array2<f64>) -> Result<Array2<f64>> {
    if k.nrows() != k.ncols() {
        return Err(Error::input(format!(
            "augmented_kernel needs a square matrix, got {}x{}",
            k.nrows(),
            k.ncols()
        )));
    }
    Ok(k + 1.0)
}

/// Writes the canonical `task,time,label,f1,...,fd` CSV, rows ordered by
/// (time, task).
pub fn write_stream_csv<W: Write>(stream: &MultiTaskStream, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["task".to_string(), "time".to_string(), "label".to_string()];
    header.extend((1..=stream.d()).map(|j| format!("f{j}")));
    w.write_record(&header)?;
    let mut order: Vec<&Sample> = stream.samples().iter().collect();
    order.sort_by_key(|s| (s.time, s.task));
    for s in order {
        let mut row = vec![
            s.task.to_string(),
            s.time.to_string(),
            match s.label {
                Label::Positive => "+1".to_string(),
                Label::Negative => "-1".to_string(),
            },
        ];
        row.extend(s.features.iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the canonical stream CSV. `k` and `m` are the largest task and time
/// indices present.
pub fn read_stream_csv<R: Read>(reader: R) -> Result<MultiTaskStream> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = r.headers()?.clone();
    let expect = ["task", "time", "label"];
    if header.len() < 4 || header.iter().take(3).ne(expect.iter().copied()) {
        return Err(Error::input(
            "stream CSV header must start with task,time,label,f1",
        ));
    }
    let d = header.len() - 3;
    let mut samples = Vec::new();
    let (mut k, mut m) = (0, 0);
    for (row, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = row + 2;
        let field = |j: usize| rec.get(j).unwrap_or("");
        let parse_idx = |j: usize, name: &str| -> Result<usize> {
            field(j)
                .parse::<usize>()
                .map_err(|_| Error::input(format!("line {line}: bad {name} {:?}", field(j))))
        };
        let task = parse_idx(0, "task")?;
        let time = parse_idx(1, "time")?;
        let label_code = field(2)
            .parse::<i8>()
            .map_err(|_| Error::input(format!("line {line}: bad label {:?}", field(2))))?;
        let label = Label::try_from(label_code)
            .map_err(|e| Error::input(format!("line {line}: {e}")))?;
        if rec.len() != d + 3 {
            return Err(Error::input(format!(
                "line {line}: expected {} fields, found {}",
                d + 3,
                rec.len()
            )));
        }
        let features = (3..3 + d)
            .map(|j| {
                field(j).parse::<f64>().map_err(|_| {
                    Error::input(format!("line {line}: bad feature {:?}", field(j)))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        k = k.max(task);
        m = m.max(time);
        samples.push(Sample::new(features, label, task, time));
    }
    MultiTaskStream::new(samples, k, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn linear_kernel_is_dot_product() {
        assert_eq!(kernel_eval(&KernelSpec::Linear, &[1.0, 2.0], &[3.0, 4.0]).unwrap(), 11.0);
    }

    #[test]
    fn gaussian_kernel_values() {
        let g = KernelSpec::gaussian(1.0).unwrap();
        assert_eq!(kernel_eval(&g, &[0.3, -2.0], &[0.3, -2.0]).unwrap(), 1.0);
        let v = kernel_eval(&g, &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(v, (-1.0f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(v, 0.36788, epsilon = 1e-5);
    }

    #[test]
    fn kernel_dimension_mismatch() {
        assert!(matches!(
            kernel_eval(&KernelSpec::Linear, &[1.0], &[1.0, 2.0]),
            Err(Error::Input(_))
        ));
        assert!(kernel_matrix(&KernelSpec::Linear, &[vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn gaussian_sigma_must_be_positive() {
        assert!(KernelSpec::gaussian(0.0).is_err());
        assert!(KernelSpec::gaussian(-1.0).is_err());
        assert!(HyperParams::new(1.0, KernelSpec::Gaussian { sigma: -2.0 }, 0.0, 0.0).is_err());
    }

    #[test]
    fn hyperparams_ranges() {
        assert!(HyperParams::new(0.0, KernelSpec::Linear, 0.0, 0.0).is_err());
        assert!(HyperParams::new(1.0, KernelSpec::Linear, -1.0, 0.0).is_err());
        assert!(HyperParams::new(1.0, KernelSpec::Linear, 0.0, -1.0).is_err());
        assert!(HyperParams::new(1.0, KernelSpec::Linear, 0.0, 0.0).is_ok());
    }

    #[test]
    fn kernel_matrix_examples() {
        let g = KernelSpec::gaussian(1.0).unwrap();
        let k = kernel_matrix(&g, &[vec![0.5, 0.5]]).unwrap();
        assert_eq!(k, ndarray::arr2(&[[1.0]]));

        let k = kernel_matrix(&KernelSpec::Linear, &[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(k, ndarray::arr2(&[[1.0, 0.0], [0.0, 1.0]]));

        let k = kernel_matrix(&g, &[vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let e = (-1.0f64).exp();
        assert_eq!(k, ndarray::arr2(&[[1.0, e], [e, 1.0]]));
    }

    #[test]
    fn augmented_kernel_examples() {
        assert_eq!(augmented_kernel(&ndarray::arr2(&[[0.0]])).unwrap(), ndarray::arr2(&[[1.0]]));
        assert_eq!(
            augmented_kernel(&ndarray::arr2(&[[1.0, 0.0], [0.0, 1.0]])).unwrap(),
            ndarray::arr2(&[[2.0, 1.0], [1.0, 2.0]])
        );
        assert_eq!(
            augmented_kernel(&Array2::zeros((3, 3))).unwrap(),
            Array2::from_elem((3, 3), 1.0)
        );
        assert!(augmented_kernel(&Array2::zeros((2, 3))).is_err());
    }

    #[test]
    fn label_codes() {
        assert_eq!(Label::try_from(1).unwrap(), Label::Positive);
        assert_eq!(Label::try_from(-1).unwrap(), Label::Negative);
        assert!(Label::try_from(0).is_err());
        assert_eq!(Label::from_score(0.0), Label::Positive);
        assert_eq!(Label::from_score(-1e-300), Label::Negative);
    }

    fn s(task: usize, time: usize, x: f64) -> Sample {
        Sample::new(vec![x], Label::Positive, task, time)
    }

    #[test]
    fn stream_rejects_empty_cells_and_bad_indices() {
        assert!(MultiTaskStream::new(vec![s(1, 1, 0.0)], 2, 1).is_err());
        assert!(MultiTaskStream::new(vec![s(3, 1, 0.0)], 2, 1).is_err());
        assert!(MultiTaskStream::new(vec![s(1, 0, 0.0)], 1, 1).is_err());
        assert!(MultiTaskStream::new(vec![], 1, 1).is_err());
        let mixed = vec![s(1, 1, 0.0), Sample::new(vec![1.0, 2.0], Label::Positive, 1, 1)];
        assert!(MultiTaskStream::new(mixed, 1, 1).is_err());
    }

    #[test]
    fn window_range_and_task_extraction() {
        let samples = (1..=3)
            .flat_map(|t| [s(1, t, t as f64), s(2, t, -(t as f64))])
            .collect();
        let st = MultiTaskStream::new(samples, 2, 3).unwrap();
        let sub = st.window_range(2, 3).unwrap();
        assert_eq!(sub.m(), 2);
        assert_eq!(sub.samples()[0].features, vec![2.0]);
        assert_eq!(sub.samples()[0].time, 1);
        let t2 = st.task(2).unwrap();
        assert_eq!(t2.k(), 1);
        assert!(t2.samples().iter().all(|x| x.features[0] < 0.0 && x.task == 1));
        let back = MultiTaskStream::combine_tasks(&[st.task(1).unwrap(), t2]).unwrap();
        assert_eq!(back, st);
    }

    #[test]
    fn csv_round_trip() {
        let samples = vec![
            Sample::new(vec![0.1, -2.5], Label::Positive, 2, 1),
            Sample::new(vec![1.0 / 3.0, 7.0], Label::Negative, 1, 1),
            Sample::new(vec![1e-300, 0.0], Label::Negative, 1, 2),
            Sample::new(vec![-4.0, 5.5], Label::Positive, 2, 2),
        ];
        let st = MultiTaskStream::new(samples, 2, 2).unwrap();
        let mut buf = Vec::new();
        write_stream_csv(&st, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("task,time,label,f1,f2\n1,1,-1,"));
        let back = read_stream_csv(buf.as_slice()).unwrap();
        let mut expect = st.into_samples();
        sort_time_major(&mut expect);
        assert_eq!(back.samples(), expect.as_slice());
    }

    #[test]
    fn csv_errors_name_the_line() {
        let bad = "task,time,label,f1\n1,1,+1,0.5\n1,1,2,0.5\n";
        let err = read_stream_csv(bad.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
        assert!(read_stream_csv("a,b,c\n".as_bytes()).is_err());
    }
}
