//! Window assignment, coupling graphs, and the coupling matrix.
//!
//! Sub-classifiers are indexed by a window index `μ = k·(time − 1) + task`
//! (1-based, time-major). Two graphs tie them together:
//!
//! * the internal graph links the same task at adjacent times (`|μ − ν| = k`),
//! * the external graph links all tasks within the same time window.
//!
//! The coupling matrix is `M = (I + γ·L_int + λ·L_ext) / m` with `L` the
//! graph Laplacians. Its inverse weights cross-window kernel interactions in
//! the dual problem and in the decision functions.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernelcore::MultiTaskStream;

/// 1-based window index for `(task, time)` with `k` tasks.
pub fn window_of(task: usize, time: usize, k: usize) -> Result<usize> {
    if k == 0 || task == 0 || task > k || time == 0 {
        return Err(Error::input(format!(
            "window_of: task {task}, time {time} out of range for k = {k}"
        )));
    }
    Ok(k * (time - 1) + task)
}

/// Maps every sample to its 1-based window index. Depends only on each
/// sample's (task, time), never on its position in the stream.
pub fn build_assignment(stream: &MultiTaskStream) -> Result<Vec<usize>> {
    let k = stream.k();
    let mut used = vec![false; k * stream.m()];
    let mu = stream
        .samples()
        .iter()
        .map(|s| {
            let w = window_of(s.task, s.time, k)?;
            used[w - 1] = true;
            Ok(w)
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(empty) = used.iter().position(|u| !u) {
        return Err(Error::input(format!("window {} has no samples", empty + 1)));
    }
    Ok(mu)
}

/// Path graph per task: `R[μ][ν] = 1` iff `|μ − ν| = k`.
pub fn build_internal_adjacency(k: usize, m: usize) -> Array2<f64> {
    let n = k * m;
    Array2::from_shape_fn((n, n), |(a, b)| if a.abs_diff(b) == k { 1.0 } else { 0.0 })
}

/// Complete graph among the `k` tasks of each time window.
pub fn build_external_adjacency(k: usize, m: usize) -> Array2<f64> {
    let n = k * m;
    Array2::from_shape_fn((n, n), |(a, b)| {
        if a != b && a / k == b / k {
            1.0
        } else {
            0.0
        }
    })
}

/// `M = (I + γ·L_int + λ·L_ext) / m`.
pub fn build_coupling_matrix(
    gamma: f64,
    lambda: f64,
    r_internal: &Array2<f64>,
    r_external: &Array2<f64>,
    m: usize,
) -> Result<Array2<f64>> {
    if !(gamma >= 0.0) || !(lambda >= 0.0) {
        return Err(Error::input(format!(
            "coupling weights must be non-negative (gamma = {gamma}, lambda = {lambda})"
        )));
    }
    if m == 0 {
        return Err(Error::input("m must be positive"));
    }
    let n = r_internal.nrows();
    if r_internal.dim() != (n, n) || r_external.dim() != (n, n) {
        return Err(Error::input("adjacency matrices must be square and equal-sized"));
    }
    let scale = 1.0 / m as f64;
    let mut out = Array2::zeros((n, n));
    for a in 0..n {
        let mut diag = 1.0;
        for b in 0..n {
            if a == b {
                continue;
            }
            let w = gamma * r_internal[[a, b]] + lambda * r_external[[a, b]];
            diag += w;
            out[[a, b]] = -w * scale;
        }
        out[[a, a]] = diag * scale;
    }
    Ok(out)
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
pub fn cholesky(a: &Array2<f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::input("cholesky needs a square matrix"));
    }
    let mut l = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        let mut pivot = a[[j, j]];
        for p in 0..j {
            pivot -= l[[j, p]] * l[[j, p]];
        }
        if !(pivot > 0.0) {
            return Err(Error::NotPositiveDefinite { index: j, pivot });
        }
        let ljj = pivot.sqrt();
        l[[j, j]] = ljj;
        for i in j + 1..n {
            let mut s = a[[i, j]];
            for p in 0..j {
                s -= l[[i, p]] * l[[j, p]];
            }
            l[[i, j]] = s / ljj;
        }
    }
    Ok(l)
}

/// Inverse of a symmetric positive-definite matrix via Cholesky.
///
/// The result is symmetrized. Fails with [`Error::NotPositiveDefinite`]
/// naming the first non-positive pivot.
pub fn invert_spd(a: &Array2<f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::input("invert_spd needs a square matrix"));
    }
    for i in 0..n {
        for j in 0..i {
            let (x, y) = (a[[i, j]], a[[j, i]]);
            if (x - y).abs() > 1e-12 * (1.0 + x.abs().max(y.abs())) {
                return Err(Error::input(format!("matrix not symmetric at ({i}, {j})")));
            }
        }
    }
    let l = cholesky(a)?;
    // L^{-1} by forward substitution, then A^{-1} = L^{-T} L^{-1}.
    let mut linv = Array2::<f64>::zeros((n, n));
    for c in 0..n {
        linv[[c, c]] = 1.0 / l[[c, c]];
        for i in c + 1..n {
            let mut s = 0.0;
            for p in c..i {
                s -= l[[i, p]] * linv[[p, c]];
            }
            linv[[i, c]] = s / l[[i, i]];
        }
    }
    let mut inv = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (i..n).map(|p| linv[[p, i]] * linv[[p, j]]).sum();
            inv[[i, j]] = s;
            inv[[j, i]] = s;
        }
    }
    Ok(inv)
}

/// Everything the dual problem needs about how samples and windows relate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingStructure {
    k: usize,
    m: usize,
    /// 1-based window index per sample.
    mu_of: Vec<usize>,
    r_internal: Array2<f64>,
    r_external: Array2<f64>,
    matrix: Array2<f64>,
    inverse: Array2<f64>,
}

impl CouplingStructure {
    pub fn build(stream: &MultiTaskStream, gamma: f64, lambda: f64) -> Result<Self> {
        let mu_of = build_assignment(stream)?;
        Self::from_parts(stream.k(), stream.m(), mu_of, gamma, lambda)
    }

    pub fn from_parts(
        k: usize,
        m: usize,
        mu_of: Vec<usize>,
        gamma: f64,
        lambda: f64,
    ) -> Result<Self> {
        if let Some(bad) = mu_of.iter().position(|&w| w == 0 || w > k * m) {
            return Err(Error::input(format!("sample {bad} maps outside 1..={}", k * m)));
        }
        let r_internal = build_internal_adjacency(k, m);
        let r_external = build_external_adjacency(k, m);
        let matrix = build_coupling_matrix(gamma, lambda, &r_internal, &r_external, m)?;
        let inverse = invert_spd(&matrix)?;
        Ok(CouplingStructure {
            k,
            m,
            mu_of,
            r_internal,
            r_external,
            matrix,
            inverse,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn windows(&self) -> usize {
        self.k * self.m
    }

    /// 1-based window index of sample `i`.
    pub fn mu_of(&self, i: usize) -> usize {
        self.mu_of[i]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.mu_of
    }

    pub fn r_internal(&self) -> &Array2<f64> {
        &self.r_internal
    }

    pub fn r_external(&self) -> &Array2<f64> {
        &self.r_external
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    pub fn inverse(&self) -> &Array2<f64> {
        &self.inverse
    }

    /// Replaces the inverse with a previously computed one (model loading).
    pub(crate) fn set_inverse(&mut self, inverse: Array2<f64>) {
        self.inverse = inverse;
    }
}
