//! Pairwise coordinate descent for `min ½·αᵀQα` over the probability simplex.
//!
//! Each step moves mass from the active coordinate with the largest
//! gradient to the coordinate with the smallest gradient, using the exact
//! line-search step clipped so that `α` stays non-negative. The gradient
//! `Qα` is maintained incrementally and refreshed exactly before accepting
//! convergence.
//!
//! The KKT certificate for this problem is the spread between the largest
//! gradient on the support and the smallest gradient overall; it is zero at
//! the optimum.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Stopping threshold on the KKT gap.
    pub tol: f64,
    /// When set, the threshold is `tol · (1 + |objective|)`.
    pub relative_tol: bool,
    /// Iteration cap; `None` means `100·n²`.
    pub max_iter: Option<usize>,
    /// Record the objective after every step.
    pub record_trace: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-6,
            relative_tol: true,
            max_iter: None,
            record_trace: false,
        }
    }
}

impl SolverOptions {
    pub fn absolute(tol: f64) -> Self {
        SolverOptions {
            tol,
            relative_tol: false,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QpSolution {
    pub alpha: Vec<f64>,
    /// `½·αᵀQα` at `alpha`.
    pub objective: f64,
    pub kkt_gap: f64,
    pub iterations: usize,
    /// Objective before the first step and after each step, when requested.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<f64>,
}

fn check_square_symmetric(q: &Array2<f64>) -> Result<usize> {
    let n = q.nrows();
    if n == 0 || q.ncols() != n {
        return Err(Error::input(format!(
            "QP matrix must be square and non-empty, got {}x{}",
            q.nrows(),
            q.ncols()
        )));
    }
    for i in 0..n {
        if !q[[i, i]].is_finite() {
            return Err(Error::input(format!("QP matrix has non-finite entry at ({i}, {i})")));
        }
        for j in 0..i {
            if (q[[i, j]] - q[[j, i]]).abs() > 1e-8 {
                return Err(Error::input(format!(
                    "QP matrix not symmetric at ({i}, {j}): {} vs {}",
                    q[[i, j]],
                    q[[j, i]]
                )));
            }
        }
    }
    Ok(n)
}

fn gradient(q: &Array2<f64>, alpha: &[f64]) -> Vec<f64> {
    q.rows()
        .into_iter()
        .map(|row| row.iter().zip(alpha).map(|(a, b)| a * b).sum())
        .collect()
}

fn gap_of(grad: &[f64], alpha: &[f64]) -> f64 {
    let lo = grad.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = grad
        .iter()
        .zip(alpha)
        .filter(|(_, &a)| a > 0.0)
        .map(|(&g, _)| g)
        .fold(f64::NEG_INFINITY, f64::max);
    (hi - lo).max(0.0)
}

/// KKT gap `max_{α_j > 0} (Qα)_j − min_j (Qα)_j`.
pub fn kkt_gap(q: &Array2<f64>, alpha: &[f64]) -> f64 {
    gap_of(&gradient(q, alpha), alpha)
}

/// `½·αᵀQα`.
pub fn objective(q: &Array2<f64>, alpha: &[f64]) -> f64 {
    0.5 * gradient(q, alpha)
        .iter()
        .zip(alpha)
        .map(|(g, a)| g * a)
        .sum::<f64>()
}

/// Minimizes `½·αᵀQα` subject to `α ≥ 0`, `Σα = 1`, starting from the
/// uniform point.
pub fn solve_simplex_qp(q: &Array2<f64>, opts: &SolverOptions) -> Result<QpSolution> {
    let n = check_square_symmetric(q)?;
    if !(opts.tol > 0.0) {
        return Err(Error::input(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let max_iter = opts.max_iter.unwrap_or(100 * n * n);

    let mut alpha = vec![1.0 / n as f64; n];
    let mut grad = gradient(q, &alpha);
    let mut obj = 0.5 * grad.iter().zip(&alpha).map(|(g, a)| g * a).sum::<f64>();
    let mut trace = Vec::new();
    if opts.record_trace {
        trace.push(obj);
    }
    let threshold = |obj: f64| {
        if opts.relative_tol {
            opts.tol * (1.0 + obj.abs())
        } else {
            opts.tol
        }
    };

    let mut iterations = 0;
    loop {
        // lowest index wins ties on both sides
        let (mut lo, mut lo_g) = (0, grad[0]);
        let (mut hi, mut hi_g) = (usize::MAX, f64::NEG_INFINITY);
        for (j, (&g, &a)) in grad.iter().zip(&alpha).enumerate() {
            if g < lo_g {
                lo = j;
                lo_g = g;
            }
            if a > 0.0 && g > hi_g {
                hi = j;
                hi_g = g;
            }
        }
        let gap = hi_g - lo_g;

        if gap <= threshold(obj) {
            grad = gradient(q, &alpha);
            obj = 0.5 * grad.iter().zip(&alpha).map(|(g, a)| g * a).sum::<f64>();
            let exact = gap_of(&grad, &alpha);
            if exact <= threshold(obj) {
                return Ok(QpSolution {
                    alpha,
                    objective: obj,
                    kkt_gap: exact,
                    iterations,
                    trace,
                });
            }
            continue;
        }
        if iterations >= max_iter {
            return Err(Error::Convergence {
                iterations,
                gap: gap_of(&gradient(q, &alpha), &alpha),
            });
        }

        let curvature = q[[lo, lo]] + q[[hi, hi]] - 2.0 * q[[lo, hi]];
        let step = if curvature > 0.0 {
            (gap / curvature).min(alpha[hi])
        } else {
            alpha[hi]
        };
        alpha[lo] += step;
        if step >= alpha[hi] {
            alpha[hi] = 0.0;
        } else {
            alpha[hi] -= step;
        }
        let row_lo = q.row(lo);
        let row_hi = q.row(hi);
        for ((g, a), b) in grad.iter_mut().zip(row_lo.iter()).zip(row_hi.iter()) {
            *g += step * (a - b);
        }
        obj += -step * gap + 0.5 * step * step * curvature;
        iterations += 1;
        if opts.record_trace {
            trace.push(obj);
        }
    }
}
