//! Independent reference implementations used by the integration tests.
//!
//! Nothing here calls into the library's solver or coupling code; the
//! oracles work from the problem definitions directly.

#![allow(dead_code)]

use rand::Rng;

/// Dense row-major square matrix.
pub type Mat = Vec<Vec<f64>>;

/// Solves `a·x = b` by Gaussian elimination with partial pivoting; `None`
/// when the system is numerically singular.
pub fn gauss_solve(a: &Mat, b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-14 {
            return None;
        }
        m.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for c in col..=n {
                m[r][c] -= f * m[col][c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| m[r][c] * x[c]).sum();
        x[r] = (m[r][n] - s) / m[r][r];
    }
    Some(x)
}

pub fn quad(q: &Mat, a: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        for j in 0..a.len() {
            s += a[i] * q[i][j] * a[j];
        }
    }
    0.5 * s
}

/// Minimizes `½·αᵀQα` over the probability simplex by enumerating every
/// support set. On a support `S` the minimizer is `Q_SS⁻¹1 / (1ᵀQ_SS⁻¹1)`;
/// the best non-negative candidate is the global optimum for positive
/// definite `Q`. Exponential in `n`, so keep `n` small.
pub fn simplex_qp_oracle(q: &Mat) -> (Vec<f64>, f64) {
    let n = q.len();
    assert!(n <= 16, "oracle is exponential in n");
    let mut best: Option<(Vec<f64>, f64)> = None;
    for mask in 1u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        let sub: Mat = idx.iter().map(|&i| idx.iter().map(|&j| q[i][j]).collect()).collect();
        let Some(u) = gauss_solve(&sub, &vec![1.0; idx.len()]) else {
            continue;
        };
        let total: f64 = u.iter().sum();
        if total.abs() < 1e-300 {
            continue;
        }
        let a_sub: Vec<f64> = u.iter().map(|v| v / total).collect();
        if a_sub.iter().any(|&v| v < -1e-12) {
            continue;
        }
        let mut alpha = vec![0.0; n];
        for (&i, &v) in idx.iter().zip(&a_sub) {
            alpha[i] = v.max(0.0);
        }
        let obj = quad(q, &alpha);
        if best.as_ref().map_or(true, |(_, b)| obj < *b) {
            best = Some((alpha, obj));
        }
    }
    best.expect("a positive definite matrix has a feasible support")
}

/// `Q = A·Aᵀ + shift·I` with standard-normal-ish entries.
pub fn random_pd<R: Rng>(n: usize, shift: f64, rng: &mut R) -> Mat {
    let a: Mat = (0..n)
        .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let s: f64 = (0..n).map(|p| a[i][p] * a[j][p]).sum();
                    s + if i == j { shift } else { 0.0 }
                })
                .collect()
        })
        .collect()
}

/// Central-difference gradient of `f` at `x`.
pub fn numeric_gradient<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let mut p = x.to_vec();
            let mut m = x.to_vec();
            p[i] += h;
            m[i] -= h;
            (f(&p) - f(&m)) / (2.0 * h)
        })
        .collect()
}

/// The coupled regularizer written out pair by pair, with sub-classifier
/// `(w, b)` of task `a` at time `t` stored at index `k·(t−1) + a − 1`:
///
/// `1/(2m)·Σ(‖w‖² + b²)`
/// `+ γ/(2m)·Σ over same task, consecutive times (‖Δw‖² + Δb²)`
/// `+ λ/(2m)·Σ over same time, distinct task pairs (‖Δw‖² + Δb²)`.
pub fn coupled_regularizer(w: &[Vec<f64>], b: &[f64], k: usize, m: usize, gamma: f64, lambda: f64) -> f64 {
    let at = |task: usize, time: usize| k * (time - 1) + task - 1;
    let sq = |i: usize, j: usize| -> f64 {
        let dw: f64 = w[i].iter().zip(&w[j]).map(|(x, y)| (x - y) * (x - y)).sum();
        dw + (b[i] - b[j]) * (b[i] - b[j])
    };
    let mf = m as f64;
    let mut own = 0.0;
    for i in 0..k * m {
        own += w[i].iter().map(|x| x * x).sum::<f64>() + b[i] * b[i];
    }
    let mut internal = 0.0;
    for task in 1..=k {
        for time in 1..m {
            internal += sq(at(task, time), at(task, time + 1));
        }
    }
    let mut external = 0.0;
    for time in 1..=m {
        for a in 1..=k {
            for c in a + 1..=k {
                external += sq(at(a, time), at(c, time));
            }
        }
    }
    own / (2.0 * mf) + gamma * internal / (2.0 * mf) + lambda * external / (2.0 * mf)
}

/// `½·Σ_{μν} M_{μν}(w_μ·w_ν + b_μ b_ν)` for a library-built matrix.
pub fn matrix_form(mat: &ndarray::Array2<f64>, w: &[Vec<f64>], b: &[f64]) -> f64 {
    let n = b.len();
    let mut s = 0.0;
    for mu in 0..n {
        for nu in 0..n {
            let dot: f64 = w[mu].iter().zip(&w[nu]).map(|(x, y)| x * y).sum();
            s += mat[[mu, nu]] * (dot + b[mu] * b[nu]);
        }
    }
    0.5 * s
}

/// Converts an ndarray matrix to the oracle representation.
pub fn to_mat(a: &ndarray::Array2<f64>) -> Mat {
    a.rows().into_iter().map(|r| r.to_vec()).collect()
}

// ---------------------------------------------------------------------------
// Format fixtures for the dataset loaders

/// Gas-sensor batch files: ethylene (2) ×1936, ammonia (3) ×2565,
/// acetaldehyde (4) ×2926 and some ethanol (1) distractors, interleaved in
/// time and split over `files` files. Features encode the gas code and the
/// per-gas ordinal so order can be checked after loading.
pub fn gas_fixture(files: usize) -> Vec<String> {
    let counts = [(1u32, 300usize), (2, 1936), (3, 2565), (4, 2926)];
    let total: usize = counts.iter().map(|c| c.1).sum();
    let mut seen = [0usize; 5];
    let mut lines = Vec::with_capacity(total);
    // Round-robin by deficit keeps every gas spread over the whole series.
    for step in 0..total {
        let (gas, _) = counts
            .iter()
            .copied()
            .filter(|&(g, n)| seen[g as usize] < n)
            .min_by(|&(g1, n1), &(g2, n2)| {
                let f1 = seen[g1 as usize] as f64 / n1 as f64;
                let f2 = seen[g2 as usize] as f64 / n2 as f64;
                f1.total_cmp(&f2)
            })
            .expect("records remain");
        seen[gas as usize] += 1;
        let ord = seen[gas as usize];
        lines.push(format!(
            "{gas};{:.2} 1:{gas} 2:{ord} 3:{:.4} 128:{}",
            50.0 + (step % 7) as f64,
            (step as f64 * 0.01).sin(),
            step
        ));
    }
    let per = total.div_ceil(files);
    lines.chunks(per).map(|c| c.join("\n") + "\n").collect()
}

/// Weekly water-quality report: 724 rows, grades chosen so that exactly 409
/// have grade ≤ 3 and no other cut gives 409.
pub fn water_fixture() -> String {
    let grade_counts = [(1u8, 60usize), (2, 150), (3, 199), (4, 200), (5, 80), (6, 35)];
    let mut grades: Vec<u8> = grade_counts.iter().flat_map(|&(g, n)| std::iter::repeat(g).take(n)).collect();
    // Deterministic interleave so grades are spread over the series.
    let n = grades.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (i * 389) % n);
    grades = order.into_iter().map(|i| grades[i]).collect();
    let roman = ["I", "II", "III", "IV", "V", "劣V"];
    let mut out = String::from("year,week,pH,DO,CODMn,NH3-N,grade,previous\n");
    let mut prev = grades[0];
    for (i, &g) in grades.iter().enumerate() {
        let prev_field = if i % 2 == 0 { prev.to_string() } else { roman[prev as usize - 1].to_string() };
        out.push_str(&format!(
            "{},{},{:.2},{:.2},{:.2},{:.3},{},{}\n",
            2004 + i / 52,
            i % 52 + 1,
            7.0 + 0.5 * ((i as f64) * 0.3).sin(),
            8.0 - g as f64 * 0.5,
            3.0 + g as f64 * 0.4,
            0.1 * g as f64,
            g,
            prev_field
        ));
        prev = g;
    }
    out
}

pub const AIR_HEADER: &str =
    "Date;Time;CO(GT);PT08.S1(CO);NMHC(GT);C6H6(GT);PT08.S2(NMHC);NOx(GT);PT08.S3(NOx);NO2(GT);PT08.S4(NO2);PT08.S5(O3);T;RH;AH;;";

/// Hourly air-quality file with `rows` rows, `;` separators, decimal
/// commas, trailing empty fields, and `-200` gaps. Row 3 of `T` is a gap
/// between observed values 10 and 14; a gap appears every 97 rows in
/// `C6H6(GT)` away from the ends.
pub fn air_fixture(rows: usize) -> String {
    let mut out = String::from(AIR_HEADER);
    out.push('\n');
    for i in 0..rows {
        let f = i as f64;
        let c6h6 = if i % 97 == 50 && i + 1 < rows { -200.0 } else { 5.0 + 4.0 * (f * 0.26).sin() };
        let t = match i {
            1 => 10.0,
            2 => -200.0,
            3 => 14.0,
            _ => 15.0 + 0.1 * (i % 40) as f64,
        };
        let fields = [
            format!("{:02}/03/2004", i / 24 % 28 + 1),
            format!("{:02}.00.00", i % 24),
            "2,6".into(),
            format!("{:.0}", 1300.0 + (i % 50) as f64),
            "-200".into(),
            format!("{c6h6:.1}"),
            format!("{:.0}", 900.0 + 100.0 * (f * 0.1).cos()),
            "166".into(),
            format!("{:.0}", 1000.0 + (i % 13) as f64),
            "113".into(),
            format!("{:.0}", 1500.0 + (i % 17) as f64),
            format!("{:.0}", 1100.0 + (i % 19) as f64),
            format!("{t:.1}"),
            format!("{:.1}", 40.0 + (i % 30) as f64),
            format!("{:.4}", 0.7 + 0.001 * (i % 100) as f64),
        ];
        out.push_str(&fields.join(";").replace('.', ","));
        out.push_str(";;\n");
    }
    out
}
