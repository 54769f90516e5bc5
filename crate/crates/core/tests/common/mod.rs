//! Independent oracles shared by the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use nalgebra::{DMatrix, DVector};
use phs_core::finite::{FiniteTarget, TableProposal};
use phs_core::{mh_accept_log_ratio, ChainState, Target};

pub type Matrix = Vec<Vec<f64>>;

/// MH transition matrix for `f^beta`, built entry by entry from the library's
/// acceptance ratio. Rows sum to one by construction of the diagonal.
pub fn mh_kernel(target: &FiniteTarget, q: &TableProposal, beta: f64) -> Matrix {
    let n = target.len();
    let mut k = vec![vec![0.0; n]; n];
    for a in 0..n {
        let current = ChainState::new(target, a).unwrap();
        let mut off = 0.0;
        for b in 0..n {
            if a == b || q.probability(a, b) == 0.0 {
                continue;
            }
            let ratio = if beta == 1.0 {
                mh_accept_log_ratio(target, q, &current, &b).unwrap()
            } else {
                beta * (target.log_density(&b) - target.log_density(&a))
                    + q.probability(b, a).ln()
                    - q.probability(a, b).ln()
            };
            k[a][b] = q.probability(a, b) * ratio.min(0.0).exp();
            off += k[a][b];
        }
        k[a][a] = 1.0 - off;
    }
    k
}

fn idx3(n: usize, x: [usize; 3]) -> usize {
    (x[0] * n + x[1]) * n + x[2]
}

pub fn unidx3(n: usize, i: usize) -> [usize; 3] {
    [i / (n * n), (i / n) % n, i % n]
}

/// Joint kernel of one PHS iteration with three chains: partner `m` uniform in
/// {2, 3}, swap chains 1 and `m`, then one MH step of the remaining chain.
pub fn phs3_kernel(k: &Matrix) -> Matrix {
    let n = k.len();
    let size = n * n * n;
    let mut out = vec![vec![0.0; size]; size];
    for i in 0..size {
        let x = unidx3(n, i);
        for m in [1usize, 2] {
            let mut y = x;
            y.swap(0, m);
            let other = 3 - m;
            for to in 0..n {
                let mut z = y;
                z[other] = to;
                out[i][idx3(n, z)] += 0.5 * k[y[other]][to];
            }
        }
    }
    out
}

/// Two-chain parallel tempering kernels on pairs `(x, y)` indexed `x * n + y`:
/// the update step (independent MH moves at each temperature) and the swap
/// step (ordered pair uniform, tempered acceptance).
pub fn pt2_kernels(target: &FiniteTarget, q: &TableProposal, temps: [f64; 2]) -> (Matrix, Matrix) {
    let n = target.len();
    let k0 = mh_kernel(target, q, 1.0 / temps[0]);
    let k1 = mh_kernel(target, q, 1.0 / temps[1]);
    let size = n * n;
    let mut update = vec![vec![0.0; size]; size];
    let mut swap = vec![vec![0.0; size]; size];
    let lf = |s: usize| target.log_density(&s);
    for x in 0..n {
        for y in 0..n {
            for x2 in 0..n {
                for y2 in 0..n {
                    update[x * n + y][x2 * n + y2] = k0[x][x2] * k1[y][y2];
                }
            }
            let ratio = (1.0 / temps[0] - 1.0 / temps[1]) * (lf(y) - lf(x));
            let acc = ratio.min(0.0).exp();
            swap[x * n + y][y * n + x] += acc;
            swap[x * n + y][x * n + y] += 1.0 - acc;
        }
    }
    (update, swap)
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let m = b[0].len();
    let mut out = vec![vec![0.0; m]; n];
    for i in 0..n {
        for (k, bk) in b.iter().enumerate() {
            let aik = a[i][k];
            if aik != 0.0 {
                for j in 0..m {
                    out[i][j] += aik * bk[j];
                }
            }
        }
    }
    out
}

pub fn mix(a: &Matrix, b: &Matrix, wb: f64) -> Matrix {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| (1.0 - wb) * x + wb * y).collect())
        .collect()
}

pub fn left_apply(mu: &[f64], k: &Matrix) -> Vec<f64> {
    let mut out = vec![0.0; k[0].len()];
    for (i, row) in k.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            out[j] += mu[i] * v;
        }
    }
    out
}

/// Stationary distribution by a dense linear solve of `pi (P - I) = 0, sum(pi) = 1`.
pub fn stationary(p: &Matrix) -> Vec<f64> {
    let n = p.len();
    let mut a = DMatrix::from_fn(n, n, |i, j| p[j][i] - if i == j { 1.0 } else { 0.0 });
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    let x = a.lu().solve(&b).expect("singular stationary system");
    x.iter().copied().collect()
}

pub fn normalise(w: &[f64]) -> Vec<f64> {
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}

/// Adaptive Simpson quadrature.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64, m: f64, fm: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1) + rec(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    rec(f, a, fa, b, fb, m, fm, whole, tol, 50)
}

/// Composite Simpson on a fixed grid with `2k` intervals.
pub fn simpson_grid<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals + intervals % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Spearman rank correlation (average ranks for ties).
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for k in i..=j {
                r[idx[k]] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}
