//! Reference computations that share no code with the library: the generator
//! is rebuilt from the transition rules with its own indexing and solved
//! densely.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy)]
pub struct Rates {
    pub lambda_n: f64,
    pub lambda_h: f64,
    pub nu: f64,
    pub p: f64,
    pub mu_r: f64,
}

pub const REFERENCE: Rates = Rates {
    lambda_n: 40.0,
    lambda_h: 40.0,
    nu: 1.0,
    p: 0.8,
    mu_r: 0.5,
};

/// Dense generator over states `(j, k)` with index `j * (m + 1) + k`.
pub fn dense_generator(c: usize, g: usize, m: usize, r: Rates) -> DMatrix<f64> {
    let w = m + 1;
    let n = (c + 1) * w;
    let idx = |j: usize, k: usize| j * w + k;
    let mut q = DMatrix::zeros(n, n);
    for j in 0..=c {
        for k in 0..=m {
            let from = idx(j, k);
            let mut add = |to: usize, rate: f64| q[(from, to)] += rate;
            if j < c {
                add(idx(j + 1, k), r.lambda_h);
            }
            if j + g < c {
                add(idx(j + 1, k), r.lambda_n);
            } else if k < m {
                add(idx(j, k + 1), r.lambda_n);
            }
            if j > 0 {
                add(idx(j - 1, k), j as f64 * r.nu);
            }
            if k > 0 {
                if j < c {
                    add(idx(j + 1, k - 1), k as f64 * r.p * r.mu_r);
                }
                add(idx(j, k - 1), k as f64 * (1.0 - r.p) * r.mu_r);
            }
        }
    }
    for i in 0..n {
        let s: f64 = q.row(i).iter().sum();
        q[(i, i)] = -s;
    }
    q
}

/// `π Q = 0, Σπ = 1` with the last balance equation replaced by the
/// normalization row.
pub fn dense_stationary(q: &DMatrix<f64>) -> Vec<f64> {
    let n = q.nrows();
    let mut a = q.transpose();
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    let x = a.lu().solve(&b).expect("dense system is nonsingular");
    x.iter().copied().collect()
}

/// Level distribution of the orbit-free chain, via log-space products.
pub fn product_form(c: usize, g: usize, r: Rates) -> Vec<f64> {
    let mut log_w = vec![0.0f64; c + 1];
    for j in 1..=c {
        let up = if j - 1 + g < c {
            r.lambda_n + r.lambda_h
        } else {
            r.lambda_h
        };
        log_w[j] = log_w[j - 1] + up.ln() - (j as f64 * r.nu).ln();
    }
    let max = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = log_w.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

pub fn erlang_b(load: f64, servers: usize) -> f64 {
    let mut b = 1.0;
    for n in 1..=servers {
        b = load * b / (n as f64 + load * b);
    }
    b
}

/// `(P_b, P_d, M_b, M_o)` from a stationary vector over the dense indexing.
pub fn measures(pi: &[f64], c: usize, g: usize, m: usize) -> (f64, f64, f64, f64) {
    let w = m + 1;
    let (mut pb, mut pd, mut mb, mut mo) = (0.0, 0.0, 0.0, 0.0);
    for j in 0..=c {
        for k in 0..=m {
            let x = pi[j * w + k];
            if j + g >= c && k == m {
                pb += x;
            }
            if j == c {
                pd += x;
            }
            mb += j as f64 * x;
            mo += k as f64 * x;
        }
    }
    (pb, pd, mb, mo)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
