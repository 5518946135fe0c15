//! Stationary distribution of the generator: `πQ = 0`, `π·1 = 1`.

mod banded;
mod gth;

pub use banded::{BandLu, BandMatrix};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::SparseGenerator;
use crate::model::{State, StateSpace};

/// Entries in `[-NEGATIVE_CLAMP, 0)` are rounding noise and are set to zero.
pub const NEGATIVE_CLAMP: f64 = 1e-14;
/// Largest accepted `max |πQ|`.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// One balance equation replaced by a normalization, solved by banded
    /// LU; falls back to [`Method::Gth`] on a numerical failure.
    #[default]
    ReplaceColumn,
    /// Subtraction-free state reduction.
    Gth,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "replace-column" | "lu" => Ok(Method::ReplaceColumn),
            "gth" => Ok(Method::Gth),
            other => Err(Error::Config(format!("unknown solver method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct StationaryDistribution {
    space: StateSpace,
    pi: Vec<f64>,
    residual: f64,
    method: Method,
}

impl StationaryDistribution {
    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn prob(&self, s: State) -> f64 {
        self.pi[self.space.index(s)]
    }

    /// `max |πQ|` of the returned vector.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// The method that produced this vector (after any fallback).
    pub fn method(&self) -> Method {
        self.method
    }

    /// Marginal distribution of the number of busy channels.
    pub fn level_marginal(&self) -> Vec<f64> {
        (0..=self.space.c())
            .map(|j| self.pi[self.space.level_range(j)].iter().sum())
            .collect()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.pi
    }
}

pub fn solve_stationary(q: &SparseGenerator, method: Method) -> Result<StationaryDistribution> {
    q.check_irreducible()?;
    match method {
        Method::Gth => finish(q, gth::solve(q), Method::Gth),
        Method::ReplaceColumn => match finish(q, replace_column(q), Method::ReplaceColumn) {
            Err(e) if e.is_numerical() => finish(q, gth::solve(q), Method::Gth),
            other => other,
        },
    }
}

/// Banded LU only, without the state-reduction fallback.
pub fn solve_replace_column(q: &SparseGenerator) -> Result<StationaryDistribution> {
    q.check_irreducible()?;
    finish(q, replace_column(q), Method::ReplaceColumn)
}

fn finish(q: &SparseGenerator, raw: Result<Vec<f64>>, method: Method) -> Result<StationaryDistribution> {
    let pi = normalize(raw?)?;
    let residual = residual_norm(&pi, q);
    if !(residual <= RESIDUAL_TOLERANCE) {
        return Err(Error::Residual {
            residual,
            tolerance: RESIDUAL_TOLERANCE,
        });
    }
    Ok(StationaryDistribution {
        space: *q.space(),
        pi,
        residual,
        method,
    })
}

/// Pins one state `p` to one, drops its balance equation and solves the
/// remaining banded system `Σ_{i≠p} π_i Q[i][j] = -Q[p][j]`, `j ≠ p`.
///
/// Elimination runs in index order. A pivot is the rate of escaping from
/// its state to the not-yet-eliminated states or to `p`; computed by
/// subtraction, it stays accurate only while that escape is likely. Below
/// the mode the chain drifts upwards and above it drifts back towards `p`,
/// so `p` is placed at (an estimate of) the mode. The scaled solve absorbs
/// the remaining dynamic range.
fn replace_column(q: &SparseGenerator) -> Result<Vec<f64>> {
    let n = q.dim();
    if n == 1 {
        return Ok(vec![1.0]);
    }
    let p = estimated_mode(q);
    let shift = |i: usize| if i > p { i - 1 } else { i };
    let w = q.level_width();
    let mut a = BandMatrix::zeros(n - 1, w, w);
    let mut rhs = vec![0.0; n - 1];
    for e in q.off_diagonal(p) {
        rhs[shift(e.col)] -= e.value;
    }
    for i in (0..n).filter(|&i| i != p) {
        a.add(shift(i), shift(i), q.diagonal(i));
        for e in q.off_diagonal(i) {
            if e.col != p {
                a.add(shift(e.col), shift(i), e.value);
            }
        }
    }
    let exponent = a.factor()?.solve_up_to_scale(&mut rhs);
    let mut pi = rhs;
    pi.insert(p, 2f64.powi(-exponent));
    Ok(pi)
}

/// Coordinate ascent on `(j, k)`: each sweep takes the mode of the
/// birth-death line through the current point, first along `j` at fixed
/// `k`, then along `k` at fixed `j`, with rates read off `q`.
fn estimated_mode(q: &SparseGenerator) -> usize {
    let space = q.space();
    let at = |j: u32, k: u32| space.index(State::new(j, k));
    let line_mode = |len: u32, step: &dyn Fn(u32) -> (usize, usize)| -> u32 {
        let (mut log_w, mut best, mut arg) = (0.0f64, 0.0f64, 0u32);
        for x in 0..len {
            let (lo, hi) = step(x);
            let (up, down) = (q.get(lo, hi), q.get(hi, lo));
            if up <= 0.0 || down <= 0.0 {
                break;
            }
            log_w += up.ln() - down.ln();
            if log_w > best {
                best = log_w;
                arg = x + 1;
            }
        }
        arg
    };
    let (mut j, mut k) = (0, 0);
    for _ in 0..3 {
        j = line_mode(space.c(), &|x| (at(x, k), at(x + 1, k)));
        k = line_mode(space.m(), &|x| (at(j, x), at(j, x + 1)));
    }
    at(j, k)
}

fn normalize(mut pi: Vec<f64>) -> Result<Vec<f64>> {
    let total: f64 = pi.iter().sum();
    if !total.is_finite() || total <= 0.0 || pi.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    pi.iter_mut().for_each(|x| *x /= total);
    let mut clamped = false;
    for (index, x) in pi.iter_mut().enumerate() {
        if *x < 0.0 {
            if *x < -NEGATIVE_CLAMP {
                return Err(Error::Negative { index, value: *x });
            }
            *x = 0.0;
            clamped = true;
        }
    }
    if clamped {
        let total: f64 = pi.iter().sum();
        pi.iter_mut().for_each(|x| *x /= total);
    }
    Ok(pi)
}

/// `max_j |Σ_i π_i Q[i][j]|`.
pub fn residual_norm(pi: &[f64], q: &SparseGenerator) -> f64 {
    assert_eq!(pi.len(), q.dim(), "dimension mismatch");
    let mut acc: Vec<f64> = pi
        .iter()
        .enumerate()
        .map(|(i, p)| p * q.diagonal(i))
        .collect();
    for (i, p) in pi.iter().enumerate() {
        for e in q.off_diagonal(i) {
            acc[e.col] += p * e.value;
        }
    }
    acc.into_iter().map(f64::abs).fold(0.0, f64::max)
}
