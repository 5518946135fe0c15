//! Banded LU factorization with partial pivoting.
//!
//! Storage follows the LAPACK `gbtrf` convention: row `i` keeps columns
//! `i - kl ..= i + kl + ku`, the extra `kl` super-diagonals absorbing fill from
//! row interchanges.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.kl + self.ku);
        i * self.width + (j + self.kl - i)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.kl + self.ku {
            return 0.0;
        }
        self.data[self.slot(i, j)]
    }

    /// Panics if `(i, j)` lies outside the declared band.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            j + self.kl >= i && j <= i + self.ku,
            "({i}, {j}) outside band kl={} ku={}",
            self.kl,
            self.ku
        );
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    pub fn factor(mut self) -> Result<BandLu> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let mut pivots = Vec::with_capacity(n);
        let mut max_pivot = 0.0f64;
        let mut min_pivot = f64::INFINITY;
        let mut min_at = 0;

        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + kl + ku).min(n - 1);

            let mut p = k;
            let mut best = self.get(k, k).abs();
            for i in k + 1..=last_row {
                let v = self.get(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            pivots.push(p);
            if best > max_pivot {
                max_pivot = best;
            }
            if best < min_pivot {
                min_pivot = best;
                min_at = k;
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::Singular {
                    column: k,
                    pivot_ratio: 0.0,
                });
            }
            if p != k {
                for j in k..=last_col {
                    let (a, b) = (self.slot(k, j), self.slot(p, j));
                    self.data.swap(a, b);
                }
            }

            let pivot = self.data[self.slot(k, k)];
            for i in k + 1..=last_row {
                let s = self.slot(i, k);
                let l = self.data[s] / pivot;
                self.data[s] = l;
                if l == 0.0 {
                    continue;
                }
                for j in k + 1..=last_col {
                    let u = self.data[self.slot(k, j)];
                    if u != 0.0 {
                        let t = self.slot(i, j);
                        self.data[t] -= l * u;
                    }
                }
            }
        }

        // Exact zeros are caught above; this only rejects pivots that have
        // underflowed relative to the largest one.
        let ratio = min_pivot / max_pivot;
        if ratio < 1e-280 {
            return Err(Error::Singular {
                column: min_at,
                pivot_ratio: ratio,
            });
        }
        Ok(BandLu { lu: self, pivots })
    }
}

#[derive(Debug, Clone)]
pub struct BandLu {
    lu: BandMatrix,
    pivots: Vec<usize>,
}

impl BandLu {
    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let a = &self.lu;
        let n = a.n;
        assert_eq!(b.len(), n);
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk != 0.0 {
                for i in k + 1..=(k + a.kl).min(n - 1) {
                    b[i] -= a.get(i, k) * bk;
                }
            }
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for j in k + 1..=(k + a.kl + a.ku).min(n - 1) {
                s -= a.get(k, j) * b[j];
            }
            b[k] = s / a.get(k, k);
        }
    }

    /// Solves `A x = b` up to a positive factor: returns `e` such that the
    /// true solution is `b · 2^e`. The vector is rescaled whenever an entry
    /// grows past `2^600`, so solutions spanning more than the
    /// double range come back with their dominant part intact and the
    /// negligible part flushed to zero.
    pub fn solve_up_to_scale(&self, b: &mut [f64]) -> i32 {
        const RESCALE_BITS: i32 = 600;
        let limit = 2f64.powi(RESCALE_BITS);
        let shrink = 2f64.powi(-RESCALE_BITS);
        let mut exponent = 0;
        let rescale = |b: &mut [f64], v: f64, exponent: &mut i32| {
            if v.abs() > limit {
                b.iter_mut().for_each(|x| *x *= shrink);
                *exponent += RESCALE_BITS;
            }
        };
        let a = &self.lu;
        let n = a.n;
        assert_eq!(b.len(), n);
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk != 0.0 {
                for i in k + 1..=(k + a.kl).min(n - 1) {
                    b[i] -= a.get(i, k) * bk;
                }
            }
            let v = b[k];
            rescale(b, v, &mut exponent);
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for j in k + 1..=(k + a.kl + a.ku).min(n - 1) {
                s -= a.get(k, j) * b[j];
            }
            b[k] = s / a.get(k, k);
            let v = b[k];
            rescale(b, v, &mut exponent);
        }
        exponent
    }
}
