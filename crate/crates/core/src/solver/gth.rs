//! Grassmann–Taksar–Heyman state reduction on the banded rate matrix.
//!
//! Only additions, multiplications and divisions of non-negative numbers are
//! involved, so small probabilities keep full relative accuracy. Eliminating
//! state `n` only touches states in `[n - w, n)`, where `w` is the bandwidth,
//! so the work is `O(dim · w²)`.

use crate::error::{Error, Result};
use crate::generator::SparseGenerator;

pub(super) fn solve(q: &SparseGenerator) -> Result<Vec<f64>> {
    let n = q.dim();
    let w = q.level_width();
    let width = 2 * w + 1;
    // rates[i][j] stored at i*width + (j + w - i)
    let mut rates = vec![0.0; n * width];
    let at = |i: usize, j: usize| i * width + (j + w - i);
    for i in 0..n {
        for e in q.off_diagonal(i) {
            rates[at(i, e.col)] = e.value;
        }
    }

    let mut out_rate = vec![0.0; n];
    for last in (1..n).rev() {
        let lo = last.saturating_sub(w);
        let s: f64 = (lo..last).map(|j| rates[at(last, j)]).sum();
        if !(s > 0.0) {
            return Err(Error::Reducible {
                unreached: 1,
                dim: n,
            });
        }
        out_rate[last] = s;
        for i in lo..last {
            let to_last = rates[at(i, last)];
            if to_last == 0.0 {
                continue;
            }
            let f = to_last / s;
            for j in lo..last {
                if j != i {
                    let from_last = rates[at(last, j)];
                    if from_last != 0.0 {
                        rates[at(i, j)] += f * from_last;
                    }
                }
            }
        }
    }

    let mut pi = vec![0.0; n];
    pi[0] = 1.0;
    for k in 1..n {
        let lo = k.saturating_sub(w);
        let inflow: f64 = (lo..k).map(|i| pi[i] * rates[at(i, k)]).sum();
        pi[k] = inflow / out_rate[k];
    }
    Ok(pi)
}
