use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::generator::SparseGenerator;

/// Dense solve of `Qᵀ πᵀ = 0` with the last equation replaced by `Σ π = 1`.
///
/// `O(dim³)`: meant for instances of a few hundred states.
pub fn dense_stationary(q: &SparseGenerator) -> Result<Vec<f64>> {
    let n = q.dim();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for e in q.triplets() {
        a[(e.col, e.row)] = e.value;
    }
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(n);
    b[n - 1] = 1.0;
    let x = a.lu().solve(&b).ok_or(Error::Singular {
        column: n - 1,
        pivot_ratio: 0.0,
    })?;
    Ok(x.iter().copied().collect())
}
