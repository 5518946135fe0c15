use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Distribution of busy channels for the no-orbit model.
#[derive(Debug, Clone)]
pub struct LevelDistribution {
    pub probs: Vec<f64>,
    pub threshold: usize,
}

impl LevelDistribution {
    pub fn blocking(&self) -> f64 {
        self.probs[self.threshold..].iter().sum()
    }

    pub fn dropping(&self) -> f64 {
        *self.probs.last().unwrap()
    }
}

/// Birth–death solution of the `m = 0` chain:
/// `π_j ∝ λ^j / j!` up to the threshold `c - g`, then
/// `π_j ∝ λ^(c-g) λ_h^(j-(c-g)) / j!`. Computed in log space.
pub fn product_form_m0(params: &ModelParams) -> Result<LevelDistribution> {
    params.validate()?;
    if params.m != 0 {
        return Err(Error::Domain(format!(
            "closed form needs m = 0, got m = {}",
            params.m
        )));
    }
    let c = params.c as usize;
    let threshold = params.threshold() as usize;
    let (ln_all, ln_h, ln_nu) = (params.lambda().ln(), params.lambda_h.ln(), params.nu.ln());
    let mut log_w = Vec::with_capacity(c + 1);
    let mut acc = 0.0;
    log_w.push(acc);
    for j in 1..=c {
        let birth = if j <= threshold { ln_all } else { ln_h };
        acc += birth - ln_nu - (j as f64).ln();
        log_w.push(acc);
    }
    let top = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut probs: Vec<f64> = log_w.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    Ok(LevelDistribution { probs, threshold })
}

/// Erlang loss formula `B(load, servers)` by the stable recursion.
pub fn erlang_b(load: f64, servers: u32) -> f64 {
    (1..=servers).fold(1.0, |b, n| load * b / (n as f64 + load * b))
}
