//! Self-check suite run by `retrialcap validate`.
//!
//! Every check compares the production pipeline against something computed
//! another way. Output is a function of the seed only.

use std::fmt;

use crate::error::Result;
use crate::exec::Execution;
use crate::generator::build_generator;
use crate::measures::{evaluate, measures_of, OrbitSum};
use crate::model::ModelParams;
use crate::oracle::{dense_stationary, product_form_m0, simulate, SimConfig};
use crate::solver::{solve_stationary, Method};

pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, Copy)]
pub struct ValidateOptions {
    pub seed: u64,
    pub sim_horizon: f64,
    /// Adds this much to one diagonal entry of each generator in the
    /// structure check.
    pub fault: Option<f64>,
    pub exec: Execution,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            sim_horizon: 5e4,
            fault: None,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            writeln!(f, "{tag} {}: {}", c.name, c.detail)?;
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        writeln!(f, "{} checks, {failed} failed", self.checks.len())
    }
}

fn small_instances() -> Vec<ModelParams> {
    let mut out = Vec::new();
    for (c, g, m) in [(1, 0, 0), (2, 1, 1), (4, 0, 3), (5, 2, 2), (8, 3, 5), (12, 4, 6)] {
        out.push(ModelParams::new(c, g, m, 2.5, 1.5, 1.0, 0.7, 0.9).unwrap());
    }
    out
}

pub fn run_validation(opts: &ValidateOptions) -> Result<ValidationReport> {
    let checks = vec![
        structure(opts)?,
        product_form(opts)?,
        dense(opts)?,
        methods_agree(opts)?,
        simulation(opts)?,
        monotonicity(opts)?,
    ];
    Ok(ValidationReport { checks })
}

fn structure(opts: &ValidateOptions) -> Result<Check> {
    let mut worst_row = 0.0f64;
    let mut ok = true;
    for p in small_instances() {
        let mut q = build_generator(&p)?;
        if let Some(delta) = opts.fault {
            q.inject_diagonal_fault(q.dim() / 2, delta);
        }
        worst_row = worst_row.max(q.max_abs_row_sum());
        ok &= q.has_valid_signs() && q.is_block_tridiagonal() && q.is_irreducible();
    }
    Ok(Check {
        name: "generator-structure",
        passed: ok && worst_row <= 1e-12,
        detail: format!("max |row sum| {worst_row:.3e}, signs/band/irreducible {ok}"),
    })
}

fn product_form(opts: &ValidateOptions) -> Result<Check> {
    let mut points = Vec::new();
    for c in [1, 5, 20, 60, 100] {
        for g in [0, c / 4, c / 2] {
            points.push(ModelParams::with_reference_rates(c, g, 0));
        }
    }
    let errs = opts.exec.try_map(&points, |p| {
        let dist = solve_stationary(&build_generator(p)?, Method::default())?;
        let exact = product_form_m0(p)?;
        Ok(dist
            .level_marginal()
            .iter()
            .zip(&exact.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    })?;
    let worst = errs.into_iter().fold(0.0, f64::max);
    Ok(Check {
        name: "product-form",
        passed: worst <= 1e-10,
        detail: format!("{} points, max error {worst:.3e}", points.len()),
    })
}

fn dense(opts: &ValidateOptions) -> Result<Check> {
    let points = small_instances();
    let errs = opts.exec.try_map(&points, |p| {
        let q = build_generator(p)?;
        let pi = solve_stationary(&q, Method::default())?;
        let reference = dense_stationary(&q)?;
        Ok(pi
            .pi()
            .iter()
            .zip(&reference)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    })?;
    let worst = errs.into_iter().fold(0.0, f64::max);
    Ok(Check {
        name: "dense-solve",
        passed: worst <= 1e-10,
        detail: format!("{} instances, max error {worst:.3e}", points.len()),
    })
}

fn methods_agree(opts: &ValidateOptions) -> Result<Check> {
    let points: Vec<ModelParams> = [(30, 3, 10), (60, 5, 20), (100, 5, 5)]
        .into_iter()
        .map(|(c, g, m)| ModelParams::with_reference_rates(c, g, m))
        .collect();
    let errs = opts.exec.try_map(&points, |p| {
        let q = build_generator(p)?;
        let a = solve_stationary(&q, Method::ReplaceColumn)?;
        let b = solve_stationary(&q, Method::Gth)?;
        Ok(a.pi()
            .iter()
            .zip(b.pi())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max))
    })?;
    let worst = errs.into_iter().fold(0.0, f64::max);
    Ok(Check {
        name: "lu-vs-gth",
        passed: worst <= 1e-9,
        detail: format!("{} instances, max difference {worst:.3e}", points.len()),
    })
}

fn simulation(opts: &ValidateOptions) -> Result<Check> {
    let points = [
        ModelParams::new(3, 1, 2, 2.0, 1.0, 1.0, 0.8, 1.0)?,
        ModelParams::new(6, 2, 4, 4.0, 2.0, 1.0, 0.6, 0.5)?,
        ModelParams::new(10, 2, 3, 6.0, 4.0, 1.0, 0.8, 0.7)?,
    ];
    let seeds: Vec<(usize, ModelParams)> = points.into_iter().enumerate().collect();
    let horizon = opts.sim_horizon;
    let outcomes = opts.exec.try_map(&seeds, |(i, p)| {
        let cfg = SimConfig::new(horizon, horizon / 50.0, opts.seed.wrapping_add(*i as u64));
        let sim = simulate(p, &cfg)?;
        let exact = evaluate(p)?;
        let pairs = [
            (sim.p_b, exact.p_b),
            (sim.p_d, exact.p_d),
            (sim.m_b, exact.m_b),
            (sim.m_o, exact.m_o),
            (sim.m_s, exact.m_s),
        ];
        let worst = pairs
            .iter()
            .map(|(e, x)| (e.mean - x).abs() / e.half_width.max(1e-300))
            .fold(0.0, f64::max);
        Ok((pairs.iter().all(|(e, x)| e.covers(*x, 3.0)), worst))
    })?;
    let passed = outcomes.iter().all(|o| o.0);
    let worst = outcomes.iter().map(|o| o.1).fold(0.0, f64::max);
    Ok(Check {
        name: "simulation-3sigma",
        passed,
        detail: format!(
            "{} configurations, horizon {horizon}, seed {}, worst deviation {worst:.2} half-widths",
            outcomes.len(),
            opts.seed
        ),
    })
}

fn monotonicity(opts: &ValidateOptions) -> Result<Check> {
    const SLACK: f64 = 1e-12;
    let mut keys = Vec::new();
    for c in 95..=99u32 {
        for g in 1..=4u32 {
            for m in 0..=5u32 {
                keys.push((c, g, m));
            }
        }
    }
    let values = opts.exec.try_map(&keys, |&(c, g, m)| {
        let p = ModelParams::with_reference_rates(c, g, m);
        let dist = solve_stationary(&build_generator(&p)?, Method::default())?;
        let pm = measures_of(&dist, OrbitSum::default());
        Ok(((c, g, m), (pm.p_b, pm.p_d)))
    })?;
    let map: std::collections::HashMap<_, _> = values.into_iter().collect();
    let mut violations = 0usize;
    for &(c, g, m) in &keys {
        let (pb, pd) = map[&(c, g, m)];
        if let Some(&(pb2, _)) = map.get(&(c + 1, g, m)) {
            violations += usize::from(pb2 > pb + SLACK);
        }
        if let Some(&(pb2, pd2)) = map.get(&(c, g + 1, m)) {
            violations += usize::from(pb2 < pb - SLACK) + usize::from(pd2 > pd + SLACK);
        }
        if let Some(&(pb2, pd2)) = map.get(&(c, g, m + 1)) {
            violations += usize::from(pb2 > pb + SLACK) + usize::from(pd2 < pd - SLACK);
        }
    }
    Ok(Check {
        name: "monotonicity",
        passed: violations == 0,
        detail: format!("{} grid points, {violations} violations", keys.len()),
    })
}
