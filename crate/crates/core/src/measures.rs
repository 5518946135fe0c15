//! Performance measures of a stationary distribution.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::generator::build_generator;
use crate::model::ModelParams;
use crate::solver::{solve_stationary, Method, StationaryDistribution};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerformanceMeasures {
    /// New-call blocking probability.
    #[serde(rename = "P_b")]
    pub p_b: f64,
    /// Handoff dropping probability.
    #[serde(rename = "P_d")]
    pub p_d: f64,
    /// Mean busy channels.
    #[serde(rename = "M_b")]
    pub m_b: f64,
    /// Mean orbit occupancy.
    #[serde(rename = "M_o")]
    pub m_o: f64,
    /// `M_b + M_o`.
    #[serde(rename = "M_s")]
    pub m_s: f64,
}

/// Which levels contribute to the mean orbit size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OrbitSum {
    /// `E[k]` over every state.
    #[default]
    AllLevels,
    /// Skips `j = 0`, as the sum is sometimes written.
    FromLevelOne,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EvalOptions {
    pub method: Method,
    pub orbit_sum: OrbitSum,
}

/// Mass of `{(j, m) : j ≥ c - g}`: a new call finds the guard region occupied
/// and the orbit full.
pub fn blocking_probability(dist: &StationaryDistribution) -> f64 {
    let sp = dist.space();
    let m = sp.m() as usize;
    ((sp.c() - sp.g())..=sp.c())
        .map(|j| dist.pi()[sp.level_range(j).start + m])
        .sum()
}

/// Mass of level `j = c`.
pub fn dropping_probability(dist: &StationaryDistribution) -> f64 {
    let sp = dist.space();
    dist.pi()[sp.level_range(sp.c())].iter().sum()
}

pub fn mean_busy_channels(dist: &StationaryDistribution) -> f64 {
    let sp = dist.space();
    (1..=sp.c())
        .map(|j| j as f64 * dist.pi()[sp.level_range(j)].iter().sum::<f64>())
        .sum()
}

pub fn mean_orbit_occupancy(dist: &StationaryDistribution, orbit_sum: OrbitSum) -> f64 {
    let sp = dist.space();
    let first = match orbit_sum {
        OrbitSum::AllLevels => 0,
        OrbitSum::FromLevelOne => 1,
    };
    (first..=sp.c())
        .flat_map(|j| {
            dist.pi()[sp.level_range(j)]
                .iter()
                .enumerate()
                .map(|(k, p)| k as f64 * p)
        })
        .sum()
}

pub fn mean_system_size(dist: &StationaryDistribution, orbit_sum: OrbitSum) -> f64 {
    mean_busy_channels(dist) + mean_orbit_occupancy(dist, orbit_sum)
}

/// Single pass over π computing all five measures.
pub fn measures_of(dist: &StationaryDistribution, orbit_sum: OrbitSum) -> PerformanceMeasures {
    let sp = dist.space();
    let (c, threshold, m) = (sp.c(), sp.c() - sp.g(), sp.m());
    let skip_orbit_at_zero = orbit_sum == OrbitSum::FromLevelOne;
    let (mut p_b, mut p_d, mut m_b, mut m_o) = (0.0, 0.0, 0.0, 0.0);
    for j in 0..=c {
        let level = &dist.pi()[sp.level_range(j)];
        let mass: f64 = level.iter().sum();
        m_b += j as f64 * mass;
        if !(skip_orbit_at_zero && j == 0) {
            m_o += level
                .iter()
                .enumerate()
                .map(|(k, p)| k as f64 * p)
                .sum::<f64>();
        }
        if j >= threshold {
            p_b += level[m as usize];
        }
        if j == c {
            p_d = mass;
        }
    }
    PerformanceMeasures {
        p_b,
        p_d,
        m_b,
        m_o,
        m_s: m_b + m_o,
    }
}

/// Build, solve and measure with default options.
pub fn evaluate(params: &ModelParams) -> Result<PerformanceMeasures> {
    evaluate_with(params, EvalOptions::default())
}

pub fn evaluate_with(params: &ModelParams, opts: EvalOptions) -> Result<PerformanceMeasures> {
    let q = build_generator(params)?;
    let dist = solve_stationary(&q, opts.method)?;
    Ok(measures_of(&dist, opts.orbit_sum))
}
