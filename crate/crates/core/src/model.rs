//! Model parameters, the two-dimensional state space and the transition rules.
//!
//! A state `(j, k)` counts busy channels `j ∈ [0, c]` and retrial calls in the
//! orbit `k ∈ [0, m]`. States are laid out level-major: all states with the
//! same `j` are contiguous, so the generator is block-tridiagonal in `j`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scalar inputs of the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Channels in the pool.
    pub c: u32,
    /// Guard channels, usable only by handoff and retrial calls.
    pub g: u32,
    /// Orbit capacity.
    pub m: u32,
    pub lambda_n: f64,
    pub lambda_h: f64,
    /// Per-call service rate.
    pub nu: f64,
    /// Probability that a retrial attempt succeeds; otherwise the call leaves.
    pub p: f64,
    /// Per-call retrial rate.
    pub mu_r: f64,
}

impl ModelParams {
    pub const REFERENCE_LAMBDA_N: f64 = 40.0;
    pub const REFERENCE_LAMBDA_H: f64 = 40.0;
    pub const REFERENCE_NU: f64 = 1.0;
    pub const REFERENCE_P: f64 = 0.8;
    pub const REFERENCE_MU_R: f64 = 0.5;

    /// Validated constructor.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        c: u32,
        g: u32,
        m: u32,
        lambda_n: f64,
        lambda_h: f64,
        nu: f64,
        p: f64,
        mu_r: f64,
    ) -> Result<Self> {
        let params = Self {
            c,
            g,
            m,
            lambda_n,
            lambda_h,
            nu,
            p,
            mu_r,
        };
        params.validate()?;
        Ok(params)
    }

    /// The traffic setting used throughout the numerical study:
    /// λ_n = λ_h = 40, ν = 1, p = 0.8, μ_r = 0.5.
    pub fn with_reference_rates(c: u32, g: u32, m: u32) -> Self {
        Self {
            c,
            g,
            m,
            lambda_n: Self::REFERENCE_LAMBDA_N,
            lambda_h: Self::REFERENCE_LAMBDA_H,
            nu: Self::REFERENCE_NU,
            p: Self::REFERENCE_P,
            mu_r: Self::REFERENCE_MU_R,
        }
    }

    /// Same rates, different `(c, g, m)`.
    pub fn with_dims(&self, c: u32, g: u32, m: u32) -> Self {
        Self { c, g, m, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.c == 0 {
            return Err(invalid("c", "must be at least 1"));
        }
        if self.g > self.c {
            return Err(invalid("g", format!("must satisfy g <= c (g = {}, c = {})", self.g, self.c)));
        }
        positive("lambda_n", self.lambda_n)?;
        positive("lambda_h", self.lambda_h)?;
        positive("nu", self.nu)?;
        positive("mu_r", self.mu_r)?;
        if !(0.0..=1.0).contains(&self.p) {
            return Err(invalid("p", format!("must lie in [0, 1], got {}", self.p)));
        }
        Ok(())
    }

    /// Total arrival rate λ_n + λ_h.
    pub fn lambda(&self) -> f64 {
        self.lambda_n + self.lambda_h
    }

    /// Number of busy channels from which new calls are diverted to the orbit.
    pub fn threshold(&self) -> u32 {
        self.c - self.g
    }

    pub fn num_states(&self) -> u128 {
        (self.c as u128 + 1) * (self.m as u128 + 1)
    }
}

fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParam {
        field,
        reason: reason.into(),
    }
}

fn positive(field: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(field, format!("must be a positive finite number, got {v}")))
    }
}

/// `j` busy channels, `k` calls in orbit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct State {
    pub j: u32,
    pub k: u32,
}

impl State {
    pub const fn new(j: u32, k: u32) -> Self {
        Self { j, k }
    }
}

/// Level-major indexing of `{0..=c} × {0..=m}`: `index(j, k) = j·(m+1) + k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateSpace {
    c: u32,
    g: u32,
    m: u32,
}

impl StateSpace {
    pub fn new(params: &ModelParams) -> Self {
        Self {
            c: params.c,
            g: params.g,
            m: params.m,
        }
    }

    pub fn c(&self) -> u32 {
        self.c
    }

    pub fn g(&self) -> u32 {
        self.g
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Block size `m + 1`.
    pub fn level_width(&self) -> usize {
        self.m as usize + 1
    }

    pub fn num_levels(&self) -> usize {
        self.c as usize + 1
    }

    pub fn len(&self) -> usize {
        self.num_levels() * self.level_width()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, s: State) -> bool {
        s.j <= self.c && s.k <= self.m
    }

    pub fn index(&self, s: State) -> usize {
        debug_assert!(self.contains(s));
        s.j as usize * self.level_width() + s.k as usize
    }

    pub fn state(&self, index: usize) -> State {
        let w = self.level_width();
        State::new((index / w) as u32, (index % w) as u32)
    }

    pub fn level_of(&self, index: usize) -> usize {
        index / self.level_width()
    }

    /// Index range of all states with `j` busy channels.
    pub fn level_range(&self, j: u32) -> std::ops::Range<usize> {
        let w = self.level_width();
        let start = j as usize * w;
        start..start + w
    }

    pub fn states(&self) -> impl Iterator<Item = State> + '_ {
        (0..=self.c).flat_map(move |j| (0..=self.m).map(move |k| State::new(j, k)))
    }
}

/// Outgoing transitions of `s` with strictly positive rates.
///
/// Parallel edges (handoff and direct new-call admission both move `j → j+1`
/// below the guard threshold) are merged by summing their rates.
pub fn enumerate_transitions(params: &ModelParams, s: State) -> Result<Vec<(State, f64)>> {
    let space = StateSpace::new(params);
    if !space.contains(s) {
        return Err(Error::Domain(format!(
            "state ({}, {}) outside [0, {}] x [0, {}]",
            s.j, s.k, params.c, params.m
        )));
    }
    let mut out = Vec::with_capacity(5);
    for_each_transition(params, s, |to, rate| {
        if let Some(slot) = out.iter_mut().find(|(t, _)| *t == to) {
            slot.1 += rate;
        } else {
            out.push((to, rate));
        }
    });
    Ok(out)
}

/// Calls `f(target, rate)` once per active rule, without merging. Rules with a
/// zero rate (p = 0 or p = 1) are skipped.
pub(crate) fn for_each_transition(params: &ModelParams, s: State, mut f: impl FnMut(State, f64)) {
    let State { j, k } = s;
    let (c, m) = (params.c, params.m);
    let threshold = params.threshold();
    let mut emit = |to: State, rate: f64| {
        if rate > 0.0 {
            f(to, rate);
        }
    };

    // handoff arrival
    if j < c {
        emit(State::new(j + 1, k), params.lambda_h);
    }
    // new call: direct admission below the threshold, orbit at or above it
    if j < threshold {
        emit(State::new(j + 1, k), params.lambda_n);
    } else if k < m {
        emit(State::new(j, k + 1), params.lambda_n);
    }
    if j >= 1 {
        emit(State::new(j - 1, k), j as f64 * params.nu);
    }
    if k >= 1 {
        let attempt = k as f64 * params.mu_r;
        if j < c {
            emit(State::new(j + 1, k - 1), attempt * params.p);
        }
        emit(State::new(j, k - 1), attempt * (1.0 - params.p));
    }
}

/// Upper bound on every state's total outflow: λ_n + λ_h + c·ν + m·μ_r.
pub fn uniformization_constant(params: &ModelParams) -> f64 {
    params.lambda() + params.c as f64 * params.nu + params.m as f64 * params.mu_r
}
