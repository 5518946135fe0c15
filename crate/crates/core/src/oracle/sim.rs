//! Event-driven simulation of the call-level dynamics with batch-means
//! confidence intervals.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// A batch must span at least this many mean holding times `1/ν`.
pub const MIN_BATCH_HOLDING_TIMES: f64 = 10.0;
pub const MIN_BATCHES: usize = 20;

#[derive(Debug, Clone, Copy)]
pub struct SimConfig {
    pub horizon: f64,
    pub warmup: f64,
    pub seed: u64,
    pub batches: usize,
}

impl SimConfig {
    pub fn new(horizon: f64, warmup: f64, seed: u64) -> Self {
        Self {
            horizon,
            warmup,
            seed,
            batches: MIN_BATCHES,
        }
    }
}

/// Point estimate with the half-width of its 95% confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub half_width: f64,
}

impl Estimate {
    /// `|mean - value| <= sigmas · half_width`, with a 1e-12 floor for
    /// quantities that never varied during the run.
    pub fn covers(&self, value: f64, sigmas: f64) -> bool {
        (self.mean - value).abs() <= sigmas * self.half_width + 1e-12
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationResult {
    pub p_b: Estimate,
    pub p_d: Estimate,
    pub m_b: Estimate,
    pub m_o: Estimate,
    pub m_s: Estimate,
    pub simulated_time: f64,
    pub events: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Event {
    Handoff,
    NewAdmitted,
    NewToOrbit,
    Departure,
    RetrialSuccess,
    RetrialNoChannel,
    Abandon,
}

impl Event {
    fn name(self) -> &'static str {
        match self {
            Event::Handoff => "handoff",
            Event::NewAdmitted => "new_admitted",
            Event::NewToOrbit => "new_to_orbit",
            Event::Departure => "departure",
            Event::RetrialSuccess => "retrial_success",
            Event::RetrialNoChannel => "retrial_no_channel",
            Event::Abandon => "abandon",
        }
    }
}

pub fn simulate(params: &ModelParams, cfg: &SimConfig) -> Result<SimulationResult> {
    run(params, cfg, None)
}

/// Like [`simulate`], additionally writing `time,event,j,k` (state after the
/// event) for every event.
pub fn simulate_traced<W: Write>(
    params: &ModelParams,
    cfg: &SimConfig,
    trace: &mut W,
) -> Result<SimulationResult> {
    writeln!(trace, "time,event,j,k")?;
    run(params, cfg, Some(trace))
}

fn check(params: &ModelParams, cfg: &SimConfig) -> Result<()> {
    // λ_n = 0 is allowed here: the orbit then stays empty forever.
    let mut probe = *params;
    if params.lambda_n == 0.0 {
        probe.lambda_n = 1.0;
    }
    probe.validate()?;
    if !(cfg.warmup >= 0.0 && cfg.horizon > cfg.warmup && cfg.horizon.is_finite()) {
        return Err(Error::Config(format!(
            "need horizon > warmup >= 0, got horizon {} and warmup {}",
            cfg.horizon, cfg.warmup
        )));
    }
    if cfg.batches < MIN_BATCHES {
        return Err(Error::Config(format!(
            "at least {MIN_BATCHES} batches required, got {}",
            cfg.batches
        )));
    }
    let batch_len = (cfg.horizon - cfg.warmup) / cfg.batches as f64;
    if batch_len * params.nu < MIN_BATCH_HOLDING_TIMES {
        return Err(Error::Config(format!(
            "horizon too short: {} batches of length {batch_len:.3} need at least {} holding times each",
            cfg.batches, MIN_BATCH_HOLDING_TIMES
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, Default)]
struct Acc {
    blocked: f64,
    full: f64,
    busy: f64,
    orbit: f64,
}

fn run(
    params: &ModelParams,
    cfg: &SimConfig,
    mut trace: Option<&mut dyn Write>,
) -> Result<SimulationResult> {
    check(params, cfg)?;
    let (c, m, threshold) = (params.c, params.m, params.threshold());
    let batch_len = (cfg.horizon - cfg.warmup) / cfg.batches as f64;
    let mut batches = vec![Acc::default(); cfg.batches];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let (mut j, mut k) = (0u32, 0u32);
    let mut t = 0.0;
    let mut events = 0u64;
    let mut batch = 0usize;
    let mut batch_end = cfg.warmup + batch_len;

    loop {
        let handoff = if j < c { params.lambda_h } else { 0.0 };
        let new_call = if j < threshold || k < m { params.lambda_n } else { 0.0 };
        let service = j as f64 * params.nu;
        let retrial = k as f64 * params.mu_r;
        let total = handoff + new_call + service + retrial;

        let dt: f64 = rng.sample::<f64, _>(Exp1) / total;
        let next = (t + dt).min(cfg.horizon);

        // time-weighted accumulation of [t, next) across batch boundaries
        let mut from = t.max(cfg.warmup);
        while from < next {
            let until = if batch + 1 < cfg.batches {
                next.min(batch_end)
            } else {
                next
            };
            let span = until - from;
            let acc = &mut batches[batch];
            if j >= threshold && k == m {
                acc.blocked += span;
            }
            if j == c {
                acc.full += span;
            }
            acc.busy += span * j as f64;
            acc.orbit += span * k as f64;
            from = until;
            if from >= batch_end && batch + 1 < cfg.batches {
                batch += 1;
                batch_end = cfg.warmup + (batch + 1) as f64 * batch_len;
            }
        }

        t += dt;
        if t >= cfg.horizon {
            break;
        }

        let mut u = rng.random::<f64>() * total;
        let event = if u < handoff {
            j += 1;
            Event::Handoff
        } else if {
            u -= handoff;
            u < new_call
        } {
            if j < threshold {
                j += 1;
                Event::NewAdmitted
            } else {
                k += 1;
                Event::NewToOrbit
            }
        } else if {
            u -= new_call;
            u < service
        } {
            j -= 1;
            Event::Departure
        } else if rng.random::<f64>() < params.p {
            if j < c {
                j += 1;
                k -= 1;
                Event::RetrialSuccess
            } else {
                Event::RetrialNoChannel
            }
        } else {
            k -= 1;
            Event::Abandon
        };
        debug_assert!(j <= c && k <= m);
        events += 1;
        if let Some(w) = trace.as_deref_mut() {
            writeln!(w, "{t},{},{j},{k}", event.name())?;
        }
    }

    let t_quant = StudentsT::new(0.0, 1.0, (cfg.batches - 1) as f64)
        .expect("degrees of freedom positive")
        .inverse_cdf(0.975);
    let estimate = |f: fn(&Acc) -> f64| -> Estimate {
        let means: Vec<f64> = batches.iter().map(|a| f(a) / batch_len).collect();
        let n = means.len() as f64;
        let mean = means.iter().sum::<f64>() / n;
        let var = means.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Estimate {
            mean,
            half_width: t_quant * (var / n).sqrt(),
        }
    };

    Ok(SimulationResult {
        p_b: estimate(|a| a.blocked),
        p_d: estimate(|a| a.full),
        m_b: estimate(|a| a.busy),
        m_o: estimate(|a| a.orbit),
        m_s: estimate(|a| a.busy + a.orbit),
        simulated_time: cfg.horizon - cfg.warmup,
        events,
        seed: cfg.seed,
    })
}
