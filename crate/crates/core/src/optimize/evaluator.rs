use std::collections::{HashMap, HashSet};
use std::sync::Mutex;

use serde::Serialize;

use crate::error::Result;
use crate::exec::Execution;
use crate::measures::{evaluate_with, EvalOptions};
use crate::model::ModelParams;

/// One evaluated `(c, g, m)` triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point {
    pub c: u32,
    pub g: u32,
    pub m: u32,
    #[serde(rename = "P_b")]
    pub p_b: f64,
    #[serde(rename = "P_d")]
    pub p_d: f64,
}

/// Memoizing `(c, g, m) → (P_b, P_d)` at fixed traffic rates.
///
/// Every distinct triple is solved once. Triples requested since the last
/// [`Evaluator::take_trace`] form the search trace, in first-request order.
pub struct Evaluator {
    rates: ModelParams,
    opts: EvalOptions,
    exec: Execution,
    cache: Mutex<HashMap<(u32, u32, u32), Point>>,
    trace: Mutex<Trace>,
}

#[derive(Default)]
struct Trace {
    points: Vec<Point>,
    seen: HashSet<(u32, u32, u32)>,
}

impl Evaluator {
    /// `rates` supplies λ_n, λ_h, ν, p, μ_r; its `(c, g, m)` are ignored.
    pub fn new(rates: ModelParams) -> Self {
        Self {
            rates,
            opts: EvalOptions::default(),
            exec: Execution::default(),
            cache: Mutex::new(HashMap::new()),
            trace: Mutex::new(Trace::default()),
        }
    }

    pub fn with_options(mut self, opts: EvalOptions) -> Self {
        self.opts = opts;
        self
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn rates(&self) -> &ModelParams {
        &self.rates
    }

    fn compute(&self, (c, g, m): (u32, u32, u32)) -> Result<Point> {
        let pm = evaluate_with(&self.rates.with_dims(c, g, m), self.opts)?;
        Ok(Point {
            c,
            g,
            m,
            p_b: pm.p_b,
            p_d: pm.p_d,
        })
    }

    fn lookup(&self, key: (u32, u32, u32)) -> Option<Point> {
        self.cache.lock().unwrap().get(&key).copied()
    }

    fn record(&self, p: Point) {
        let mut trace = self.trace.lock().unwrap();
        if trace.seen.insert((p.c, p.g, p.m)) {
            trace.points.push(p);
        }
    }

    pub fn point(&self, c: u32, g: u32, m: u32) -> Result<Point> {
        let p = match self.lookup((c, g, m)) {
            Some(p) => p,
            None => {
                let p = self.compute((c, g, m))?;
                self.cache.lock().unwrap().insert((c, g, m), p);
                p
            }
        };
        self.record(p);
        Ok(p)
    }

    /// Evaluates a batch; cache misses are solved concurrently and recorded
    /// in input order.
    pub fn points(&self, keys: &[(u32, u32, u32)]) -> Result<Vec<Point>> {
        let mut seen = HashSet::new();
        let missing: Vec<(u32, u32, u32)> = keys
            .iter()
            .copied()
            .filter(|k| self.lookup(*k).is_none() && seen.insert(*k))
            .collect();
        let fresh = self.exec.try_map(&missing, |&k| self.compute(k))?;
        {
            let mut cache = self.cache.lock().unwrap();
            for p in fresh {
                cache.insert((p.c, p.g, p.m), p);
            }
        }
        let out: Vec<Point> = keys.iter().map(|k| self.lookup(*k).unwrap()).collect();
        out.iter().for_each(|p| self.record(*p));
        Ok(out)
    }

    /// Distinct triples solved over the evaluator's lifetime.
    pub fn evaluations(&self) -> usize {
        self.cache.lock().unwrap().len()
    }

    /// Drains the trace recorded so far.
    pub fn take_trace(&self) -> Vec<Point> {
        std::mem::take(&mut *self.trace.lock().unwrap()).points
    }
}
