//! Capacity planning over channels `c`, guard channels `g` and orbit size `m`.
//!
//! Four problems are covered:
//!
//! | problem | objective | constraints | solvers |
//! |---|---|---|---|
//! | O1 | min `P_b` at fixed `c` | `P_d ≤ P_d0` | [`solve_o1_alg1`] (search `m`), [`solve_o1_alg2`] (search `g`) |
//! | O2 | min `P_d` at fixed `c` | `P_b ≤ P_b0` | [`solve_o2_alg3`] (search `m`) |
//! | O3 | min `c` | both | [`solve_o3`], exhaustive or the bracketing heuristic |
//! | O4 | min `m` | both | [`solve_o4_alg5`] |
//!
//! The one-dimensional searches rely on monotonicity of the loss
//! probabilities: `P_d` is non-decreasing in `m` and non-increasing in `g`,
//! `P_b` is non-increasing in `m` and non-decreasing in `g`. Under
//! [`SearchMode::Bisection`] feasible sets are located by binary search;
//! [`SearchMode::Linear`] evaluates every candidate for auditing.

mod evaluator;

pub use evaluator::{Evaluator, Point};

use std::ops::RangeInclusive;

use serde::Serialize;

use crate::error::{Error, Result};

/// How a `c`-relative quantity (`g` or `m`) is fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Share {
    /// `⌈(x / 100) · c⌉`.
    Percent(f64),
    Exact(u32),
}

impl Share {
    pub fn resolve(self, c: u32) -> u32 {
        match self {
            Share::Percent(x) => {
                let raw = x * c as f64 / 100.0;
                // absorb representation error such as 5.000000000000001
                let v = (raw - 1e-9).ceil().max(0.0);
                (v as u32).min(c)
            }
            Share::Exact(n) => n.min(c),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct QosTargets {
    #[serde(rename = "P_d0", skip_serializing_if = "Option::is_none")]
    pub p_d0: Option<f64>,
    #[serde(rename = "P_b0", skip_serializing_if = "Option::is_none")]
    pub p_b0: Option<f64>,
}

impl QosTargets {
    pub fn dropping(p_d0: f64) -> Self {
        Self {
            p_d0: Some(p_d0),
            p_b0: None,
        }
    }

    pub fn blocking(p_b0: f64) -> Self {
        Self {
            p_d0: None,
            p_b0: Some(p_b0),
        }
    }

    pub fn both(p_d0: f64, p_b0: f64) -> Self {
        Self {
            p_d0: Some(p_d0),
            p_b0: Some(p_b0),
        }
    }

    fn bound(v: Option<f64>, name: &'static str) -> Result<f64> {
        match v {
            Some(x) if x > 0.0 && x < 1.0 => Ok(x),
            Some(x) => Err(Error::InvalidParam {
                field: name,
                reason: format!("must lie in (0, 1), got {x}"),
            }),
            None => Err(Error::Config(format!("target {name} is required"))),
        }
    }

    pub fn require_dropping(&self) -> Result<f64> {
        Self::bound(self.p_d0, "P_d0")
    }

    pub fn require_blocking(&self) -> Result<f64> {
        Self::bound(self.p_b0, "P_b0")
    }

    /// True when every present bound holds at `p`.
    pub fn satisfied_by(&self, p: &Point) -> bool {
        self.p_d0.map_or(true, |b| p.p_d <= b) && self.p_b0.map_or(true, |b| p.p_b <= b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SearchMode {
    #[default]
    Bisection,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum O3Strategy {
    #[default]
    Exhaustive,
    PaperIv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Problem {
    #[serde(rename = "o1-algI")]
    O1AlgI,
    #[serde(rename = "o1-algII")]
    O1AlgII,
    #[serde(rename = "o2")]
    O2AlgIII,
    #[serde(rename = "o3")]
    O3(O3Strategy),
    #[serde(rename = "o4")]
    O4AlgV,
}

impl Problem {
    pub fn name(&self) -> &'static str {
        match self {
            Problem::O1AlgI => "o1-algI",
            Problem::O1AlgII => "o1-algII",
            Problem::O2AlgIII => "o2",
            Problem::O3(O3Strategy::Exhaustive) => "o3",
            Problem::O3(O3Strategy::PaperIv) => "o3-paperIV",
            Problem::O4AlgV => "o4",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizationResult {
    pub problem: Problem,
    pub targets: QosTargets,
    pub feasible: bool,
    /// The optimal triple with its loss probabilities, when feasible.
    pub solution: Option<Point>,
    /// Every triple requested during the search, in first-request order.
    pub trace: Vec<Point>,
}

impl OptimizationResult {
    fn finish(problem: Problem, targets: QosTargets, solution: Option<Point>, ev: &Evaluator) -> Self {
        Self {
            problem,
            targets,
            feasible: solution.is_some(),
            solution,
            trace: ev.take_trace(),
        }
    }

    pub fn c(&self) -> Option<u32> {
        self.solution.map(|p| p.c)
    }

    pub fn g(&self) -> Option<u32> {
        self.solution.map(|p| p.g)
    }

    pub fn m(&self) -> Option<u32> {
        self.solution.map(|p| p.m)
    }
}

/// Smallest `x` in `range` with `ok(x)`, assuming `ok` is monotone
/// false→true under bisection.
fn first_true(
    ev: &Evaluator,
    mode: SearchMode,
    range: RangeInclusive<u32>,
    key: impl Fn(u32) -> (u32, u32, u32),
    ok: impl Fn(&Point) -> bool,
) -> Result<Option<Point>> {
    let (lo, hi) = (*range.start(), *range.end());
    if lo > hi {
        return Ok(None);
    }
    let eval = |x: u32| {
        let (c, g, m) = key(x);
        ev.point(c, g, m)
    };
    match mode {
        SearchMode::Linear => {
            let keys: Vec<_> = range.map(&key).collect();
            Ok(ev.points(&keys)?.into_iter().find(|p| ok(p)))
        }
        SearchMode::Bisection => {
            let top = eval(hi)?;
            if !ok(&top) {
                return Ok(None);
            }
            let first = eval(lo)?;
            if ok(&first) {
                return Ok(Some(first));
            }
            // invariant: !ok(lo), ok(hi)
            let (mut lo, mut hi, mut best) = (lo, hi, top);
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                let p = eval(mid)?;
                if ok(&p) {
                    hi = mid;
                    best = p;
                } else {
                    lo = mid;
                }
            }
            Ok(Some(best))
        }
    }
}

/// Largest `x` in `range` with `ok(x)`, assuming `ok` is monotone
/// true→false under bisection.
fn last_true(
    ev: &Evaluator,
    mode: SearchMode,
    range: RangeInclusive<u32>,
    key: impl Fn(u32) -> (u32, u32, u32),
    ok: impl Fn(&Point) -> bool,
) -> Result<Option<Point>> {
    let (lo, hi) = (*range.start(), *range.end());
    if lo > hi {
        return Ok(None);
    }
    let eval = |x: u32| {
        let (c, g, m) = key(x);
        ev.point(c, g, m)
    };
    match mode {
        SearchMode::Linear => {
            let keys: Vec<_> = range.map(&key).collect();
            Ok(ev.points(&keys)?.into_iter().rev().find(|p| ok(p)))
        }
        SearchMode::Bisection => {
            let first = eval(lo)?;
            if !ok(&first) {
                return Ok(None);
            }
            let top = eval(hi)?;
            if ok(&top) {
                return Ok(Some(top));
            }
            let (mut lo, mut hi, mut best) = (lo, hi, first);
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                let p = eval(mid)?;
                if ok(&p) {
                    lo = mid;
                    best = p;
                } else {
                    hi = mid;
                }
            }
            Ok(Some(best))
        }
    }
}

fn check_c(c: u32) -> Result<()> {
    if c == 0 {
        return Err(Error::InvalidParam {
            field: "c",
            reason: "must be at least 1".into(),
        });
    }
    Ok(())
}

/// O1 by orbit search: `g = guard.resolve(c)`, largest `m ∈ [0, m_cap]` with
/// `P_d(m, g) ≤ P_d0`.
pub fn solve_o1_alg1(
    ev: &Evaluator,
    c: u32,
    guard: Share,
    targets: QosTargets,
    m_cap: u32,
    mode: SearchMode,
) -> Result<OptimizationResult> {
    check_c(c)?;
    let p_d0 = targets.require_dropping()?;
    let g = guard.resolve(c);
    let best = last_true(ev, mode, 0..=m_cap, |m| (c, g, m), |p| p.p_d <= p_d0)?;
    Ok(OptimizationResult::finish(Problem::O1AlgI, targets, best, ev))
}

/// O1 by guard search: `m = orbit.resolve(c)`, smallest `g ∈ [0, c]` with
/// `P_d(m, g) ≤ P_d0`.
pub fn solve_o1_alg2(
    ev: &Evaluator,
    c: u32,
    orbit: Share,
    targets: QosTargets,
    mode: SearchMode,
) -> Result<OptimizationResult> {
    check_c(c)?;
    let p_d0 = targets.require_dropping()?;
    let m = orbit.resolve_unbounded(c);
    let best = first_true(ev, mode, 0..=c, |g| (c, g, m), |p| p.p_d <= p_d0)?;
    Ok(OptimizationResult::finish(Problem::O1AlgII, targets, best, ev))
}

/// O2: `g = guard.resolve(c)`, smallest `m ∈ [0, m_cap]` with
/// `P_b(m, g) ≤ P_b0`.
pub fn solve_o2_alg3(
    ev: &Evaluator,
    c: u32,
    guard: Share,
    targets: QosTargets,
    m_cap: u32,
    mode: SearchMode,
) -> Result<OptimizationResult> {
    check_c(c)?;
    let p_b0 = targets.require_blocking()?;
    let g = guard.resolve(c);
    let best = first_true(ev, mode, 0..=m_cap, |m| (c, g, m), |p| p.p_b <= p_b0)?;
    Ok(OptimizationResult::finish(Problem::O2AlgIII, targets, best, ev))
}

/// O3: smallest `c` admitting some `(m, g)` that meets both bounds.
///
/// `Exhaustive` scans `c` upward and, at each `c`, picks the feasible pair with
/// the smallest `g`, then the smallest `m`. `PaperIv` follows the bracketing
/// heuristic: start at the midpoint of the smallest `c` meeting each bound
/// with `g = 0`, then step `c` up until the `g` window
/// `[g_min(P_d), g_max(P_b)]` is non-empty, taking `g* = g_min`.
pub fn solve_o3(
    ev: &Evaluator,
    targets: QosTargets,
    strategy: O3Strategy,
    m_range: RangeInclusive<u32>,
    c_range: RangeInclusive<u32>,
    mode: SearchMode,
) -> Result<OptimizationResult> {
    let p_d0 = targets.require_dropping()?;
    let p_b0 = targets.require_blocking()?;
    if m_range.is_empty() || c_range.is_empty() {
        return Err(Error::Config("empty c or m range".into()));
    }
    check_c(*c_range.start())?;
    let best = match strategy {
        O3Strategy::Exhaustive => o3_exhaustive(ev, p_d0, p_b0, m_range, c_range, mode)?,
        O3Strategy::PaperIv => {
            let mut best: Option<Point> = None;
            for m in m_range {
                if let Some(p) = o3_bracketing(ev, p_d0, p_b0, m, c_range.clone(), mode)? {
                    let better = best.map_or(true, |b| (p.c, p.g, p.m) < (b.c, b.g, b.m));
                    if better {
                        best = Some(p);
                    }
                }
            }
            best
        }
    };
    Ok(OptimizationResult::finish(Problem::O3(strategy), targets, best, ev))
}

fn o3_exhaustive(
    ev: &Evaluator,
    p_d0: f64,
    p_b0: f64,
    m_range: RangeInclusive<u32>,
    c_range: RangeInclusive<u32>,
    mode: SearchMode,
) -> Result<Option<Point>> {
    let feasible = |p: &Point| p.p_d <= p_d0 && p.p_b <= p_b0;
    for c in c_range {
        let best = match mode {
            SearchMode::Linear => {
                let keys: Vec<_> = m_range
                    .clone()
                    .flat_map(|m| (0..=c).map(move |g| (c, g, m)))
                    .collect();
                ev.points(&keys)?
                    .into_iter()
                    .filter(feasible)
                    .min_by_key(|p| (p.g, p.m))
            }
            SearchMode::Bisection => {
                // P_b grows with g, so the smallest g meeting P_d is the only
                // candidate worth checking for each m.
                let mut best: Option<Point> = None;
                for m in m_range.clone() {
                    let g_min = first_true(ev, mode, 0..=c, |g| (c, g, m), |p| p.p_d <= p_d0)?;
                    if let Some(p) = g_min.filter(feasible) {
                        if best.map_or(true, |b| (p.g, p.m) < (b.g, b.m)) {
                            best = Some(p);
                        }
                    }
                }
                best
            }
        };
        if best.is_some() {
            return Ok(best);
        }
    }
    Ok(None)
}

fn o3_bracketing(
    ev: &Evaluator,
    p_d0: f64,
    p_b0: f64,
    m: u32,
    c_range: RangeInclusive<u32>,
    mode: SearchMode,
) -> Result<Option<Point>> {
    let c_max = *c_range.end();
    let c_d0 = first_true(ev, mode, c_range.clone(), |c| (c, 0, m), |p| p.p_d <= p_d0)?;
    let c_b0 = first_true(ev, mode, c_range.clone(), |c| (c, 0, m), |p| p.p_b <= p_b0)?;
    let (Some(cd), Some(cb)) = (c_d0, c_b0) else {
        return Ok(None);
    };
    let mut c_mid = (cd.c + cb.c).div_ceil(2);
    while c_mid <= c_max {
        let g_min = first_true(ev, mode, 0..=c_mid, |g| (c_mid, g, m), |p| p.p_d <= p_d0)?;
        let g_max = last_true(ev, mode, 0..=c_mid, |g| (c_mid, g, m), |p| p.p_b <= p_b0)?;
        if let (Some(lo), Some(hi)) = (g_min, g_max) {
            if lo.g <= hi.g {
                return Ok(Some(lo));
            }
        }
        c_mid += 1;
    }
    Ok(None)
}

/// O4: for `c` ascending, `g = guard.resolve(c)`, the smallest
/// `m ∈ [0, ⌊c/2⌋]` meeting both bounds; the first `c` with any such `m` wins.
pub fn solve_o4_alg5(
    ev: &Evaluator,
    targets: QosTargets,
    guard: Share,
    c_range: RangeInclusive<u32>,
    mode: SearchMode,
) -> Result<OptimizationResult> {
    let p_d0 = targets.require_dropping()?;
    let p_b0 = targets.require_blocking()?;
    if c_range.is_empty() {
        return Err(Error::Config("empty c range".into()));
    }
    check_c(*c_range.start())?;
    for c in c_range {
        let g = guard.resolve(c);
        // the P_b-feasible m form an up-set; its least element is the only
        // candidate since P_d grows with m
        let m_b = first_true(ev, mode, 0..=c / 2, |m| (c, g, m), |p| p.p_b <= p_b0)?;
        let hit = match mode {
            SearchMode::Bisection => m_b.filter(|p| p.p_d <= p_d0),
            SearchMode::Linear => {
                let keys: Vec<_> = (0..=c / 2).map(|m| (c, g, m)).collect();
                ev.points(&keys)?
                    .into_iter()
                    .find(|p| p.p_d <= p_d0 && p.p_b <= p_b0)
            }
        };
        if hit.is_some() {
            return Ok(OptimizationResult::finish(Problem::O4AlgV, targets, hit, ev));
        }
    }
    Ok(OptimizationResult::finish(Problem::O4AlgV, targets, None, ev))
}

impl Share {
    /// Like [`Share::resolve`] but not clamped to `c` (orbit sizes may exceed `c`).
    pub fn resolve_unbounded(self, c: u32) -> u32 {
        match self {
            Share::Percent(x) => ((x * c as f64 / 100.0) - 1e-9).ceil().max(0.0) as u32,
            Share::Exact(n) => n,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;

    fn reference() -> Evaluator {
        Evaluator::new(ModelParams::with_reference_rates(1, 0, 0))
    }

    #[test]
    fn percent_share_uses_exact_ceiling() {
        assert_eq!(Share::Percent(5.0).resolve(100), 5);
        assert_eq!(Share::Percent(5.0).resolve(105), 6);
        assert_eq!(Share::Percent(5.0).resolve(103), 6);
        assert_eq!(Share::Percent(0.0).resolve(100), 0);
        assert_eq!(Share::Percent(150.0).resolve(10), 10);
        assert_eq!(Share::Percent(150.0).resolve_unbounded(10), 15);
        assert_eq!(Share::Exact(7).resolve(5), 5);
    }

    #[test]
    fn targets_validation() {
        assert!(QosTargets::dropping(0.0).require_dropping().is_err());
        assert!(QosTargets::dropping(1.0).require_dropping().is_err());
        assert!(QosTargets::blocking(0.5).require_dropping().is_err());
        assert_eq!(QosTargets::both(0.1, 0.2).require_blocking().unwrap(), 0.2);
    }

    #[test]
    fn alg2_reproduces_zero_orbit_guard_choices() {
        let ev = reference();
        for (p_d0, g) in [(1e-2, 0), (1e-3, 3), (1e-4, 6), (1e-5, 9)] {
            let r = solve_o1_alg2(&ev, 100, Share::Percent(0.0), QosTargets::dropping(p_d0), SearchMode::Bisection).unwrap();
            assert_eq!(r.g(), Some(g), "P_d0 = {p_d0}");
            assert_eq!(r.m(), Some(0));
            assert!(!r.trace.is_empty());
        }
    }

    #[test]
    fn alg1_ceiling_and_infeasible_edges() {
        let ev = reference();
        // loose bound: constraint inactive at the ceiling
        let r = solve_o1_alg1(&ev, 20, Share::Exact(2), QosTargets::dropping(0.9), 6, SearchMode::Bisection).unwrap();
        assert_eq!(r.m(), Some(6));
        // bound below P_d(0, g): nothing qualifies
        let p0 = ev.point(20, 2, 0).unwrap().p_d;
        let r = solve_o1_alg1(&ev, 20, Share::Exact(2), QosTargets::dropping(p0 * 0.5), 6, SearchMode::Bisection).unwrap();
        assert!(!r.feasible);
        assert!(r.solution.is_none());
    }

    #[test]
    fn alg3_zero_orbit_when_already_feasible() {
        let ev = reference();
        let pb0 = ev.point(105, 5, 0).unwrap().p_b * 1.01;
        let r = solve_o2_alg3(&ev, 105, Share::Exact(5), QosTargets::blocking(pb0), 40, SearchMode::Bisection).unwrap();
        assert_eq!(r.m(), Some(0));
    }

    #[test]
    fn alg2_zero_guard_when_loose() {
        let ev = reference();
        let r = solve_o1_alg2(&ev, 60, Share::Exact(2), QosTargets::dropping(0.5), SearchMode::Bisection).unwrap();
        assert_eq!(r.g(), Some(0));
    }

    #[test]
    fn bisection_matches_linear_scan() {
        let rates = ModelParams::with_reference_rates(1, 0, 0);
        for c in [70u32, 85, 95] {
            for pd0 in [1e-2, 1e-3] {
                let a = Evaluator::new(rates);
                let b = Evaluator::new(rates);
                let t = QosTargets::dropping(pd0);
                let x = solve_o1_alg1(&a, c, Share::Percent(5.0), t, 12, SearchMode::Bisection).unwrap();
                let y = solve_o1_alg1(&b, c, Share::Percent(5.0), t, 12, SearchMode::Linear).unwrap();
                assert_eq!(x.solution, y.solution);
                let x = solve_o1_alg2(&a, c, Share::Percent(5.0), t, SearchMode::Bisection).unwrap();
                let y = solve_o1_alg2(&b, c, Share::Percent(5.0), t, SearchMode::Linear).unwrap();
                assert_eq!(x.solution, y.solution);
                let t = QosTargets::blocking(pd0 * 5.0);
                let x = solve_o2_alg3(&a, c, Share::Percent(5.0), t, 12, SearchMode::Bisection).unwrap();
                let y = solve_o2_alg3(&b, c, Share::Percent(5.0), t, 12, SearchMode::Linear).unwrap();
                assert_eq!(x.solution, y.solution);
            }
        }
    }

    #[test]
    fn o3_strategies_and_modes_agree_on_small_targets() {
        let rates = ModelParams::with_reference_rates(1, 0, 0);
        let t = QosTargets::both(1e-2, 1e-1);
        let a = solve_o3(&Evaluator::new(rates), t, O3Strategy::Exhaustive, 0..=0, 1..=200, SearchMode::Bisection).unwrap();
        let b = solve_o3(&Evaluator::new(rates), t, O3Strategy::Exhaustive, 0..=0, 1..=200, SearchMode::Linear).unwrap();
        let c = solve_o3(&Evaluator::new(rates), t, O3Strategy::PaperIv, 0..=0, 1..=200, SearchMode::Bisection).unwrap();
        assert_eq!(a.solution, b.solution);
        assert_eq!(a.c(), Some(87));
        assert_eq!(a.g(), Some(3));
        assert_eq!(c.c(), a.c());
    }

    #[test]
    fn o3_unreachable_targets_are_infeasible() {
        let r = solve_o3(&reference(), QosTargets::both(1e-30, 1e-30), O3Strategy::Exhaustive, 0..=0, 1..=10, SearchMode::Bisection).unwrap();
        assert!(!r.feasible);
        assert!(!r.trace.is_empty());
    }

    #[test]
    fn o4_loose_targets_give_empty_orbit() {
        let light = Evaluator::new(ModelParams::new(1, 0, 0, 0.1, 0.1, 1.0, 0.8, 0.5).unwrap());
        let r = solve_o4_alg5(&light, QosTargets::both(0.5, 0.5), Share::Percent(5.0), 2..=200, SearchMode::Bisection).unwrap();
        assert_eq!(r.c(), Some(2));
        assert_eq!(r.m(), Some(0));
    }

    #[test]
    fn trace_only_covers_current_run() {
        let ev = reference();
        let t = QosTargets::dropping(1e-3);
        let a = solve_o1_alg2(&ev, 100, Share::Percent(0.0), t, SearchMode::Bisection).unwrap();
        let b = solve_o1_alg2(&ev, 100, Share::Percent(0.0), t, SearchMode::Bisection).unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.solution, b.solution);
    }
}
