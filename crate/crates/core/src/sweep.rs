//! Parameter grids.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::measures::{evaluate_with, EvalOptions, PerformanceMeasures};
use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParamName {
    C,
    G,
    M,
    LambdaN,
    LambdaH,
    Nu,
    P,
    MuR,
}

impl ParamName {
    pub const ALL: [ParamName; 8] = [
        ParamName::C,
        ParamName::G,
        ParamName::M,
        ParamName::LambdaN,
        ParamName::LambdaH,
        ParamName::Nu,
        ParamName::P,
        ParamName::MuR,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ParamName::C => "c",
            ParamName::G => "g",
            ParamName::M => "m",
            ParamName::LambdaN => "lambda_n",
            ParamName::LambdaH => "lambda_h",
            ParamName::Nu => "nu",
            ParamName::P => "p",
            ParamName::MuR => "mu_r",
        }
    }

    pub fn is_integer(self) -> bool {
        matches!(self, ParamName::C | ParamName::G | ParamName::M)
    }

    /// Writes `value` into `params`. Integer fields reject non-integral or
    /// negative values; other invariants are left to `validate`.
    pub fn apply(self, params: &mut ModelParams, value: f64) -> Result<()> {
        if self.is_integer() {
            if value < 0.0 || value.fract() != 0.0 || value > u32::MAX as f64 {
                return Err(Error::InvalidParam {
                    field: self.as_str(),
                    reason: format!("must be a non-negative integer, got {value}"),
                });
            }
            let v = value as u32;
            match self {
                ParamName::C => params.c = v,
                ParamName::G => params.g = v,
                _ => params.m = v,
            }
        } else {
            let slot = match self {
                ParamName::LambdaN => &mut params.lambda_n,
                ParamName::LambdaH => &mut params.lambda_h,
                ParamName::Nu => &mut params.nu,
                ParamName::P => &mut params.p,
                _ => &mut params.mu_r,
            };
            *slot = value;
        }
        Ok(())
    }
}

impl FromStr for ParamName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().replace('-', "_");
        ParamName::ALL
            .into_iter()
            .find(|p| p.as_str() == norm)
            .ok_or_else(|| Error::Config(format!("unknown parameter `{s}`")))
    }
}

impl fmt::Display for ParamName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One grid dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub param: ParamName,
    pub values: Vec<f64>,
}

impl Axis {
    /// `start, start+step, …` up to and including `stop` (within 1e-9 steps).
    pub fn range(param: ParamName, start: f64, stop: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::Config(format!("axis {param}: step must be > 0, got {step}")));
        }
        if !(start.is_finite() && stop.is_finite()) {
            return Err(Error::Config(format!("axis {param}: bounds must be finite")));
        }
        let span = (stop - start) / step;
        let values = if span < -1e-9 {
            Vec::new()
        } else {
            let n = (span + 1e-9).floor() as usize + 1;
            (0..n)
                .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
                .collect()
        };
        Ok(Self { param, values })
    }

    pub fn list(param: ParamName, values: Vec<f64>) -> Self {
        Self { param, values }
    }
}

/// `name=start:stop:step` or `name=v1,v2,...`.
impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, spec) = s
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("axis `{s}`: expected name=start:stop:step")))?;
        let param: ParamName = name.parse()?;
        let num = |t: &str| -> Result<f64> {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("axis {param}: bad number `{t}`")))
        };
        let parts: Vec<&str> = spec.split(':').collect();
        match parts.as_slice() {
            [start, stop, step] => Axis::range(param, num(start)?, num(stop)?, num(step)?),
            [start, stop] => Axis::range(param, num(start)?, num(stop)?, 1.0),
            [list] => Ok(Axis::list(
                param,
                list.split(',').map(num).collect::<Result<Vec<_>>>()?,
            )),
            _ => Err(Error::Config(format!("axis `{s}`: expected name=start:stop:step"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    #[serde(flatten)]
    pub params: ModelParams,
    #[serde(flatten)]
    pub measures: PerformanceMeasures,
}

/// Cartesian product of the axes over `base`, first axis outermost.
pub fn grid(base: &ModelParams, axes: &[Axis]) -> Result<Vec<ModelParams>> {
    let mut points = vec![*base];
    for axis in axes {
        let mut next = Vec::with_capacity(points.len() * axis.values.len());
        for p in &points {
            for &v in &axis.values {
                let mut q = *p;
                axis.param.apply(&mut q, v)?;
                next.push(q);
            }
        }
        points = next;
    }
    if points.is_empty() {
        return Err(Error::Config("sweep grid is empty".into()));
    }
    Ok(points)
}

/// Evaluates every grid point; rows come back in grid order whatever the
/// execution mode.
pub fn run_sweep(
    base: &ModelParams,
    axes: &[Axis],
    opts: EvalOptions,
    exec: Execution,
) -> Result<Vec<SweepRow>> {
    let points = grid(base, axes)?;
    for p in &points {
        p.validate()?;
    }
    exec.try_map(&points, |p| {
        Ok(SweepRow {
            params: *p,
            measures: evaluate_with(p, opts)?,
        })
    })
}
