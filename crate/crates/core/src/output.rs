//! CSV and JSON emitters.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::optimize::OptimizationResult;
use crate::sweep::SweepRow;

pub const MEASURE_COLUMNS: [&str; 13] = [
    "c", "g", "m", "lambda_n", "lambda_h", "nu", "p", "mu_r", "P_b", "P_d", "M_b", "M_o", "M_s",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Config(format!("unknown format `{other}` (csv | json)"))),
        }
    }
}

/// `printf("%.{digits}g")`: shortest of fixed and exponent notation, trailing
/// zeros removed.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if exp < -4 || exp >= digits as i32 {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn sig(x: f64) -> String {
    format_significant(x, 12)
}

pub fn write_rows<W: Write>(rows: &[SweepRow], format: Format, mut w: W) -> Result<()> {
    match format {
        Format::Csv => {
            writeln!(w, "{}", MEASURE_COLUMNS.join(","))?;
            for r in rows {
                let p = &r.params;
                let m = &r.measures;
                let fields = [
                    p.c.to_string(),
                    p.g.to_string(),
                    p.m.to_string(),
                    sig(p.lambda_n),
                    sig(p.lambda_h),
                    sig(p.nu),
                    sig(p.p),
                    sig(p.mu_r),
                    sig(m.p_b),
                    sig(m.p_d),
                    sig(m.m_b),
                    sig(m.m_o),
                    sig(m.m_s),
                ];
                writeln!(w, "{}", fields.join(","))?;
            }
        }
        Format::Json => {
            if rows.len() == 1 {
                write_json(&rows[0], &mut w)?;
            } else {
                write_json(&rows, &mut w)?;
            }
        }
    }
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized, W: Write>(value: &T, mut w: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value).map_err(std::io::Error::from)?;
    writeln!(w)?;
    Ok(())
}

pub const OPTIMIZE_COLUMNS: [&str; 7] = ["problem", "feasible", "c", "g", "m", "P_b", "P_d"];

/// One summary row; with `trace`, followed by the evaluated triples.
pub fn write_optimization<W: Write>(
    result: &OptimizationResult,
    format: Format,
    trace: bool,
    mut w: W,
) -> Result<()> {
    match format {
        Format::Json => {
            if trace {
                write_json(result, w)
            } else {
                #[derive(Serialize)]
                struct Summary<'a> {
                    #[serde(flatten)]
                    inner: &'a OptimizationResult,
                }
                let mut v = serde_json::to_value(Summary { inner: result })
                    .map_err(std::io::Error::from)?;
                v.as_object_mut().unwrap().remove("trace");
                write_json(&v, w)
            }
        }
        Format::Csv => {
            writeln!(w, "{}", OPTIMIZE_COLUMNS.join(","))?;
            let s = result.solution;
            let opt = |f: fn(&crate::optimize::Point) -> String| s.as_ref().map(f).unwrap_or_default();
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                result.problem.name(),
                result.feasible,
                opt(|p| p.c.to_string()),
                opt(|p| p.g.to_string()),
                opt(|p| p.m.to_string()),
                opt(|p| sig(p.p_b)),
                opt(|p| sig(p.p_d)),
            )?;
            if trace {
                writeln!(w)?;
                writeln!(w, "c,g,m,P_b,P_d")?;
                for p in &result.trace {
                    writeln!(w, "{},{},{},{},{}", p.c, p.g, p.m, sig(p.p_b), sig(p.p_d))?;
                }
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(format_significant(0.012528007800940901, 12), "0.0125280078009");
        assert_eq!(format_significant(80.0, 12), "80");
        assert_eq!(format_significant(0.5, 12), "0.5");
        assert_eq!(format_significant(6.45410747356427e-05, 12), "6.45410747356e-05");
        assert_eq!(format_significant(1.0 / 3.0, 12), "0.333333333333");
        assert_eq!(format_significant(123456789012345.0, 12), "1.23456789012e+14");
        assert_eq!(format_significant(-2.5, 12), "-2.5");
        assert_eq!(format_significant(0.0, 12), "0");
        assert_eq!(format_significant(0.0001, 12), "0.0001");
    }
}
