//! Textual weight specifications: `pow:<p>`, `log:<eps>`, `table:<path>`.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use meanzero_core::MonotoneWeight;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub enum WeightSpec {
    Power(f64),
    Log(f64),
    Table(PathBuf),
}

impl FromStr for WeightSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, arg) = s
            .split_once(':')
            .ok_or_else(|| format!("weight `{s}` must look like pow:<p>, log:<eps> or table:<path>"))?;
        let number = |what: &str| -> Result<f64, String> {
            arg.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("{what} in `{s}` must be a finite number"))
        };
        match kind {
            "pow" => {
                let p = number("exponent")?;
                if p <= 0.0 {
                    return Err(format!("exponent in `{s}` must be > 0"));
                }
                Ok(WeightSpec::Power(p))
            }
            "log" => {
                let eps = number("shift")?;
                if eps < 0.0 {
                    return Err(format!("shift in `{s}` must be >= 0"));
                }
                Ok(WeightSpec::Log(eps))
            }
            "table" if !arg.is_empty() => Ok(WeightSpec::Table(PathBuf::from(arg))),
            _ => Err(format!(
                "unknown weight `{s}`; expected pow:<p>, log:<eps> or table:<path>"
            )),
        }
    }
}

impl fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightSpec::Power(p) => write!(f, "pow:{p}"),
            WeightSpec::Log(eps) => write!(f, "log:{eps}"),
            WeightSpec::Table(path) => write!(f, "table:{}", path.display()),
        }
    }
}

impl WeightSpec {
    /// Builds the weight on `[0, cap]`; tables carry their own domain.
    pub fn build(&self, cap: f64) -> CliResult<MonotoneWeight> {
        match self {
            WeightSpec::Power(p) => Ok(MonotoneWeight::power(*p, cap)?),
            WeightSpec::Log(eps) => Ok(MonotoneWeight::shifted_log(*eps, cap)?),
            WeightSpec::Table(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Config(format!("cannot read table {}: {e}", path.display())))?;
                Ok(MonotoneWeight::table(&parse_table(&text)?)?)
            }
        }
    }

    pub fn exponent(&self) -> Option<f64> {
        match self {
            WeightSpec::Power(p) => Some(*p),
            _ => None,
        }
    }
}

/// Two-column `x,phi` CSV, optionally preceded by the header `x,phi`.
pub fn parse_table(text: &str) -> CliResult<Vec<(f64, f64)>> {
    let mut pairs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line == "x,phi") {
            continue;
        }
        let bad = || CliError::Config(format!("table line {}: expected `x,phi`, got `{line}`", lineno + 1));
        let (x, y) = line.split_once(',').ok_or_else(bad)?;
        let x: f64 = x.trim().parse().map_err(|_| bad())?;
        let y: f64 = y.trim().parse().map_err(|_| bad())?;
        pairs.push((x, y));
    }
    Ok(pairs)
}
