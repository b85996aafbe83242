//! JSON report schema (version 1).
//!
//! Reals are written as shortest round-trip decimals; non-finite values
//! (for instance `log` integrals of a vanishing primitive) are written as
//! the strings `"inf"`, `"-inf"` and `"nan"`.

use std::fmt;

use meanzero_core::extremal::{EqualityCertificate, Extremal};
use meanzero_core::sampling::{CampaignReport, CheckAggregate, SamplerConfig, Scheme};
use meanzero_core::search::{ConvergenceRow, SearchResult};
use meanzero_core::Bounds;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL: &str = "meanzero";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// An `f64` whose JSON form survives non-finite values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Real(pub f64);

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v = self.0;
        if v.is_finite() {
            s.serialize_f64(v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct RealVisitor;

        impl Visitor<'_> for RealVisitor {
            type Value = Real;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or one of \"inf\", \"-inf\", \"nan\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Real, E> {
                Ok(Real(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Real, E> {
                Ok(Real(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Real, E> {
                Ok(Real(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Real, E> {
                match v {
                    "inf" => Ok(Real(f64::INFINITY)),
                    "-inf" => Ok(Real(f64::NEG_INFINITY)),
                    "nan" => Ok(Real(f64::NAN)),
                    other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
                }
            }
        }

        d.deserialize_any(RealVisitor)
    }
}

fn reals(xs: &[f64]) -> Vec<Real> {
    xs.iter().copied().map(Real).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsRecord {
    pub m: Real,
    #[serde(rename = "M")]
    pub upper: Real,
    pub peak: Real,
    pub crossover0: Real,
    pub crossover1: Real,
}

impl From<&Bounds> for BoundsRecord {
    fn from(b: &Bounds) -> Self {
        Self {
            m: Real(b.lower()),
            upper: Real(b.upper()),
            peak: Real(b.peak()),
            crossover0: Real(b.crossover0()),
            crossover1: Real(b.crossover1()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpRecord {
    pub p: Real,
    pub bound: Real,
    /// `bound / peak`.
    pub coefficient: Real,
}

/// Output of `meanzero bounds --json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub schema: u32,
    pub tool: String,
    pub version: String,
    pub command: String,
    pub bounds: BoundsRecord,
    pub weight: String,
    pub theorem1: Real,
    pub corollary1: Option<LpRecord>,
    pub corollary2: Real,
    pub proposition1: Real,
    pub perfetti: Real,
    pub thong: Real,
    pub kouba: Real,
}

/// One comparison `lhs <= rhs` with `slack = rhs - lhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub lhs: Real,
    pub rhs: Real,
    pub slack: Real,
    pub pass: bool,
}

impl CheckRecord {
    pub fn from_certificate(weight: &str, c: &EqualityCertificate) -> Vec<CheckRecord> {
        [(Extremal::F0, c.lhs_f0, c.gap_f0), (Extremal::F1, c.lhs_f1, c.gap_f1)]
            .into_iter()
            .map(|(which, lhs, gap)| CheckRecord {
                name: format!("equality[{weight}][{}]", which.name()),
                lhs: Real(lhs),
                rhs: Real(c.bound),
                slack: Real(gap),
                pass: gap.abs() <= c.tolerance,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRecord {
    pub name: String,
    pub tolerance: Real,
    pub violations: u64,
    pub min_slack: Real,
    pub argmin_seed_index: u64,
}

impl From<&CheckAggregate> for AggregateRecord {
    fn from(c: &CheckAggregate) -> Self {
        Self {
            name: c.name.clone(),
            tolerance: Real(c.tolerance),
            violations: c.violations,
            min_slack: Real(c.min_slack),
            argmin_seed_index: c.argmin_index,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionRecord {
    pub breakpoints: Vec<Real>,
    pub values: Vec<Real>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignRecord {
    pub samples: u64,
    pub extremals_included: bool,
    pub violations: u64,
    pub min_slack: Real,
    pub argmin_seed_index: u64,
    pub argmin_function: FunctionRecord,
    pub checks: Vec<AggregateRecord>,
}

impl From<&CampaignReport> for CampaignRecord {
    fn from(r: &CampaignReport) -> Self {
        Self {
            samples: r.samples,
            extremals_included: r.extremals_included,
            violations: r.violations,
            min_slack: Real(r.min_slack),
            argmin_seed_index: r.argmin_index,
            argmin_function: FunctionRecord {
                breakpoints: reals(r.argmin_function.breakpoints()),
                values: reals(r.argmin_function.values()),
            },
            checks: r.checks.iter().map(AggregateRecord::from).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerRecord {
    pub cells: usize,
    pub seed: u64,
    pub scheme: Scheme,
    pub rng: String,
}

impl SamplerRecord {
    pub fn new(cfg: &SamplerConfig, rng: &str) -> Self {
        Self {
            cells: cfg.cells,
            seed: cfg.seed,
            scheme: cfg.scheme,
            rng: rng.into(),
        }
    }
}

/// Output of `meanzero verify --report`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema: u32,
    pub tool: String,
    pub version: String,
    pub command: String,
    pub bounds: BoundsRecord,
    pub weights: Vec<String>,
    pub sampler: SamplerRecord,
    pub checks: Vec<CheckRecord>,
    pub campaign: CampaignRecord,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u64>,
}

/// Output of `meanzero search`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchRecord {
    pub schema: u32,
    pub command: String,
    pub bounds: BoundsRecord,
    pub weight: String,
    pub strategy: String,
    pub cells: usize,
    pub value: Real,
    pub bound: Real,
    pub gap: Real,
    pub certifying: bool,
    pub pattern: Option<Extremal>,
    pub evaluated: u64,
    pub best: Vec<Real>,
}

impl SearchRecord {
    pub fn new(bounds: &Bounds, weight: &str, strategy: &str, r: &SearchResult, pattern: Option<Extremal>) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            command: "search".into(),
            bounds: bounds.into(),
            weight: weight.into(),
            strategy: strategy.into(),
            cells: r.cells,
            value: Real(r.value),
            bound: Real(r.bound),
            gap: Real(r.gap),
            certifying: r.certifying,
            pattern,
            evaluated: r.evaluated,
            best: reals(r.best.values()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub cells: usize,
    pub value: Real,
    pub gap: Real,
    pub pattern: Option<Extremal>,
}

impl From<&ConvergenceRow> for ConvergenceRecord {
    fn from(r: &ConvergenceRow) -> Self {
        Self {
            cells: r.cells,
            value: Real(r.value),
            gap: Real(r.gap),
            pattern: r.pattern,
        }
    }
}

/// Output of `meanzero lemma --json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaRecord {
    pub schema: u32,
    pub command: String,
    pub weight: String,
    pub domain: Real,
    pub grid: usize,
    pub violations: usize,
    pub max_violation: Real,
    pub flat_steps: usize,
    pub constant_plateau: bool,
    pub samples: Vec<(Real, Real)>,
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}
