//! Seeded random members of the discretized mean-zero class and the
//! verification campaign that checks every inequality on them.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extremal::{extremal, Extremal};
use crate::functional::{envelope_excesses, lhs_integral, theorem1_bound};
use crate::model::{Bounds, MonotoneWeight, StepFunction};
use crate::numeric::sum;
use crate::search::feasible_high_counts;

/// Generator used for every random draw; recorded in reports.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha 0.9): seed_from_u64(seed), stream = sample index";

/// Sampler postcondition on `|mean|`.
pub const SAMPLE_MEAN_TOLERANCE: f64 = 1e-14;

pub const THEOREM_TOLERANCE: f64 = 1e-9;
pub const PEAK_TOLERANCE: f64 = 1e-12;
pub const ENVELOPE_TOLERANCE: f64 = 1e-12;
pub const MOMENT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// i.i.d. uniform values on `[m, M]`, then water-filling projection.
    UniformProject,
    /// A random polytope vertex with uniform jitter, then projection.
    VertexJitter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub cells: usize,
    pub seed: u64,
    pub scheme: Scheme,
}

impl SamplerConfig {
    pub fn new(cells: usize, seed: u64, scheme: Scheme) -> Result<Self> {
        if cells < 2 {
            return Err(Error::InvalidArgument(format!(
                "sampler needs at least 2 cells (got {cells})"
            )));
        }
        Ok(Self { cells, seed, scheme })
    }
}

pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// First sample of the configured stream.
pub fn sample_feasible(bounds: &Bounds, cfg: &SamplerConfig) -> StepFunction {
    sample_indexed(bounds, cfg, 0)
}

/// Sample number `index`; each index owns an independent generator stream.
pub fn sample_indexed(bounds: &Bounds, cfg: &SamplerConfig, index: u64) -> StepFunction {
    let mut rng = stream_rng(cfg.seed, index);
    let raw: Vec<f64> = match cfg.scheme {
        Scheme::UniformProject => (0..cfg.cells)
            .map(|_| rng.random_range(bounds.lower()..=bounds.upper()))
            .collect(),
        Scheme::VertexJitter => {
            let amplitude = 0.1 * bounds.span();
            random_vertex(bounds, cfg.cells, &mut rng)
                .into_iter()
                .map(|v| v + rng.random_range(-amplitude..=amplitude))
                .collect()
        }
    };
    project_zero_mean(&raw, bounds)
}

/// Vertex of `{v in [m, M]^n : sum v = 0}` with a random number of `M`
/// cells, a random placement, and the fractional remainder in one cell.
pub(crate) fn random_vertex<R: Rng>(bounds: &Bounds, cells: usize, rng: &mut R) -> Vec<f64> {
    let counts = feasible_high_counts(bounds, cells);
    let high = counts[rng.random_range(0..counts.len())];
    let (m, big) = (bounds.lower(), bounds.upper());
    let frac = -(high as f64 * big + (cells - 1 - high) as f64 * m);
    let mut values: Vec<f64> = (0..cells)
        .map(|i| match i.cmp(&high) {
            std::cmp::Ordering::Less => big,
            std::cmp::Ordering::Equal => frac.clamp(m, big),
            std::cmp::Ordering::Greater => m,
        })
        .collect();
    values.shuffle(rng);
    values
}

/// Projects raw cell values onto the mean-zero box by water-filling: finds
/// the shift `s` with `mean(clip(v - s, m, M)) = 0` by bisection (the
/// clipped mean is continuous and nonincreasing in `s`), then removes the
/// remaining rounding residue from one cell.
pub fn project_zero_mean(raw: &[f64], bounds: &Bounds) -> StepFunction {
    let (m, big) = (bounds.lower(), bounds.upper());
    let n = raw.len() as f64;
    let clipped_mean = |s: f64| sum(raw.iter().map(|v| (v - s).clamp(m, big))) / n;

    let min_raw = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let max_raw = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // All cells saturate at M below `lo` and at m above `hi`.
    let mut lo = min_raw - big;
    let mut hi = max_raw - m;
    let mut shift = 0.5 * (lo + hi);
    for _ in 0..200 {
        shift = 0.5 * (lo + hi);
        let g = clipped_mean(shift);
        if g.abs() <= 1e-15 || shift <= lo || shift >= hi {
            break;
        }
        if g > 0.0 {
            lo = shift;
        } else {
            hi = shift;
        }
    }
    let values = raw.iter().map(|v| (v - shift).clamp(m, big)).collect();
    let mut f = StepFunction::uniform(values).expect("raw values are finite");
    f.rebalance(bounds);
    f
}

/// Options for [`campaign`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CampaignOptions {
    /// Append `f0` and `f1` (indices `n_samples` and `n_samples + 1`).
    pub include_extremals: bool,
    /// Evaluate samples on the rayon pool.
    pub parallel: bool,
}

/// Aggregate of one named check over the whole campaign. Slack is
/// `rhs - lhs`; a violation is slack below `-tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckAggregate {
    pub name: String,
    pub tolerance: f64,
    pub violations: u64,
    pub min_slack: f64,
    pub argmin_index: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub samples: u64,
    pub extremals_included: bool,
    pub rng: String,
    pub checks: Vec<CheckAggregate>,
    pub violations: u64,
    /// Smallest bound slack over all weights.
    pub min_slack: f64,
    pub argmin_index: u64,
    pub argmin_function: StepFunction,
}

impl CampaignReport {
    pub fn check(&self, name: &str) -> Option<&CheckAggregate> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, Copy)]
struct Slot {
    violations: u64,
    min_slack: f64,
    argmin: u64,
}

impl Slot {
    const EMPTY: Slot = Slot {
        violations: 0,
        min_slack: f64::INFINITY,
        argmin: u64::MAX,
    };

    fn merge(self, other: Slot) -> Slot {
        let take_other =
            other.min_slack < self.min_slack || (other.min_slack == self.min_slack && other.argmin < self.argmin);
        let (min_slack, argmin) = if take_other {
            (other.min_slack, other.argmin)
        } else {
            (self.min_slack, self.argmin)
        };
        Slot {
            violations: self.violations + other.violations,
            min_slack,
            argmin,
        }
    }
}

/// Draws `n_samples` functions and checks the weighted bound for every
/// weight, the peak bound, both envelopes, the moment identity and the
/// sampler's own admissibility postcondition on each. Aggregates are
/// identical for serial and parallel evaluation.
pub fn campaign(
    bounds: &Bounds,
    weights: &[MonotoneWeight],
    n_samples: u64,
    cfg: &SamplerConfig,
    opts: CampaignOptions,
) -> Result<CampaignReport> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument("campaign needs at least one sample".into()));
    }
    if weights.is_empty() {
        return Err(Error::InvalidArgument("campaign needs at least one weight".into()));
    }
    let rhs: Vec<f64> = weights
        .iter()
        .map(|w| theorem1_bound(bounds, w))
        .collect::<Result<_>>()?;

    let mut names: Vec<String> = weights.iter().map(|w| format!("theorem1[{w}]")).collect();
    let mut tolerances = vec![THEOREM_TOLERANCE; weights.len()];
    for (name, tol) in [
        ("proposition1", PEAK_TOLERANCE),
        ("envelope_pos", ENVELOPE_TOLERANCE),
        ("envelope_neg", ENVELOPE_TOLERANCE),
        ("moment_identity", MOMENT_TOLERANCE),
        ("admissibility", SAMPLE_MEAN_TOLERANCE),
    ] {
        names.push(name.into());
        tolerances.push(tol);
    }

    let total = n_samples + if opts.include_extremals { 2 } else { 0 };
    let function_at = |index: u64| -> StepFunction {
        match index.checked_sub(n_samples) {
            None => sample_indexed(bounds, cfg, index),
            Some(0) => extremal(bounds, Extremal::F0),
            Some(_) => extremal(bounds, Extremal::F1),
        }
    };
    let evaluate = |index: u64| -> Result<Vec<Slot>> {
        let f = function_at(index);
        let j = f.primitive();
        let mut slacks = Vec::with_capacity(tolerances.len());
        for (w, bound) in weights.iter().zip(&rhs) {
            slacks.push(bound - lhs_integral(&f, w)?);
        }
        slacks.push(bounds.peak() - j.max_abs());
        let (pos, neg) = envelope_excesses(&j, bounds);
        slacks.push(-pos);
        slacks.push(-neg);
        slacks.push(-(f.first_moment() + j.integral()).abs());
        let adm = f.admissibility(bounds);
        slacks.push(if adm.within_box {
            -adm.mean.abs()
        } else {
            f64::NEG_INFINITY
        });
        Ok(slacks
            .into_iter()
            .zip(&tolerances)
            .map(|(slack, tol)| Slot {
                violations: u64::from(slack < -tol || slack.is_nan()),
                min_slack: slack,
                argmin: index,
            })
            .collect())
    };
    let merge = |a: Vec<Slot>, b: Vec<Slot>| a.into_iter().zip(b).map(|(x, y)| x.merge(y)).collect::<Vec<_>>();
    let empty = || vec![Slot::EMPTY; tolerances.len()];

    let slots = if opts.parallel {
        (0..total)
            .into_par_iter()
            .map(evaluate)
            .try_fold(empty, |acc, s| s.map(|s| merge(acc, s)))
            .try_reduce(empty, |a, b| Ok(merge(a, b)))?
    } else {
        let mut acc = empty();
        for index in 0..total {
            acc = merge(acc, evaluate(index)?);
        }
        acc
    };

    let checks: Vec<CheckAggregate> = names
        .into_iter()
        .zip(&tolerances)
        .zip(&slots)
        .map(|((name, &tolerance), slot)| CheckAggregate {
            name,
            tolerance,
            violations: slot.violations,
            min_slack: slot.min_slack,
            argmin_index: slot.argmin,
        })
        .collect();
    let bound_slot = slots[..weights.len()].iter().copied().fold(Slot::EMPTY, Slot::merge);
    Ok(CampaignReport {
        samples: n_samples,
        extremals_included: opts.include_extremals,
        rng: RNG_ALGORITHM.into(),
        violations: checks.iter().map(|c| c.violations).sum(),
        checks,
        min_slack: bound_slot.min_slack,
        argmin_index: bound_slot.argmin,
        argmin_function: function_at(bound_slot.argmin),
    })
}
