//! Maximizing `int phi(|J(f)|)` over uniform-grid step functions in the
//! mean-zero box.
//!
//! The discretized feasible set `{v in [m, M]^n : sum v = 0}` is a polytope
//! whose vertices have every coordinate at `m` or `M` except at most one.
//! For convex `phi` the objective is convex in `v`, so its maximum over the
//! polytope is attained at a vertex and enumeration is exact. Local search
//! covers other weights but certifies nothing.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extremal::Extremal;
use crate::functional::{lhs_integral, theorem1_bound};
use crate::model::{Bounds, MonotoneWeight, StepFunction};
use crate::sampling::{sample_indexed, SamplerConfig, Scheme};

/// Largest cell count accepted by vertex enumeration.
pub const ENUMERATION_CAP: usize = 24;

/// Improvement threshold for local-search moves.
pub const LOCAL_SEARCH_STEP: f64 = 1e-12;

/// A vertex of the discretized feasible polytope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub cells: usize,
    /// Cells at `M`; every other non-fractional cell is at `m`.
    pub high: Vec<usize>,
    /// Fractional cell and its value, strictly between `m` and `M`.
    pub frac: Option<(usize, f64)>,
}

impl Vertex {
    pub fn values(&self, bounds: &Bounds) -> Vec<f64> {
        let mut v = vec![bounds.lower(); self.cells];
        for &i in &self.high {
            v[i] = bounds.upper();
        }
        if let Some((i, x)) = self.frac {
            v[i] = x;
        }
        v
    }
}

fn near(a: f64, b: f64, bounds: &Bounds) -> bool {
    (a - b).abs() <= 1e-12 * bounds.span()
}

/// Value forced on the fractional cell when `high` of the other `n - 1`
/// cells sit at `M` and the rest at `m`.
fn remainder(bounds: &Bounds, cells: usize, high: usize) -> f64 {
    -(high as f64 * bounds.upper() + (cells - 1 - high) as f64 * bounds.lower())
}

/// Counts `k` of `M` cells for which some vertex with `k` high cells and
/// one remainder cell exists.
pub fn feasible_high_counts(bounds: &Bounds, cells: usize) -> Vec<usize> {
    (0..cells)
        .filter(|&k| {
            let r = remainder(bounds, cells, k);
            r >= bounds.lower() - 1e-12 * bounds.span() && r <= bounds.upper() + 1e-12 * bounds.span()
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
enum Class {
    /// All cells at `m` or `M`.
    Binary,
    /// The given cell carries the remainder.
    Fractional(usize),
}

/// Bitmasks over `bits` positions with exactly `k` bits set, in increasing order.
fn combinations(bits: usize, k: usize) -> impl Iterator<Item = u32> {
    let limit: u64 = 1 << bits;
    let first: u64 = if k > bits { limit } else { (1u64 << k) - 1 };
    let mut next = Some(first).filter(|&m| m < limit);
    std::iter::from_fn(move || {
        let current = next?;
        next = if current == 0 {
            None
        } else {
            // Gosper's hack.
            let c = current & current.wrapping_neg();
            let r = current + c;
            let succ = (((r ^ current) >> 2) / c) | r;
            Some(succ).filter(|&m| m < limit)
        };
        Some(current as u32)
    })
}

fn class_vertices(bounds: Bounds, cells: usize, class: Class) -> impl Iterator<Item = Vertex> {
    let plans: Vec<(usize, Option<f64>)> = (0..cells)
        .filter_map(|k| {
            let r = remainder(&bounds, cells, k);
            match class {
                Class::Binary if near(r, bounds.lower(), &bounds) => Some((k, None)),
                Class::Fractional(_)
                    if r > bounds.lower()
                        && r < bounds.upper()
                        && !near(r, bounds.lower(), &bounds)
                        && !near(r, bounds.upper(), &bounds) =>
                {
                    Some((k, Some(r)))
                }
                _ => None,
            }
        })
        .collect();
    plans.into_iter().flat_map(move |(k, frac_value)| {
        let bits = match class {
            Class::Binary => cells,
            Class::Fractional(_) => cells - 1,
        };
        combinations(bits, k).map(move |mask| {
            let frac_index = match class {
                Class::Binary => None,
                Class::Fractional(i) => Some(i),
            };
            let high = (0..bits)
                .filter(|b| mask >> b & 1 == 1)
                .map(|b| match frac_index {
                    Some(i) if b >= i => b + 1,
                    _ => b,
                })
                .collect();
            Vertex {
                cells,
                high,
                frac: frac_index.zip(frac_value),
            }
        })
    })
}

fn check_cap(cells: usize) -> Result<()> {
    if cells > ENUMERATION_CAP {
        return Err(Error::TooManyCells {
            cells,
            cap: ENUMERATION_CAP,
        });
    }
    if cells < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 cells (got {cells})")));
    }
    Ok(())
}

/// Every vertex of the `cells`-cell feasible polytope, each exactly once.
/// A remainder landing on `m` or `M` is canonicalized to the binary vertex.
pub fn enumerate_vertices(bounds: &Bounds, cells: usize) -> Result<impl Iterator<Item = Vertex>> {
    check_cap(cells)?;
    let b = *bounds;
    Ok(class_vertices(b, cells, Class::Binary)
        .chain((0..cells).flat_map(move |i| class_vertices(b, cells, Class::Fractional(i)))))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Strategy {
    VertexEnum,
    LocalSearch { restarts: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub cells: usize,
    pub best: StepFunction,
    pub value: f64,
    pub bound: f64,
    /// `bound - value`.
    pub gap: f64,
    /// Exact maximum (vertex enumeration) rather than a heuristic value.
    pub certifying: bool,
    pub evaluated: u64,
}

#[derive(Debug, Clone)]
struct Candidate {
    value: f64,
    values: Vec<f64>,
}

impl Candidate {
    /// Larger value wins; values equal to rounding pick the
    /// lexicographically smaller cell vector.
    fn beats(&self, other: &Candidate) -> bool {
        let tie = 1e-13 * self.value.abs().max(other.value.abs()).max(1e-300);
        if self.value > other.value + tie {
            return true;
        }
        if other.value > self.value + tie {
            return false;
        }
        self.values
            .iter()
            .zip(&other.values)
            .find(|(a, b)| a != b)
            .is_some_and(|(a, b)| a < b)
    }
}

fn keep_better(incumbent: Option<Candidate>, challenger: Candidate) -> Option<Candidate> {
    match incumbent {
        Some(inc) if !challenger.beats(&inc) => Some(inc),
        _ => Some(challenger),
    }
}

fn objective(values: &[f64], weight: &MonotoneWeight) -> Result<f64> {
    lhs_integral(&StepFunction::uniform(values.to_vec())?, weight)
}

/// Maximizes the weighted integral over `cells`-cell uniform step functions.
pub fn search_max(bounds: &Bounds, weight: &MonotoneWeight, cells: usize, strategy: Strategy) -> Result<SearchResult> {
    let bound = theorem1_bound(bounds, weight)?;
    let (best, evaluated, certifying) = match strategy {
        Strategy::VertexEnum => {
            check_cap(cells)?;
            if !weight.is_convex() {
                return Err(Error::NonConvexWeight);
            }
            let (best, evaluated) = enumerate_max(bounds, weight, cells)?;
            (best, evaluated, true)
        }
        Strategy::LocalSearch { restarts, seed } => {
            if cells < 2 {
                return Err(Error::InvalidArgument(format!("need at least 2 cells (got {cells})")));
            }
            if restarts == 0 {
                return Err(Error::InvalidArgument("local search needs at least one restart".into()));
            }
            let (best, evaluated) = local_search(bounds, weight, cells, restarts, seed)?;
            (best, evaluated, false)
        }
    };
    let mut f = StepFunction::uniform(best.values)?;
    if !certifying {
        // Pair moves accumulate rounding drift in the mean; vertices are exact.
        f.rebalance(bounds);
    }
    let value = lhs_integral(&f, weight)?;
    Ok(SearchResult {
        cells,
        best: f,
        value,
        bound,
        gap: bound - value,
        certifying,
        evaluated,
    })
}

fn enumerate_max(bounds: &Bounds, weight: &MonotoneWeight, cells: usize) -> Result<(Candidate, u64)> {
    let classes: Vec<Class> = std::iter::once(Class::Binary)
        .chain((0..cells).map(Class::Fractional))
        .collect();
    let b = *bounds;
    let partials = classes
        .into_par_iter()
        .map(|class| -> Result<(Option<Candidate>, u64)> {
            let mut best = None;
            let mut count = 0;
            for vertex in class_vertices(b, cells, class) {
                let values = vertex.values(&b);
                let value = objective(&values, weight)?;
                best = keep_better(best, Candidate { value, values });
                count += 1;
            }
            Ok((best, count))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best = None;
    let mut evaluated = 0;
    for (candidate, count) in partials {
        evaluated += count;
        if let Some(c) = candidate {
            best = keep_better(best, c);
        }
    }
    let best = best.ok_or_else(|| Error::InvalidArgument("feasible polytope has no vertices".into()))?;
    Ok((best, evaluated))
}

fn local_search(
    bounds: &Bounds,
    weight: &MonotoneWeight,
    cells: usize,
    restarts: usize,
    seed: u64,
) -> Result<(Candidate, u64)> {
    let cfg = SamplerConfig::new(cells, seed, Scheme::UniformProject)?;
    let partials = (0..restarts)
        .into_par_iter()
        .map(|r| climb(bounds, weight, sample_indexed(bounds, &cfg, r as u64).values().to_vec()))
        .collect::<Result<Vec<_>>>()?;
    let mut best = None;
    let mut evaluated = 0;
    for (candidate, count) in partials {
        evaluated += count;
        best = keep_better(best, candidate);
    }
    Ok((best.expect("at least one restart"), evaluated))
}

/// First-improvement hill climbing over pair moves: swapping two cells, or
/// moving mass between two cells up to (or halfway to) the box limit.
fn climb(bounds: &Bounds, weight: &MonotoneWeight, start: Vec<f64>) -> Result<(Candidate, u64)> {
    let (m, big) = (bounds.lower(), bounds.upper());
    let n = start.len();
    let mut values = start;
    let mut current = objective(&values, weight)?;
    let mut evaluated = 1;
    let mut trial = values.clone();
    for _pass in 0..10_000 {
        let mut improved = false;
        for i in 0..n {
            for j in i + 1..n {
                let (vi, vj) = (values[i], values[j]);
                let up = (big - vi).min(vj - m);
                let down = (vi - m).min(big - vj);
                let moves = [
                    (vj, vi),
                    (vi + up, vj - up),
                    (vi + 0.5 * up, vj - 0.5 * up),
                    (vi - down, vj + down),
                    (vi - 0.5 * down, vj + 0.5 * down),
                ];
                for (new_i, new_j) in moves {
                    if new_i == vi && new_j == vj {
                        continue;
                    }
                    trial.copy_from_slice(&values);
                    trial[i] = new_i.clamp(m, big);
                    trial[j] = new_j.clamp(m, big);
                    let value = objective(&trial, weight)?;
                    evaluated += 1;
                    if value > current + LOCAL_SEARCH_STEP {
                        values.copy_from_slice(&trial);
                        current = value;
                        improved = true;
                        break;
                    }
                }
            }
        }
        if !improved {
            break;
        }
    }
    Ok((Candidate { value: current, values }, evaluated))
}

/// Which extremizer a cell vector discretizes: a block of `M`, at most one
/// intermediate cell, then a block of `m` (for `f0`), or the mirror image.
pub fn extremal_pattern(values: &[f64], bounds: &Bounds) -> Option<Extremal> {
    let (m, big) = (bounds.lower(), bounds.upper());
    let at = |v: f64, level: f64| near(v, level, bounds);
    let matches = |first: f64, second: f64| {
        let lead = values.iter().take_while(|&&v| at(v, first)).count();
        let rest = &values[lead..];
        let rest = match rest.first() {
            Some(&v) if !at(v, second) => &rest[1..],
            _ => rest,
        };
        rest.iter().all(|&v| at(v, second))
    };
    if matches(big, m) {
        Some(Extremal::F0)
    } else if matches(m, big) {
        Some(Extremal::F1)
    } else {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub cells: usize,
    pub value: f64,
    pub gap: f64,
    pub pattern: Option<Extremal>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub rows: Vec<ConvergenceRow>,
    /// Each grid refines the previous one.
    pub nested: bool,
    /// Gaps never increase by more than `1e-12` from one row to the next.
    pub monotone: bool,
}

/// Runs [`search_max`] for each grid size in ascending `cell_counts`.
pub fn convergence_study(
    bounds: &Bounds,
    weight: &MonotoneWeight,
    cell_counts: &[usize],
    strategy: Strategy,
) -> Result<ConvergenceStudy> {
    if cell_counts.is_empty() || cell_counts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "cell counts must be non-empty and strictly ascending".into(),
        ));
    }
    let rows = cell_counts
        .iter()
        .map(|&n| {
            search_max(bounds, weight, n, strategy).map(|r| ConvergenceRow {
                cells: n,
                value: r.value,
                gap: r.gap,
                pattern: extremal_pattern(r.best.values(), bounds),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceStudy {
        nested: cell_counts.windows(2).all(|w| w[1] % w[0] == 0),
        monotone: rows.windows(2).all(|w| w[1].gap <= w[0].gap + 1e-12),
        rows,
    })
}
