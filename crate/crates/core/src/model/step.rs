use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{Bounds, PiecewiseLinear};
use crate::error::{Error, Result};
use crate::numeric::{two_prod, CompensatedSum};

/// Admissibility threshold on `|mean(f)|`.
pub const MEAN_TOLERANCE: f64 = 1e-12;

/// Piecewise-constant function on `[0, 1]`: `values[i]` holds on
/// `[breakpoints[i], breakpoints[i + 1])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

/// Result of checking a step function against a pair of bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Admissibility {
    pub min_value: f64,
    pub max_value: f64,
    pub mean: f64,
    pub within_box: bool,
    pub zero_mean: bool,
}

impl Admissibility {
    pub fn is_admissible(&self) -> bool {
        self.within_box && self.zero_mean
    }
}

impl StepFunction {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::InvalidStepFunction("need at least two breakpoints".into()));
        }
        if values.len() + 1 != breakpoints.len() {
            return Err(Error::InvalidStepFunction(format!(
                "{} breakpoints require {} values, got {}",
                breakpoints.len(),
                breakpoints.len() - 1,
                values.len()
            )));
        }
        if breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != 1.0 {
            return Err(Error::InvalidStepFunction(
                "breakpoints must start at 0 and end at 1".into(),
            ));
        }
        if let Some(w) = breakpoints
            .windows(2)
            .find(|w| w[0].partial_cmp(&w[1]) != Some(Ordering::Less))
        {
            return Err(Error::InvalidStepFunction(format!(
                "breakpoints must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidStepFunction(format!("non-finite value {v}")));
        }
        Ok(Self { breakpoints, values })
    }

    /// Step function on the uniform grid `i / n`, `n = values.len()`.
    pub fn uniform(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return Err(Error::InvalidStepFunction("need at least one cell".into()));
        }
        Self::new(uniform_grid(n), values)
    }

    pub fn constant(value: f64) -> Result<Self> {
        Self::new(vec![0.0, 1.0], vec![value])
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cells(&self) -> usize {
        self.values.len()
    }

    pub fn width(&self, cell: usize) -> f64 {
        self.breakpoints[cell + 1] - self.breakpoints[cell]
    }

    /// Value at `x`, right-continuous, with `f(1)` taken from the last cell.
    pub fn eval(&self, x: f64) -> f64 {
        let idx = self.breakpoints.partition_point(|&b| b <= x);
        let cell = idx.saturating_sub(1).min(self.values.len() - 1);
        self.values[cell]
    }

    /// `sum_i v_i (x_i - x_{i-1})`, accumulated left to right as
    /// `v_i x_i - v_i x_{i-1}` with error-free products so that refining a
    /// cell adds terms that cancel exactly.
    pub fn mean(&self) -> f64 {
        let mut acc = CompensatedSum::new();
        for (i, &v) in self.values.iter().enumerate() {
            acc.add_product(v, self.breakpoints[i + 1]);
            acc.add_product(-v, self.breakpoints[i]);
        }
        acc.value()
    }

    /// `int_0^1 x f(x) dx`.
    pub fn first_moment(&self) -> f64 {
        let mut acc = CompensatedSum::new();
        for (i, &v) in self.values.iter().enumerate() {
            let half = 0.5 * v;
            let (hi, lo) = two_prod(self.breakpoints[i + 1], self.breakpoints[i + 1]);
            acc.add_product(half, hi);
            acc.add_product(half, lo);
            let (hi, lo) = two_prod(self.breakpoints[i], self.breakpoints[i]);
            acc.add_product(-half, hi);
            acc.add_product(-half, lo);
        }
        acc.value()
    }

    /// The running integral `x -> int_0^x f`, with nodes at the breakpoints.
    pub fn primitive(&self) -> PiecewiseLinear {
        let mut acc = CompensatedSum::new();
        let mut node_values = Vec::with_capacity(self.breakpoints.len());
        node_values.push(0.0);
        for (i, &v) in self.values.iter().enumerate() {
            acc.add_product(v, self.breakpoints[i + 1]);
            acc.add_product(-v, self.breakpoints[i]);
            node_values.push(acc.value());
        }
        PiecewiseLinear::from_parts_unchecked(self.breakpoints.clone(), node_values)
    }

    pub fn admissibility(&self, bounds: &Bounds) -> Admissibility {
        let min_value = self.values.iter().copied().fold(f64::INFINITY, f64::min);
        let max_value = self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = self.mean();
        Admissibility {
            min_value,
            max_value,
            mean,
            within_box: bounds.lower() <= min_value && max_value <= bounds.upper(),
            zero_mean: mean.abs() <= MEAN_TOLERANCE,
        }
    }

    pub fn is_admissible(&self, bounds: &Bounds) -> bool {
        self.admissibility(bounds).is_admissible()
    }

    /// Same function with additional breakpoints; points already present or
    /// outside `(0, 1)` are ignored.
    pub fn refine(&self, extra: &[f64]) -> Result<Self> {
        let mut points: Vec<f64> = self
            .breakpoints
            .iter()
            .copied()
            .chain(extra.iter().copied().filter(|x| *x > 0.0 && *x < 1.0))
            .collect();
        if points.iter().any(|x| x.is_nan()) {
            return Err(Error::InvalidStepFunction("NaN refinement point".into()));
        }
        points.sort_by(f64::total_cmp);
        points.dedup();
        let values = points[..points.len() - 1].iter().map(|&x| self.eval(x)).collect();
        Self::new(points, values)
    }

    /// Merges adjacent cells carrying equal values.
    pub fn normalize(&self) -> Self {
        let mut breakpoints = vec![0.0];
        let mut values: Vec<f64> = Vec::new();
        for (i, &v) in self.values.iter().enumerate() {
            if values.last() == Some(&v) {
                *breakpoints.last_mut().unwrap() = self.breakpoints[i + 1];
            } else {
                values.push(v);
                breakpoints.push(self.breakpoints[i + 1]);
            }
        }
        Self { breakpoints, values }
    }

    /// `a f + b g` on the union of both breakpoint sets.
    pub fn linear_combination(a: f64, f: &Self, b: f64, g: &Self) -> Result<Self> {
        let mut points: Vec<f64> = f.breakpoints.iter().chain(&g.breakpoints).copied().collect();
        points.sort_by(f64::total_cmp);
        points.dedup();
        let values = points[..points.len() - 1]
            .iter()
            .map(|&x| a * f.eval(x) + b * g.eval(x))
            .collect();
        Self::new(points, values)
    }

    /// Adds `-mean / width` to one cell, the lowest-index cell that can
    /// absorb the correction without leaving the box, repeating while the
    /// recomputed mean is still nonzero.
    pub fn rebalance(&mut self, bounds: &Bounds) {
        for _ in 0..4 {
            let mean = self.mean();
            if mean == 0.0 {
                return;
            }
            let target = (0..self.values.len()).find(|&i| {
                let v = self.values[i] - mean / self.width(i);
                bounds.contains(v)
            });
            match target {
                Some(i) => {
                    let next = self.values[i] - mean / self.width(i);
                    if next == self.values[i] {
                        return;
                    }
                    self.values[i] = next;
                }
                None => return,
            }
        }
    }
}

pub(crate) fn uniform_grid(n: usize) -> Vec<f64> {
    let mut grid: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    grid[n] = 1.0;
    grid
}
