use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

/// Tolerance when validating that table weights are nondecreasing.
pub const MONOTONE_TOLERANCE: f64 = 1e-14;

/// The families of nondecreasing weights the toolkit can integrate.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightKind {
    /// `x^p`, `p > 0`.
    Power { p: f64 },
    /// `log(eps + x)`, `eps >= 0`; `-inf` at `x = 0` when `eps = 0`.
    ShiftedLog { eps: f64 },
    /// Linear interpolation of `(x, phi(x))` knots, first knot at 0.
    Table { xs: Vec<f64>, ys: Vec<f64> },
}

/// A nondecreasing weight `phi` on `[0, cap]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneWeight {
    kind: WeightKind,
    cap: f64,
}

impl MonotoneWeight {
    pub fn power(p: f64, cap: f64) -> Result<Self> {
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::InvalidWeight(format!(
                "power exponent must be finite and > 0 (got {p})"
            )));
        }
        Self::with_cap(WeightKind::Power { p }, cap)
    }

    pub fn shifted_log(eps: f64, cap: f64) -> Result<Self> {
        if !(eps.is_finite() && eps >= 0.0) {
            return Err(Error::InvalidWeight(format!(
                "log shift must be finite and >= 0 (got {eps})"
            )));
        }
        Self::with_cap(WeightKind::ShiftedLog { eps }, cap)
    }

    /// Table weight from `(x, phi(x))` pairs; the domain cap is the last `x`.
    pub fn table(pairs: &[(f64, f64)]) -> Result<Self> {
        if pairs.len() < 2 {
            return Err(Error::InvalidWeight("table needs at least two knots".into()));
        }
        if pairs.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::InvalidWeight("table knots must be finite".into()));
        }
        if pairs[0].0 != 0.0 {
            return Err(Error::InvalidWeight("table must start at x = 0".into()));
        }
        for w in pairs.windows(2) {
            if w[0].0.partial_cmp(&w[1].0) != Some(Ordering::Less) {
                return Err(Error::InvalidWeight(format!(
                    "table x values must be strictly increasing ({} then {})",
                    w[0].0, w[1].0
                )));
            }
            if w[1].1 < w[0].1 - MONOTONE_TOLERANCE {
                return Err(Error::InvalidWeight(format!(
                    "table weight decreases between x = {} and x = {}",
                    w[0].0, w[1].0
                )));
            }
        }
        let cap = pairs[pairs.len() - 1].0;
        let (xs, ys) = pairs.iter().copied().unzip();
        Self::with_cap(WeightKind::Table { xs, ys }, cap)
    }

    fn with_cap(kind: WeightKind, cap: f64) -> Result<Self> {
        if !(cap.is_finite() && cap > 0.0) {
            return Err(Error::InvalidWeight(format!(
                "domain cap must be finite and > 0 (got {cap})"
            )));
        }
        Ok(Self { kind, cap })
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    /// Same weight on a different domain `[0, cap]`. Table weights keep
    /// their knot range.
    pub fn with_domain(&self, cap: f64) -> Result<Self> {
        match self.kind {
            WeightKind::Table { .. } => Ok(self.clone()),
            _ => Self::with_cap(self.kind.clone(), cap),
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(0.0..=self.cap).contains(&x) {
            return Err(Error::OutsideDomain {
                value: x,
                cap: self.cap,
            });
        }
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: f64) -> f64 {
        match &self.kind {
            WeightKind::Power { p } => x.powf(*p),
            WeightKind::ShiftedLog { eps } => (eps + x).ln(),
            WeightKind::Table { xs, ys } => {
                let n = xs.len();
                let idx = xs.partition_point(|&t| t <= x).clamp(1, n - 1);
                let (x0, x1) = (xs[idx - 1], xs[idx]);
                let t = ((x - x0) / (x1 - x0)).clamp(0.0, 1.0);
                ys[idx - 1] + t * (ys[idx - 1 + 1] - ys[idx - 1])
            }
        }
    }

    /// Closed-form average `(1/(hi - lo)) int_lo^hi phi`, or `phi(lo)` when
    /// the interval is degenerate. Requires `0 <= lo <= hi <= cap`.
    pub fn average(&self, lo: f64, hi: f64) -> f64 {
        debug_assert!(0.0 <= lo && lo <= hi);
        match &self.kind {
            WeightKind::Power { p } => power_average(*p, lo, hi),
            WeightKind::ShiftedLog { eps } => log_average(*eps, lo, hi),
            WeightKind::Table { xs, ys } => {
                if hi == lo {
                    self.eval_unchecked(lo)
                } else {
                    table_integral(xs, ys, lo, hi) / (hi - lo)
                }
            }
        }
    }

    /// True when `phi` composed with `|J|` is convex in `f`: the weight
    /// itself must be convex on its domain.
    pub fn is_convex(&self) -> bool {
        match &self.kind {
            WeightKind::Power { p } => *p >= 1.0,
            WeightKind::ShiftedLog { .. } => false,
            WeightKind::Table { xs, ys } => {
                let slopes: Vec<f64> = xs
                    .windows(2)
                    .zip(ys.windows(2))
                    .map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0]))
                    .collect();
                slopes.windows(2).all(|s| s[1] >= s[0] - MONOTONE_TOLERANCE)
            }
        }
    }

    /// True when `phi` is constant on `(0, t)`.
    pub fn is_constant_on(&self, t: f64) -> bool {
        match &self.kind {
            WeightKind::Power { .. } | WeightKind::ShiftedLog { .. } => false,
            WeightKind::Table { xs, ys } => {
                let end = self.eval_unchecked(t.min(self.cap));
                let start = ys[0];
                (end - start).abs() <= MONOTONE_TOLERANCE
                    && xs
                        .iter()
                        .zip(ys)
                        .filter(|(x, _)| **x < t)
                        .all(|(_, y)| (y - start).abs() <= MONOTONE_TOLERANCE)
            }
        }
    }
}

impl fmt::Display for MonotoneWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            WeightKind::Power { p } => write!(f, "pow:{p}"),
            WeightKind::ShiftedLog { eps } => write!(f, "log:{eps}"),
            WeightKind::Table { xs, .. } => write!(f, "table[{} knots]", xs.len()),
        }
    }
}

fn power_average(p: f64, lo: f64, hi: f64) -> f64 {
    if hi == lo {
        return lo.powf(p);
    }
    if lo == 0.0 {
        return hi.powf(p) / (p + 1.0);
    }
    let r = (hi - lo) / lo;
    if r > 1e3 {
        // lo is negligible against hi; the direct form is well conditioned.
        return (hi.powf(p + 1.0) - lo.powf(p + 1.0)) / ((p + 1.0) * (hi - lo));
    }
    lo.powf(p) * ((p + 1.0) * r.ln_1p()).exp_m1() / ((p + 1.0) * r)
}

fn log_average(eps: f64, lo: f64, hi: f64) -> f64 {
    let a = eps + lo;
    let b = eps + hi;
    if hi == lo {
        return a.ln();
    }
    if a == 0.0 {
        return b.ln() - 1.0;
    }
    let r = (hi - lo) / a;
    if r > 1e3 {
        let g = |u: f64| if u == 0.0 { 0.0 } else { u * u.ln() - u };
        return (g(b) - g(a)) / (hi - lo);
    }
    a.ln() + (1.0 + r) * r.ln_1p() / r - 1.0
}

fn table_integral(xs: &[f64], ys: &[f64], lo: f64, hi: f64) -> f64 {
    let interp = |i: usize, x: f64| {
        let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
        ys[i] + t * (ys[i + 1] - ys[i])
    };
    let mut acc = CompensatedSum::new();
    for i in 0..xs.len() - 1 {
        let a = xs[i].max(lo);
        let b = xs[i + 1].min(hi);
        if b > a {
            acc.add_product(0.5 * (interp(i, a) + interp(i, b)), b - a);
        }
    }
    acc.value()
}
