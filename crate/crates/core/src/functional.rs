//! Sharp bounds, envelopes and the weighted integral `int_0^1 phi(|J(f)|)`.
//!
//! The sharp bound for a nondecreasing weight `phi` is the average
//! `K(phi, h*) = (1/h*) int_0^{h*} phi`, where `h* = -mM/(M-m)` is the peak
//! height of the primitive. Power weights give the `L^p` bounds and the
//! logarithmic weight gives the geometric-mean bound.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Bounds, MonotoneWeight, PiecewiseLinear, StepFunction, WeightKind};
use crate::numeric::{adaptive_integrate, AdaptiveOptions, CompensatedSum};

/// Relative slack allowed when `max |J|` overshoots a weight domain by rounding.
const DOMAIN_SLACK: f64 = 1e-12;

/// Integration route for `int phi(|J|)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Quadrature {
    /// Closed-form averages over each sign-constant linear piece.
    #[default]
    ClosedForm,
    /// 16-point Gauss-Legendre with adaptive bisection on each piece.
    Adaptive,
}

/// `K(phi, t) = (1/t) int_0^t phi`.
pub fn k_functional(weight: &MonotoneWeight, t: f64) -> Result<f64> {
    check_k_argument(weight, t)?;
    Ok(weight.average(0.0, t))
}

/// `K(phi, t)` through adaptive quadrature of pointwise evaluations.
pub fn k_functional_adaptive(weight: &MonotoneWeight, t: f64) -> Result<f64> {
    check_k_argument(weight, t)?;
    refuse_singular(weight)?;
    let integral = adaptive_integrate(&|x| weight.eval_unchecked(x), 0.0, t, AdaptiveOptions::default())?;
    Ok(integral / t)
}

fn check_k_argument(weight: &MonotoneWeight, t: f64) -> Result<()> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::InvalidArgument(format!("K(phi, t) requires t > 0 (got {t})")));
    }
    if t > weight.cap() {
        return Err(Error::OutsideDomain {
            value: t,
            cap: weight.cap(),
        });
    }
    Ok(())
}

fn refuse_singular(weight: &MonotoneWeight) -> Result<()> {
    if let WeightKind::ShiftedLog { eps } = weight.kind() {
        if *eps == 0.0 {
            return Err(Error::Quadrature(
                "log(x) has an endpoint singularity; use the closed-form route".into(),
            ));
        }
    }
    Ok(())
}

/// Sharp upper bound on `int phi(|J(f)|)` over the mean-zero class.
pub fn theorem1_bound(bounds: &Bounds, weight: &MonotoneWeight) -> Result<f64> {
    if weight.cap() < bounds.peak() {
        return Err(Error::InvalidArgument(format!(
            "weight domain [0, {}] must cover the peak height {}",
            weight.cap(),
            bounds.peak()
        )));
    }
    k_functional(weight, bounds.peak())
}

/// Sharp bound on `||J(f)||_p`: `h* / (p + 1)^(1/p)`.
pub fn corollary1_bound(bounds: &Bounds, p: f64) -> Result<f64> {
    if !(p.is_finite() && p > 0.0) {
        return Err(Error::InvalidArgument(format!("L^p bound requires p > 0 (got {p})")));
    }
    Ok(bounds.peak() * (-p.ln_1p() / p).exp())
}

/// Sharp bound on `exp(int log |J(f)|)`: `h* / e`.
pub fn corollary2_bound(bounds: &Bounds) -> f64 {
    bounds.peak() / std::f64::consts::E
}

/// Sharp bound on `||J(f)||_inf`.
pub fn proposition1_bound(bounds: &Bounds) -> f64 {
    bounds.peak()
}

/// Earlier bound on `int J^2`: `-mM (3M^2 - 8mM + 3m^2) / (6 (M-m)^2)`.
pub fn perfetti_bound(bounds: &Bounds) -> f64 {
    let (m, big) = (bounds.lower(), bounds.upper());
    let span = bounds.span();
    -m * big / (6.0 * span * span) * (3.0 * big * big - 8.0 * m * big + 3.0 * m * m)
}

/// Earlier bound on `int |J|`: `h* / 2`.
pub fn thong_bound(bounds: &Bounds) -> f64 {
    0.5 * bounds.peak()
}

/// Earlier sharp bound on `||J||_2`: `h* / sqrt(3)`.
pub fn kouba_bound(bounds: &Bounds) -> f64 {
    bounds.peak() / 3f64.sqrt()
}

/// `x -> min(Mx, -m(1-x))`, the pointwise ceiling for `J(f)`.
pub fn envelope_pos(bounds: &Bounds) -> PiecewiseLinear {
    PiecewiseLinear::from_parts_unchecked(vec![0.0, bounds.crossover0(), 1.0], vec![0.0, bounds.peak(), 0.0])
}

/// `x -> min(-mx, M(1-x))`, the pointwise ceiling for `-J(f)`.
pub fn envelope_neg(bounds: &Bounds) -> PiecewiseLinear {
    PiecewiseLinear::from_parts_unchecked(vec![0.0, bounds.crossover1(), 1.0], vec![0.0, bounds.peak(), 0.0])
}

/// Largest amounts by which `J` exceeds `envelope_pos` and `-J` exceeds
/// `envelope_neg`. Each gap is piecewise linear with kinks only at nodes of
/// `J` and at the envelope apex, so checking those points is exhaustive.
pub fn envelope_excesses(primitive: &PiecewiseLinear, bounds: &Bounds) -> (f64, f64) {
    let pos = envelope_pos(bounds);
    let neg = envelope_neg(bounds);
    let mut worst = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (&x, &y) in primitive.nodes().iter().zip(primitive.values()) {
        worst.0 = worst.0.max(y - pos.eval(x));
        worst.1 = worst.1.max(-y - neg.eval(x));
    }
    let (c0, c1) = (bounds.crossover0(), bounds.crossover1());
    worst.0 = worst.0.max(primitive.eval(c0) - bounds.peak());
    worst.1 = worst.1.max(-primitive.eval(c1) - bounds.peak());
    worst
}

/// Larger of the two [`envelope_excesses`].
pub fn envelope_excess(primitive: &PiecewiseLinear, bounds: &Bounds) -> f64 {
    let (pos, neg) = envelope_excesses(primitive, bounds);
    pos.max(neg)
}

/// [`envelope_excess`] evaluated on `points + 1` uniform grid points in
/// addition to the nodes of `J`.
pub fn envelope_excess_on_grid(primitive: &PiecewiseLinear, bounds: &Bounds, points: usize) -> f64 {
    let pos = envelope_pos(bounds);
    let neg = envelope_neg(bounds);
    let excess_at = |x: f64| {
        let y = primitive.eval(x);
        (y - pos.eval(x)).max(-y - neg.eval(x))
    };
    let grid = (0..=points).map(|i| i as f64 / points as f64);
    grid.chain(primitive.nodes().iter().copied())
        .map(excess_at)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `int_0^1 phi(|J(f)(x)|) dx` by the closed-form route.
pub fn lhs_integral(f: &StepFunction, weight: &MonotoneWeight) -> Result<f64> {
    weighted_integral(&f.primitive(), weight, Quadrature::ClosedForm)
}

/// `int_0^1 phi(|J(x)|) dx` for a piecewise-linear `J`.
///
/// `J` is split at its zeros; on each sign-constant linear piece `|J|` runs
/// linearly between its endpoint values, so the piece contributes its width
/// times the average of `phi` between them. Returns `-inf` only for `log(x)`
/// when `J` vanishes on a set of positive measure.
pub fn weighted_integral(primitive: &PiecewiseLinear, weight: &MonotoneWeight, route: Quadrature) -> Result<f64> {
    let peak = primitive.max_abs();
    let cap = weight.cap();
    if peak > cap * (1.0 + DOMAIN_SLACK) {
        return Err(Error::OutsideDomain { value: peak, cap });
    }
    if route == Quadrature::Adaptive {
        refuse_singular(weight)?;
    }
    let mut acc = CompensatedSum::new();
    for piece in primitive.signed_pieces() {
        let (a, b) = piece.abs_ends();
        let (a, b) = (a.min(cap), b.min(cap));
        let contribution = match route {
            Quadrature::ClosedForm => {
                let avg = weight.average(a.min(b), a.max(b));
                if avg == f64::NEG_INFINITY {
                    return Ok(f64::NEG_INFINITY);
                }
                piece.width() * avg
            }
            Quadrature::Adaptive => {
                let slope = (b - a) / piece.width();
                let x0 = piece.x0;
                let integrand = |x: f64| weight.eval_unchecked((a + slope * (x - x0)).clamp(0.0, cap));
                adaptive_integrate(&integrand, piece.x0, piece.x1, AdaptiveOptions::default())?
            }
        };
        acc.add(contribution);
    }
    Ok(acc.value())
}

/// `||J||_p = (int |J|^p)^(1/p)`.
pub fn lp_norm(primitive: &PiecewiseLinear, p: f64) -> Result<f64> {
    let peak = primitive.max_abs();
    if peak == 0.0 {
        return Ok(0.0);
    }
    let weight = MonotoneWeight::power(p, peak)?;
    Ok(weighted_integral(primitive, &weight, Quadrature::ClosedForm)?.powf(1.0 / p))
}

/// Tolerance for monotonicity violations of `t -> K(phi, t)`.
pub const LEMMA_TOLERANCE: f64 = 1e-10;

/// Outcome of sampling `t -> K(phi, t)` on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub domain: f64,
    pub grid: usize,
    pub samples: Vec<(f64, f64)>,
    /// Grid indices `j` with some `i < j` such that `K_i > K_j + tolerance`.
    pub violations: usize,
    pub max_violation: f64,
    /// Consecutive grid steps on which `K` did not increase measurably.
    pub flat_steps: usize,
    pub constant_plateau: bool,
}

impl MonotonicityReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Samples `K(phi, iT/grid)` for `i = 1..=grid` and checks that it never
/// decreases. Flat steps are counted rather than failed.
pub fn lemma1_monotonicity_check(weight: &MonotoneWeight, domain: f64, grid: usize) -> Result<MonotonicityReport> {
    if grid < 2 {
        return Err(Error::InvalidArgument(format!("grid must be >= 2 (got {grid})")));
    }
    if !(domain.is_finite() && domain > 0.0 && domain <= weight.cap()) {
        return Err(Error::InvalidArgument(format!(
            "T must lie in (0, {}] (got {domain})",
            weight.cap()
        )));
    }
    let samples = (1..=grid)
        .map(|i| {
            let t = if i == grid {
                domain
            } else {
                i as f64 * domain / grid as f64
            };
            k_functional(weight, t).map(|k| (t, k))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut violations = 0;
    let mut max_violation: f64 = 0.0;
    let mut running_max = f64::NEG_INFINITY;
    for &(_, k) in &samples {
        let drop = running_max - k;
        if drop > LEMMA_TOLERANCE {
            violations += 1;
        }
        max_violation = max_violation.max(drop);
        running_max = running_max.max(k);
    }
    let flat_steps = samples
        .windows(2)
        .filter(|w| {
            let (a, b) = (w[0].1, w[1].1);
            (b - a).abs() <= 1e-14 * a.abs().max(b.abs()).max(1.0)
        })
        .count();
    Ok(MonotonicityReport {
        domain,
        grid,
        samples,
        violations,
        max_violation,
        flat_steps,
        constant_plateau: flat_steps == grid - 1,
    })
}
