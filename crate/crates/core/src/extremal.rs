//! The two extremizers: `f0 = M` then `m`, switching at `-m/(M-m)`, and
//! `f1 = m` then `M`, switching at `M/(M-m)`. Their primitives are the tent
//! and valley that saturate the envelopes, so both attain every bound.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::functional::{envelope_neg, envelope_pos, theorem1_bound, weighted_integral, Quadrature};
use crate::model::{Bounds, MonotoneWeight, PiecewiseLinear, StepFunction};

/// Absolute gap accepted when certifying equality via closed forms.
pub const CLOSED_FORM_EQUALITY_TOLERANCE: f64 = 1e-10;
/// Absolute gap accepted when certifying equality via adaptive quadrature.
pub const ADAPTIVE_EQUALITY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extremal {
    /// Up then down.
    F0,
    /// Down then up.
    F1,
}

impl Extremal {
    pub const BOTH: [Extremal; 2] = [Extremal::F0, Extremal::F1];

    pub fn name(self) -> &'static str {
        match self {
            Extremal::F0 => "f0",
            Extremal::F1 => "f1",
        }
    }
}

pub fn extremal(bounds: &Bounds, which: Extremal) -> StepFunction {
    let (switch, values) = match which {
        Extremal::F0 => (bounds.crossover0(), vec![bounds.upper(), bounds.lower()]),
        Extremal::F1 => (bounds.crossover1(), vec![bounds.lower(), bounds.upper()]),
    };
    StepFunction::new(vec![0.0, switch, 1.0], values).expect("crossovers lie strictly inside (0, 1)")
}

/// Primitive of the extremizer, node-for-node equal to the envelope it
/// saturates (negated for `f1`).
pub fn extremal_primitive(bounds: &Bounds, which: Extremal) -> PiecewiseLinear {
    match which {
        Extremal::F0 => envelope_pos(bounds),
        Extremal::F1 => envelope_neg(bounds).negate(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EqualityCertificate {
    pub bound: f64,
    pub lhs_f0: f64,
    pub lhs_f1: f64,
    pub gap_f0: f64,
    pub gap_f1: f64,
    pub tolerance: f64,
    /// The weight is constant below the peak, so equality does not single
    /// out the extremizers; uniqueness is not claimed.
    pub constant_weight: bool,
    pub passed: bool,
}

/// Evaluates the weighted integral on both extremizers and compares it
/// with the sharp bound.
pub fn certify_equality(bounds: &Bounds, weight: &MonotoneWeight) -> Result<EqualityCertificate> {
    certify_equality_with(bounds, weight, Quadrature::ClosedForm)
}

pub fn certify_equality_with(
    bounds: &Bounds,
    weight: &MonotoneWeight,
    route: Quadrature,
) -> Result<EqualityCertificate> {
    let bound = theorem1_bound(bounds, weight)?;
    let lhs_f0 = weighted_integral(&extremal(bounds, Extremal::F0).primitive(), weight, route)?;
    let lhs_f1 = weighted_integral(&extremal(bounds, Extremal::F1).primitive(), weight, route)?;
    let tolerance = match route {
        Quadrature::ClosedForm => CLOSED_FORM_EQUALITY_TOLERANCE,
        Quadrature::Adaptive => ADAPTIVE_EQUALITY_TOLERANCE,
    };
    let (gap_f0, gap_f1) = (bound - lhs_f0, bound - lhs_f1);
    Ok(EqualityCertificate {
        bound,
        lhs_f0,
        lhs_f1,
        gap_f0,
        gap_f1,
        tolerance,
        constant_weight: weight.is_constant_on(bounds.peak()),
        passed: gap_f0.abs() <= tolerance && gap_f1.abs() <= tolerance,
    })
}
