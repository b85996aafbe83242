//! Exact representations of feasible functions, their primitives and
//! monotone weights.

mod bounds;
mod linear;
mod step;
mod weight;

pub use bounds::Bounds;
pub use linear::{PiecewiseLinear, SignedPiece};
pub use step::{Admissibility, StepFunction, MEAN_TOLERANCE};
pub use weight::{MonotoneWeight, WeightKind, MONOTONE_TOLERANCE};
