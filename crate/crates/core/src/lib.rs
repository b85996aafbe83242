//! Sharp integral inequalities for primitives of bounded mean-zero
//! functions on `[0, 1]`.
//!
//! For `m < 0 < M` and `f` with `m <= f <= M`, `int_0^1 f = 0`, the primitive
//! `J(f)(x) = int_0^x f` satisfies `int_0^1 phi(|J(f)|) <= K(phi, -mM/(M-m))`
//! for every nondecreasing weight `phi`, with equality for two explicit
//! two-valued step functions. This crate evaluates the bounds, builds the
//! extremizers, and checks both directions numerically: random feasible
//! functions never beat the bound, and exhaustive search over discretized
//! feasible sets approaches it.

pub mod error;
pub mod extremal;
pub mod functional;
pub mod model;
pub mod numeric;
pub mod sampling;
pub mod search;

pub use error::{Error, Result};
pub use model::{Bounds, MonotoneWeight, PiecewiseLinear, StepFunction, WeightKind};
