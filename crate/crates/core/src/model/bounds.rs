use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Box constraints `m <= f <= M` of the mean-zero class, with the derived
/// peak height and crossover points cached at construction.
///
/// Every other module reads the crossovers from here so that extremizers,
/// envelopes and searches share bit-identical breakpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    lower: f64,
    upper: f64,
    peak: f64,
    crossover0: f64,
    crossover1: f64,
}

impl Bounds {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite() && lower < 0.0 && upper > 0.0) {
            return Err(Error::InvalidBounds { m: lower, upper });
        }
        let span = upper - lower;
        Ok(Self {
            lower,
            upper,
            peak: -lower * upper / span,
            crossover0: -lower / span,
            crossover1: upper / span,
        })
    }

    /// Lower bound `m < 0`.
    pub fn lower(&self) -> f64 {
        self.lower
    }

    /// Upper bound `M > 0`.
    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn span(&self) -> f64 {
        self.upper - self.lower
    }

    /// `-mM/(M-m)`, the largest value `|J(f)|` can reach.
    pub fn peak(&self) -> f64 {
        self.peak
    }

    /// `-m/(M-m)`: where the up-then-down extremizer switches from `M` to `m`.
    pub fn crossover0(&self) -> f64 {
        self.crossover0
    }

    /// `M/(M-m)`: where the down-then-up extremizer switches from `m` to `M`.
    pub fn crossover1(&self) -> f64 {
        self.crossover1
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }
}
