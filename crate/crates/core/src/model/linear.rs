use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

/// Continuous piecewise-linear function on `[0, 1]`, interpolating
/// `values` at strictly increasing `nodes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinear {
    nodes: Vec<f64>,
    values: Vec<f64>,
}

/// A linear piece on which the function keeps one sign (zero allowed at
/// the endpoints only).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedPiece {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl SignedPiece {
    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    /// `|y|` at both ends.
    pub fn abs_ends(&self) -> (f64, f64) {
        (self.y0.abs(), self.y1.abs())
    }

    pub fn is_zero(&self) -> bool {
        self.y0 == 0.0 && self.y1 == 0.0
    }
}

impl PiecewiseLinear {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 || nodes.len() != values.len() {
            return Err(Error::InvalidPiecewiseLinear(format!(
                "need matching node/value lists of length >= 2 (got {} and {})",
                nodes.len(),
                values.len()
            )));
        }
        if nodes[0] != 0.0 || *nodes.last().unwrap() != 1.0 {
            return Err(Error::InvalidPiecewiseLinear(
                "nodes must start at 0 and end at 1".into(),
            ));
        }
        if nodes
            .windows(2)
            .any(|w| w[0].partial_cmp(&w[1]) != Some(Ordering::Less))
        {
            return Err(Error::InvalidPiecewiseLinear(
                "nodes must be strictly increasing".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPiecewiseLinear("non-finite node value".into()));
        }
        Ok(Self { nodes, values })
    }

    pub(crate) fn from_parts_unchecked(nodes: Vec<f64>, values: Vec<f64>) -> Self {
        debug_assert!(nodes.len() == values.len() && nodes.len() >= 2);
        Self { nodes, values }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.nodes.len();
        let idx = self.nodes.partition_point(|&t| t <= x).clamp(1, n - 1);
        let (x0, x1) = (self.nodes[idx - 1], self.nodes[idx]);
        let (y0, y1) = (self.values[idx - 1], self.values[idx]);
        if x == x1 {
            return y1;
        }
        let t = (x - x0) / (x1 - x0);
        y0 + t * (y1 - y0)
    }

    pub fn slopes(&self) -> Vec<f64> {
        self.nodes
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0]))
            .collect()
    }

    pub fn negate(&self) -> Self {
        Self {
            nodes: self.nodes.clone(),
            values: self.values.iter().map(|v| -v).collect(),
        }
    }

    /// `max |y|`, attained at a node.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Exact integral (trapezoid rule is exact on linear pieces).
    pub fn integral(&self) -> f64 {
        let mut acc = CompensatedSum::new();
        for i in 1..self.nodes.len() {
            let avg = 0.5 * (self.values[i - 1] + self.values[i]);
            acc.add_product(avg, self.nodes[i]);
            acc.add_product(-avg, self.nodes[i - 1]);
        }
        acc.value()
    }

    /// Linear pieces split at every interior sign change.
    pub fn signed_pieces(&self) -> Vec<SignedPiece> {
        let mut out = Vec::with_capacity(self.nodes.len() + 2);
        for i in 1..self.nodes.len() {
            let (x0, x1) = (self.nodes[i - 1], self.nodes[i]);
            let (y0, y1) = (self.values[i - 1], self.values[i]);
            if (y0 < 0.0 && y1 > 0.0) || (y0 > 0.0 && y1 < 0.0) {
                let z = x0 + (x1 - x0) * (y0 / (y0 - y1));
                let z = z.clamp(x0, x1);
                if z > x0 {
                    out.push(SignedPiece { x0, x1: z, y0, y1: 0.0 });
                }
                if z < x1 {
                    out.push(SignedPiece { x0: z, x1, y0: 0.0, y1 });
                }
            } else {
                out.push(SignedPiece { x0, x1, y0, y1 });
            }
        }
        out
    }
}
