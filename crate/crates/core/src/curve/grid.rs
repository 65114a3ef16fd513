use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::CurveError;

const TWO_PI: f64 = 2.0 * PI;

/// Nodes of a 2π-periodic parameter grid on `[-π, π)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicGrid {
    alphas: Vec<f64>,
    uniform: bool,
}

impl PeriodicGrid {
    pub const MIN_NODES: usize = 8;

    /// Uniform grid `alpha_i = -π + 2πi/n`.
    pub fn uniform(n: usize) -> Result<Self, CurveError> {
        if n < Self::MIN_NODES {
            return Err(CurveError::TooFewNodes { min: Self::MIN_NODES, got: n });
        }
        let alphas = (0..n).map(|i| -PI + TWO_PI * i as f64 / n as f64).collect();
        Ok(Self { alphas, uniform: true })
    }

    /// Arbitrary (generally nonuniform) grid. The result is never flagged uniform,
    /// even if the nodes happen to be equispaced.
    pub fn from_nodes(alphas: Vec<f64>) -> Result<Self, CurveError> {
        let n = alphas.len();
        if n < Self::MIN_NODES {
            return Err(CurveError::TooFewNodes { min: Self::MIN_NODES, got: n });
        }
        for (i, &a) in alphas.iter().enumerate() {
            if !a.is_finite() || a < -PI || a >= PI {
                return Err(CurveError::BadNodes { index: i });
            }
            if i > 0 && a <= alphas[i - 1] {
                return Err(CurveError::BadNodes { index: i });
            }
        }
        Ok(Self { alphas, uniform: false })
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    /// Width of cell `i`, i.e. `alpha_{i+1} - alpha_i` with periodic wrap.
    pub fn spacing(&self, i: usize) -> f64 {
        let n = self.len();
        if i + 1 < n {
            self.alphas[i + 1] - self.alphas[i]
        } else {
            self.alphas[0] + TWO_PI - self.alphas[n - 1]
        }
    }

    pub fn min_spacing(&self) -> f64 {
        (0..self.len()).map(|i| self.spacing(i)).fold(f64::INFINITY, f64::min)
    }

    /// Wrap an angle into `[-π, π)`.
    pub fn wrap(x: f64) -> f64 {
        let y = (x + PI).rem_euclid(TWO_PI) - PI;
        if y >= PI {
            y - TWO_PI
        } else {
            y
        }
    }

    /// Index of the node closest to `alpha` (periodic distance).
    pub fn nearest(&self, alpha: f64) -> usize {
        let mut best = 0;
        let mut dist = f64::INFINITY;
        for (i, &a) in self.alphas.iter().enumerate() {
            let d = Self::wrap(a - alpha).abs();
            if d < dist {
                dist = d;
                best = i;
            }
        }
        best
    }
}
