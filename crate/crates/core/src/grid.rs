//! Uniform periodic discretization of a single coordinate axis.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which coordinate an axis (and everything sampled on it) refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Position,
    Momentum,
}

impl Basis {
    pub fn conjugate(self) -> Basis {
        match self {
            Basis::Position => Basis::Momentum,
            Basis::Momentum => Basis::Position,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Basis::Position => "position",
            Basis::Momentum => "momentum",
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `n` points `min + j * dx`, `j = 0..n`, with `dx = (max - min) / n`.
///
/// `max` itself is not a sample point; it is identified with `min` under the
/// periodic convention used by the FFT routines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n: usize,
    min: f64,
    max: f64,
}

pub const MIN_POINTS: usize = 8;

impl Grid {
    pub fn new(n: usize, min: f64, max: f64) -> Result<Self> {
        if n < MIN_POINTS {
            return Err(Error::Grid(format!(
                "need at least {MIN_POINTS} points, got {n}"
            )));
        }
        if !(min.is_finite() && max.is_finite()) || max <= min {
            return Err(Error::Grid(format!(
                "endpoints must be finite with max > min, got [{min}, {max})"
            )));
        }
        Ok(Grid { n, min, max })
    }

    /// Grid centered on zero: `min = -floor(n/2) * dx`, spanning `2 * half_width`.
    pub fn symmetric(n: usize, half_width: f64) -> Result<Self> {
        if !(half_width > 0.0) {
            return Err(Error::Grid(format!(
                "half-width must be positive, got {half_width}"
            )));
        }
        let dx = 2.0 * half_width / n as f64;
        Self::centered(n, dx)
    }

    /// Smallest centered grid whose sampled points reach `±half_width`.
    pub fn covering(n: usize, half_width: f64) -> Result<Self> {
        if !(half_width > 0.0) {
            return Err(Error::Grid(format!(
                "half-width must be positive, got {half_width}"
            )));
        }
        let below = n / 2;
        let above = n.saturating_sub(below + 1).max(1);
        Self::centered(n, half_width / above.min(below).max(1) as f64)
    }

    /// Centered grid with the given spacing.
    pub fn centered(n: usize, dx: f64) -> Result<Self> {
        let min = -((n / 2) as f64) * dx;
        Self::new(n, min, min + n as f64 * dx)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn spacing(&self) -> f64 {
        (self.max - self.min) / self.n as f64
    }

    /// Last sample point, `max - dx`.
    pub fn last(&self) -> f64 {
        self.point(self.n - 1)
    }

    pub fn point(&self, j: usize) -> f64 {
        self.min + j as f64 * self.spacing()
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        let dx = self.spacing();
        (0..self.n).map(move |j| self.min + j as f64 * dx)
    }

    /// Smallest distance from zero to either sampled endpoint.
    pub fn half_width(&self) -> f64 {
        self.min.abs().min(self.last().abs())
    }

    /// Index of the sample closest to `x`, if `x` lies within the sampled range.
    pub fn nearest(&self, x: f64) -> Option<usize> {
        let f = ((x - self.min) / self.spacing()).round();
        (f >= 0.0 && f < self.n as f64).then_some(f as usize)
    }

    pub fn is_centered(&self) -> bool {
        let expected = -((self.n / 2) as f64) * self.spacing();
        (self.min - expected).abs() <= 1e-12 * self.spacing().max(1.0)
    }

    /// The FFT-dual grid: same size, spacing `2π / (n dx)`, centered on zero.
    pub fn dual(&self) -> Grid {
        let dk = 2.0 * PI / (self.n as f64 * self.spacing());
        Grid::centered(self.n, dk).expect("dual of a valid grid is valid")
    }
}
