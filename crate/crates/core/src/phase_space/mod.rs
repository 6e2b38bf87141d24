//! Discretized one-dimensional phase space, symbols, mollified indicators
//! and Fréchet seminorms.

mod mollifier;
mod symbol;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use mollifier::{
    bump_derivative, mollified_derivative, mollify_indicator, smoothed_indicator, Interval, Mollifier, Region,
    MAX_MOLLIFIER_ORDER,
};
pub use symbol::{frechet_seminorm, translate_symbol, Dependence, Symbol};

/// Periodic lattice of `N` (odd) positions on a box of length `L`, with the
/// matching momentum lattice `2 pi m / L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    n_points: usize,
    box_length: f64,
}

impl PhaseGrid {
    pub fn new(n_points: usize, box_length: f64) -> Result<Self> {
        if n_points < 3 || n_points.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "grid needs an odd number of points >= 3, got {n_points}"
            )));
        }
        if !(box_length > 0.0 && box_length.is_finite()) {
            return Err(Error::invalid(format!(
                "box length must be positive and finite, got {box_length}"
            )));
        }
        Ok(PhaseGrid { n_points, box_length })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    pub fn dx(&self) -> f64 {
        self.box_length / self.n_points as f64
    }

    /// `(N - 1) / 2`.
    pub fn center(&self) -> usize {
        (self.n_points - 1) / 2
    }

    pub fn momentum_spacing(&self) -> f64 {
        2.0 * PI / self.box_length
    }

    /// Length of the momentum period `2 pi / dx`.
    pub fn momentum_period(&self) -> f64 {
        2.0 * PI / self.dx()
    }

    pub fn position(&self, j: usize) -> f64 {
        (j as f64 - self.center() as f64) * self.dx()
    }

    /// Momentum at storage index `m` in `0..N`, i.e. lattice label `m - c`.
    pub fn momentum(&self, m: usize) -> f64 {
        (m as f64 - self.center() as f64) * self.momentum_spacing()
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.position(j)).collect()
    }

    pub fn momenta(&self) -> Vec<f64> {
        (0..self.n_points).map(|m| self.momentum(m)).collect()
    }

    /// Phase-space point `(a dx, b 2 pi / L)`.
    pub fn lattice_point(&self, a: i64, b: i64) -> (f64, f64) {
        (a as f64 * self.dx(), b as f64 * self.momentum_spacing())
    }

    /// Inverse of [`lattice_point`](Self::lattice_point); errors when the
    /// point is farther than `1e-9` cells from the lattice.
    pub fn lattice_indices(&self, x: f64, xi: f64) -> Result<(i64, i64)> {
        let a = x / self.dx();
        let b = xi / self.momentum_spacing();
        let (ra, rb) = (a.round(), b.round());
        if (a - ra).abs() > 1e-9 || (b - rb).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "point ({x}, {xi}) is not on the phase-space lattice"
            )));
        }
        Ok((ra as i64, rb as i64))
    }

    /// Half-lattice sample points spanning the position range (`2N - 1` values).
    pub fn refined_positions(&self) -> Vec<f64> {
        let h = 0.5 * self.dx();
        let x0 = self.position(0);
        (0..2 * self.n_points - 1).map(|k| x0 + k as f64 * h).collect()
    }

    /// Half-lattice sample points spanning the momentum range (`2N - 1` values).
    pub fn refined_momenta(&self) -> Vec<f64> {
        let h = 0.5 * self.momentum_spacing();
        let p0 = self.momentum(0);
        (0..2 * self.n_points - 1).map(|k| p0 + k as f64 * h).collect()
    }
}

pub fn build_grid(n_points: usize, box_length: f64) -> Result<PhaseGrid> {
    PhaseGrid::new(n_points, box_length)
}
