use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::spectrum::{PredictedSpectrum, SpectralInterval};
use crate::error::{Error, Result};
use crate::numerics::eigvalsh;
use crate::phase_space::{PhaseGrid, Symbol};
use crate::weyl::quantize;

pub const MIN_QUASIMOMENTA: usize = 16;

/// Bloch bands of `h(D) + V_cell(x)` with `V_cell` of period `T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloquetBands {
    /// Band `k` is the range of the `k`-th cell eigenvalue over quasimomentum.
    pub bands: Vec<SpectralInterval>,
    /// Largest endpoint change between `K` and `2K` quasimomenta, over `bands`.
    pub richardson_estimate: f64,
    /// The same change per band.
    pub band_estimates: Vec<f64>,
    pub cell_points: usize,
    pub quasimomenta: usize,
}

impl FloquetBands {
    pub fn spectrum(&self) -> PredictedSpectrum {
        PredictedSpectrum::from_intervals(self.bands.clone())
    }

    /// Keeps the lowest `(M + 1) / 2` bands and replaces the rest by `[lo, inf)`.
    /// Used when `h` is unbounded, to discard cutoff-dominated upper bands.
    pub fn elliptic_tail(&self) -> FloquetBands {
        let keep = self.cell_points.div_ceil(2);
        if self.bands.len() <= keep {
            return self.clone();
        }
        let mut bands = self.bands[..keep].to_vec();
        bands.push(SpectralInterval::new(self.bands[keep].lo, f64::INFINITY));
        let band_estimates = self.band_estimates[..=keep].to_vec();
        FloquetBands {
            bands,
            richardson_estimate: band_estimates.iter().copied().fold(0.0, f64::max),
            band_estimates,
            ..self.clone()
        }
    }
}

fn cell_eigenvalues(cell: &PhaseGrid, h: &Symbol, v: &Symbol, theta: f64) -> Result<Vec<f64>> {
    let h = h.clone();
    let shifted = Symbol::of_momentum(move |xi| h.eval_re(0.0, xi + theta));
    let op = quantize(cell, &shifted).add(&quantize(cell, v));
    eigvalsh(&op.symmetrized())
}

/// Band structure from `2K` quasimomenta `theta_i = 2 pi i / (2 K T)`, with the
/// `K`-point subset used for the convergence estimate.
pub fn floquet_bands(h: &Symbol, v_cell: &Symbol, period: f64, m: usize, k: usize) -> Result<FloquetBands> {
    if m.is_multiple_of(2) {
        return Err(Error::invalid(format!("cell point count must be odd, got {m}")));
    }
    if k < MIN_QUASIMOMENTA {
        return Err(Error::invalid(format!(
            "need at least {MIN_QUASIMOMENTA} quasimomenta, got {k}"
        )));
    }
    let cell = PhaseGrid::new(m, period)?;
    let fine = 2 * k;
    let spectra = (0..fine)
        .map(|i| cell_eigenvalues(&cell, h, v_cell, 2.0 * PI * i as f64 / (fine as f64 * period)))
        .collect::<Result<Vec<_>>>()?;
    let range = |step: usize, band: usize| {
        spectra
            .iter()
            .step_by(step)
            .map(|ev| ev[band])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| (lo.min(e), hi.max(e)))
    };
    let mut bands = Vec::with_capacity(m);
    let mut band_estimates = Vec::with_capacity(m);
    for band in 0..m {
        let (lo, hi) = range(1, band);
        let (lo_k, hi_k) = range(2, band);
        band_estimates.push((lo - lo_k).abs().max((hi - hi_k).abs()));
        bands.push(SpectralInterval::new(lo, hi));
    }
    Ok(FloquetBands {
        bands,
        richardson_estimate: band_estimates.iter().copied().fold(0.0, f64::max),
        band_estimates,
        cell_points: m,
        quasimomenta: fine,
    })
}
