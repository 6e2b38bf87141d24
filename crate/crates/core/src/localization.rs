//! Energy cutoffs `rho(H)`, localization norms over receding regions, the
//! uniform-in-time non-propagation bound and symbol decay of `rho(H)`.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    eigh_with, operator_norm_with, smooth_step, ComplexMatrix, NumericsConfig, SpectralDecomposition, StateVector, C64,
};
use crate::phase_space::{mollify_indicator, Interval, Mollifier, PhaseGrid, Region};
use crate::scenarios::BoundaryComponent;
use crate::weyl::{quantize, resolved_symbol};

/// Collar fraction of the box kept out of receding regions by default.
pub const DEFAULT_COLLAR: f64 = 0.125;
/// Slack allowed in the static-versus-dynamical comparison.
pub const PROPAGATION_SLACK: f64 = 1e-6;

/// Smooth cutoff: 0 outside `(alpha, beta)`, 1 on the centered fraction `plateau`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyWindow {
    alpha: f64,
    beta: f64,
    plateau: f64,
}

impl EnergyWindow {
    pub fn new(alpha: f64, beta: f64, plateau: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite() && alpha < beta) {
            return Err(Error::invalid(format!(
                "energy window ({alpha}, {beta}) is not an interval"
            )));
        }
        if !(plateau > 0.0 && plateau < 1.0) {
            return Err(Error::invalid(format!(
                "plateau fraction must lie in (0, 1), got {plateau}"
            )));
        }
        Ok(EnergyWindow { alpha, beta, plateau })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn plateau(&self) -> f64 {
        self.plateau
    }

    pub fn eval(&self, lambda: f64) -> f64 {
        let mid = 0.5 * (self.alpha + self.beta);
        let half = 0.5 * (self.beta - self.alpha);
        let inner = self.plateau * half;
        let d = (lambda - mid).abs();
        if d >= half {
            0.0
        } else if d <= inner {
            1.0
        } else {
            smooth_step((half - d) / (half - inner))
        }
    }

    /// `max_k rho(lambda_k)`.
    pub fn max_on(&self, eigenvalues: &[f64]) -> f64 {
        eigenvalues.iter().map(|&l| self.eval(l)).fold(0.0, f64::max)
    }
}

pub fn energy_window(alpha: f64, beta: f64, plateau: f64) -> Result<EnergyWindow> {
    EnergyWindow::new(alpha, beta, plateau)
}

/// Regions receding toward one boundary component, cut off before the far box
/// edge by a collar of `collar_fraction` of the box (position or momentum period).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionFamily {
    pub component: BoundaryComponent,
    pub collar_fraction: f64,
}

impl RegionFamily {
    pub fn new(component: BoundaryComponent) -> Self {
        RegionFamily {
            component,
            collar_fraction: DEFAULT_COLLAR,
        }
    }

    pub fn with_collar(component: BoundaryComponent, collar_fraction: f64) -> Result<Self> {
        if !(0.0..0.5).contains(&collar_fraction) {
            return Err(Error::invalid(format!(
                "collar fraction must lie in [0, 0.5), got {collar_fraction}"
            )));
        }
        Ok(RegionFamily {
            component,
            collar_fraction,
        })
    }

    /// Far end of the receding interval, measured from the origin.
    pub fn far_end(&self, grid: &PhaseGrid) -> f64 {
        let period = if self.component.is_position() {
            grid.box_length()
        } else {
            grid.momentum_period()
        };
        if self.collar_fraction == 0.0 {
            f64::INFINITY
        } else {
            period * (0.5 - self.collar_fraction)
        }
    }

    pub fn region(&self, offset: f64, grid: &PhaseGrid) -> Result<Region> {
        let far = self.far_end(grid);
        if !(offset.is_finite() && offset < far) {
            return Err(Error::invalid(format!(
                "offset {offset} does not leave a region below the far end {far}"
            )));
        }
        if far.is_infinite() {
            return Ok(match self.component {
                BoundaryComponent::XPlus => Region::PositionAbove { a: offset },
                BoundaryComponent::XMinus => Region::PositionBelow { a: offset },
                BoundaryComponent::XiPlus => Region::MomentumAbove { b: offset },
                BoundaryComponent::XiMinus => Region::MomentumBelow { b: offset },
            });
        }
        let iv = if self.component.sign() > 0.0 {
            Interval::new(offset, far)
        } else {
            Interval::new(-far, -offset)
        };
        Ok(if self.component.is_position() {
            Region::Rectangle {
                x: iv,
                xi: Interval::full(),
            }
        } else {
            Region::Rectangle {
                x: Interval::full(),
                xi: iv,
            }
        })
    }
}

/// `H`, its eigendecomposition and `rho(H)`, computed once per experiment.
#[derive(Debug, Clone)]
pub struct LocalizationProblem {
    grid: PhaseGrid,
    window: EnergyWindow,
    decomposition: SpectralDecomposition,
    cutoff: ComplexMatrix,
    numerics: NumericsConfig,
}

impl LocalizationProblem {
    pub fn new(grid: &PhaseGrid, h: &ComplexMatrix, window: EnergyWindow) -> Result<Self> {
        LocalizationProblem::with_config(grid, h, window, NumericsConfig::default())
    }

    pub fn with_config(
        grid: &PhaseGrid,
        h: &ComplexMatrix,
        window: EnergyWindow,
        numerics: NumericsConfig,
    ) -> Result<Self> {
        if h.dim() != grid.n_points() {
            return Err(Error::invalid(format!(
                "operator dimension {} does not match grid size {}",
                h.dim(),
                grid.n_points()
            )));
        }
        let decomposition = eigh_with(h, &numerics)?;
        let cutoff = decomposition.apply_function(|l| window.eval(l));
        Ok(LocalizationProblem {
            grid: *grid,
            window,
            decomposition,
            cutoff,
            numerics,
        })
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn window(&self) -> &EnergyWindow {
        &self.window
    }

    pub fn decomposition(&self) -> &SpectralDecomposition {
        &self.decomposition
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.decomposition.eigenvalues
    }

    /// `rho(H)`.
    pub fn cutoff(&self) -> &ComplexMatrix {
        &self.cutoff
    }

    /// `max_k rho(lambda_k)`, the norm of `rho(H)`.
    pub fn cutoff_norm(&self) -> f64 {
        self.window.max_on(self.eigenvalues())
    }

    pub fn localizer(&self, region: &Region, phi: &Mollifier) -> Result<ComplexMatrix> {
        Ok(quantize(&self.grid, &mollify_indicator(region, phi)?))
    }

    /// `|| Op(chi_W^phi) rho(H) ||`.
    pub fn localization_norm(&self, region: &Region, phi: &Mollifier) -> Result<f64> {
        let m = self.localizer(region, phi)?.mul(&self.cutoff);
        operator_norm_with(&m, &self.numerics)
    }

    pub fn sweep(&self, family: &RegionFamily, offsets: &[f64], phi: &Mollifier, epsilon: f64) -> Result<SweepResult> {
        check_offsets(offsets)?;
        let norms = offsets
            .iter()
            .map(|&a| self.localization_norm(&family.region(a, &self.grid)?, phi))
            .collect::<Result<Vec<f64>>>()?;
        let first_below = offsets.iter().zip(&norms).find(|(_, &n)| n <= epsilon).map(|(&a, _)| a);
        Ok(SweepResult {
            curve: LocalizationCurve {
                family: *family,
                offsets: offsets.to_vec(),
                norms,
                mollifier: *phi,
                window: self.window,
                grid: self.grid,
            },
            epsilon,
            first_below,
        })
    }

    /// `max_{t, u} || Op(chi_W^phi) e^{itH} rho(H) u || / ||u||` against the static norm.
    pub fn propagation_bound_check(
        &self,
        region: &Region,
        phi: &Mollifier,
        states: &[StateVector],
        times: &[f64],
    ) -> Result<PropagationReport> {
        let static_norm = self.localization_norm(region, phi)?;
        let v = &self.decomposition.eigenvectors;
        let b = self.localizer(region, phi)?.data() * v;
        let rho: Vec<f64> = self.eigenvalues().iter().map(|&l| self.window.eval(l)).collect();
        let mut dynamical_sup: f64 = 0.0;
        let mut worst = None;
        for (i, u) in states.iter().enumerate() {
            let n = u.norm();
            if !(n > 0.0) {
                return Err(Error::invalid(format!("state {i} is zero")));
            }
            let c = self.decomposition.coefficients(u);
            for &t in times {
                let w = DVector::from_iterator(
                    c.len(),
                    c.iter()
                        .zip(self.eigenvalues())
                        .zip(&rho)
                        .map(|((ck, &l), &r)| ck * C64::from_polar(r, t * l)),
                );
                let value = (&b * w).norm() / n;
                if value > dynamical_sup {
                    dynamical_sup = value;
                    worst = Some((i, t));
                }
            }
        }
        Ok(PropagationReport {
            dynamical_sup,
            static_norm,
            holds: dynamical_sup <= static_norm + PROPAGATION_SLACK,
            worst,
            states: states.len(),
            times: times.len(),
        })
    }

    /// `|| [e^{itH}, rho(H)] ||`.
    pub fn commutator_defect(&self, t: f64) -> Result<f64> {
        let u = self.decomposition.propagator(t);
        let c = u.mul(&self.cutoff).sub(&self.cutoff.mul(&u));
        operator_norm_with(&c, &self.numerics)
    }

    /// Sup of the resolved symbol of `rho(H)` over the part of each receding region
    /// that lies on the lattice.
    pub fn symbol_vanishing_check(&self, family: &RegionFamily, offsets: &[f64]) -> Result<DecayCurve> {
        check_offsets(offsets)?;
        let sym = resolved_symbol(&self.grid, &self.cutoff)?;
        let values = offsets
            .iter()
            .map(|&a| {
                let r = family.region(a, &self.grid)?;
                Ok(sym.sup_where(|x, xi| r.contains(x, xi)))
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(DecayCurve {
            offsets: offsets.to_vec(),
            values,
        })
    }

    /// Lattice seminorm of order `j` of the symbol of `Op(chi_W(a)^phi) rho(H)`.
    pub fn seminorm_product_decay(
        &self,
        family: &RegionFamily,
        offsets: &[f64],
        phi: &Mollifier,
        j: usize,
    ) -> Result<DecayCurve> {
        if j > 2 {
            return Err(Error::invalid(format!("seminorm index {j} exceeds 2")));
        }
        check_offsets(offsets)?;
        let values = offsets
            .iter()
            .map(|&a| {
                let m = self.localizer(&family.region(a, &self.grid)?, phi)?.mul(&self.cutoff);
                resolved_symbol(&self.grid, &m)?.seminorm(j)
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(DecayCurve {
            offsets: offsets.to_vec(),
            values,
        })
    }
}

pub fn check_offsets(offsets: &[f64]) -> Result<()> {
    if offsets.is_empty() {
        return Err(Error::invalid("offset list is empty"));
    }
    if offsets.iter().any(|a| !a.is_finite()) {
        return Err(Error::invalid("offsets must be finite"));
    }
    if offsets.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("offsets must be strictly ascending"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationCurve {
    pub family: RegionFamily,
    pub offsets: Vec<f64>,
    pub norms: Vec<f64>,
    pub mollifier: Mollifier,
    pub window: EnergyWindow,
    pub grid: PhaseGrid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub curve: LocalizationCurve,
    pub epsilon: f64,
    /// Smallest offset whose norm is at most `epsilon`.
    pub first_below: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationReport {
    pub dynamical_sup: f64,
    pub static_norm: f64,
    pub holds: bool,
    /// `(state index, time)` of the largest dynamical value.
    pub worst: Option<(usize, f64)>,
    pub states: usize,
    pub times: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayCurve {
    pub offsets: Vec<f64>,
    pub values: Vec<f64>,
}

impl DecayCurve {
    pub fn ratio(&self) -> f64 {
        self.values[self.values.len() - 1] / self.values[0]
    }
}

/// Each value is at most `(1 + jitter)` times its predecessor, up to `floor`.
pub fn is_nonincreasing(values: &[f64], jitter: f64, floor: f64) -> bool {
    values.windows(2).all(|w| w[1] <= (1.0 + jitter) * w[0] + floor)
}

/// 50 log-spaced times in `[0.1, 200]` after `t = 0`.
pub fn default_times() -> Vec<f64> {
    let (lo, hi): (f64, f64) = (0.1, 200.0);
    let mut t = vec![0.0];
    t.extend((0..50).map(|i| lo * (hi / lo).powf(i as f64 / 49.0)));
    t
}

/// Energy-localized test states (the top `rho`-weight eigenvectors and random
/// `rho`-weighted combinations) followed by `random` uniform vectors.
pub fn default_states(problem: &LocalizationProblem, random: usize, seed: u64) -> Vec<StateVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = problem.decomposition();
    let rho: Vec<f64> = problem
        .eigenvalues()
        .iter()
        .map(|&l| problem.window().eval(l))
        .collect();
    let mut order: Vec<usize> = (0..rho.len()).filter(|&k| rho[k] > 0.0).collect();
    order.sort_by(|&a, &b| rho[b].total_cmp(&rho[a]).then(a.cmp(&b)));
    let mut states: Vec<StateVector> = order.iter().take(4).map(|&k| d.eigenvector(k)).collect();
    if !order.is_empty() {
        for _ in 0..4 {
            let z = StateVector::random(rho.len(), &mut rng);
            let c = DVector::from_iterator(rho.len(), z.amplitudes().iter().zip(&rho).map(|(a, &r)| a * r));
            states.push(StateVector::new(&d.eigenvectors * c));
        }
    }
    states.extend((0..random).map(|_| StateVector::random(rho.len(), &mut rng)));
    states
}

/// Matrix of a state family, one column per state.
pub fn state_matrix(states: &[StateVector]) -> DMatrix<C64> {
    DMatrix::from_columns(&states.iter().map(|s| s.amplitudes().clone()).collect::<Vec<_>>())
}
