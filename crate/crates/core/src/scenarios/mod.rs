//! Anisotropic symbols `h(xi) + V(x)`, their boundary components, asymptotic
//! Hamiltonians and predicted essential spectra.

mod floquet;
mod profile;
mod spectrum;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, FieldIssue, Result};
use crate::numerics::{eigvalsh, smooth_step, ComplexMatrix};
use crate::phase_space::{PhaseGrid, Symbol};
use crate::weyl::quantize;

pub use floquet::{floquet_bands, FloquetBands, MIN_QUASIMOMENTA};
pub use profile::{EndBehavior, Profile};
pub use spectrum::{nearest_distance, PredictedSpectrum, SpectralInterval};

/// Number of probe points used to verify declared bounds.
pub const PROBE_POINTS: usize = 10_000;
/// Allowed gap between a declared limit and the symbol at the probe radius.
pub const LIMIT_TOL: f64 = 0.01;
/// Spacing of the probe mesh over the predicted set.
pub const PROBE_SPACING: f64 = 0.25;

/// Limit of `h` or `V` at one end of the line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Limit {
    Finite(f64),
    PlusInfinity,
    Periodic { cell: Profile, period: f64 },
}

impl Limit {
    fn from_end(end: EndBehavior, profile: &Profile) -> Limit {
        match end {
            EndBehavior::Finite(c) => Limit::Finite(c),
            EndBehavior::PlusInfinity => Limit::PlusInfinity,
            EndBehavior::Oscillating => Limit::Periodic {
                cell: profile.clone(),
                period: profile.scale(),
            },
        }
    }

    fn shifted(&self, c: f64) -> Limit {
        match self {
            Limit::Finite(v) => Limit::Finite(v + c),
            Limit::PlusInfinity => Limit::PlusInfinity,
            Limit::Periodic { cell, period } => Limit::Periodic {
                cell: cell.shifted(c),
                period: *period,
            },
        }
    }
}

/// Position-side part of the symbol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Potential {
    /// `V(x) = cell(x)` with `cell` of period `period` on the whole line.
    Periodic {
        periodic: PeriodicCell,
    },
    Profile(Profile),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodicCell {
    pub cell: Profile,
    pub period: f64,
}

impl Potential {
    pub fn periodic(cell: Profile, period: f64) -> Self {
        Potential::Periodic {
            periodic: PeriodicCell { cell, period },
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            Potential::Periodic { periodic } => periodic.cell.value(x),
            Potential::Profile(p) => p.value(x),
        }
    }

    pub fn bounds(&self) -> (f64, f64) {
        match self {
            Potential::Periodic { periodic } => periodic.cell.bounds(),
            Potential::Profile(p) => p.bounds(),
        }
    }

    pub fn scale(&self) -> f64 {
        match self {
            Potential::Periodic { periodic } => periodic.period,
            Potential::Profile(p) => p.scale(),
        }
    }

    pub fn limits(&self) -> (Limit, Limit) {
        match self {
            Potential::Periodic { periodic } => {
                let l = Limit::Periodic {
                    cell: periodic.cell.clone(),
                    period: periodic.period,
                };
                (l.clone(), l)
            }
            Potential::Profile(p) => {
                let (a, b) = p.ends();
                (Limit::from_end(a, p), Limit::from_end(b, p))
            }
        }
    }

    pub fn shifted(&self, c: f64) -> Potential {
        match self {
            Potential::Periodic { periodic } => Potential::periodic(periodic.cell.shifted(c), periodic.period),
            Potential::Profile(p) => Potential::Profile(p.shifted(c)),
        }
    }

    pub fn issues(&self) -> Vec<(String, String)> {
        match self {
            Potential::Periodic { periodic } => {
                let mut out: Vec<(String, String)> = periodic
                    .cell
                    .issues()
                    .into_iter()
                    .map(|(f, m)| (format!("periodic.cell.{f}"), m))
                    .collect();
                if !(periodic.period > 0.0 && periodic.period.is_finite()) {
                    out.push((
                        "periodic.period".into(),
                        format!("must be positive, got {}", periodic.period),
                    ));
                }
                out
            }
            Potential::Profile(p) => p.issues(),
        }
    }
}

/// Limit and range data declared for a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Declared {
    pub h_minus: Limit,
    pub h_plus: Limit,
    pub h_min: f64,
    pub h_max: f64,
    pub v_minus: Limit,
    pub v_plus: Limit,
    pub v_min: f64,
    pub v_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnisotropicScenario {
    pub name: String,
    pub h: Profile,
    pub v: Potential,
    pub declared: Declared,
}

impl AnisotropicScenario {
    /// Scenario with limits and bounds taken from the closed forms, then verified.
    pub fn new(name: impl Into<String>, h: Profile, v: Potential) -> Result<Self> {
        let (hm, hp) = h.ends();
        let (h_min, h_max) = h.bounds();
        let (v_minus, v_plus) = v.limits();
        let (v_min, v_max) = v.bounds();
        let declared = Declared {
            h_minus: Limit::from_end(hm, &h),
            h_plus: Limit::from_end(hp, &h),
            h_min,
            h_max,
            v_minus,
            v_plus,
            v_min,
            v_max,
        };
        AnisotropicScenario::with_declared(name, h, v, declared)
    }

    pub fn with_declared(name: impl Into<String>, h: Profile, v: Potential, declared: Declared) -> Result<Self> {
        let s = AnisotropicScenario {
            name: name.into(),
            h,
            v,
            declared,
        };
        let issues = s.verify();
        if issues.is_empty() {
            Ok(s)
        } else {
            Err(Error::Validation(issues))
        }
    }

    /// Numerical check of the declared data; empty when everything holds.
    pub fn verify(&self) -> Vec<FieldIssue> {
        let mut out = Vec::new();
        let mut push = |field: &str, message: String| {
            out.push(FieldIssue {
                field: field.to_string(),
                message,
            })
        };
        let mut param_issues = false;
        for (f, m) in self.h.issues() {
            push(&format!("h.{f}"), m);
            param_issues = true;
        }
        for (f, m) in self.v.issues() {
            push(&format!("v.{f}"), m);
            param_issues = true;
        }
        if param_issues {
            return out;
        }
        let d = &self.declared;
        let rh = 10.0 * self.h.scale();
        let h = |t: f64| self.h.value(t);
        for (field, lim, sign) in [("h.minus", &d.h_minus, -1.0), ("h.plus", &d.h_plus, 1.0)] {
            let at = h(sign * rh);
            match lim {
                Limit::Finite(c) if (at - c).abs() > LIMIT_TOL => {
                    push(field, format!("declared limit {c} but h({}) = {at}", sign * rh))
                }
                Limit::PlusInfinity if !(at > h(0.5 * sign * rh)) => {
                    push(field, "declared +inf but h does not grow".to_string())
                }
                Limit::Periodic { .. } => push(field, "h must have finite or +inf limits".to_string()),
                _ => {}
            }
        }
        if (d.h_plus == Limit::PlusInfinity || d.h_minus == Limit::PlusInfinity) && d.h_max != f64::INFINITY {
            push("h.max", "unbounded h needs h_max = +inf".to_string());
        }
        check_bounds(&mut push, "h.bounds", h, rh, d.h_min, d.h_max);

        let rv = 10.0 * self.v.scale();
        let v = |x: f64| self.v.value(x);
        for (field, lim, sign) in [("v.minus", &d.v_minus, -1.0), ("v.plus", &d.v_plus, 1.0)] {
            match lim {
                Limit::Finite(c) => {
                    let at = v(sign * rv);
                    if (at - c).abs() > LIMIT_TOL {
                        push(field, format!("declared limit {c} but V({}) = {at}", sign * rv));
                    }
                }
                Limit::PlusInfinity => push(field, "V must have finite or periodic limits".to_string()),
                Limit::Periodic { cell, period } => {
                    let worst = (0..200)
                        .map(|i| sign * (rv + 2.0 * period * i as f64 / 200.0))
                        .map(|x| (v(x) - cell.value(x)).abs())
                        .fold(0.0, f64::max);
                    if worst > LIMIT_TOL {
                        push(field, format!("V differs from its periodic limit by {worst:.3e}"));
                    }
                    let drift = (0..200)
                        .map(|i| -period + 2.0 * period * i as f64 / 200.0)
                        .map(|x| (cell.value(x + period) - cell.value(x)).abs())
                        .fold(0.0, f64::max);
                    if drift > 1e-9 * (1.0 + cell.bounds().1.abs()) {
                        push(field, format!("cell is not {period}-periodic (drift {drift:.3e})"));
                    }
                }
            }
        }
        check_bounds(&mut push, "v.bounds", v, rv, d.v_min, d.v_max);
        out
    }

    pub fn is_elliptic(&self) -> bool {
        self.declared.h_minus == Limit::PlusInfinity || self.declared.h_plus == Limit::PlusInfinity
    }

    pub fn h_symbol(&self) -> Symbol {
        let p = self.h.clone();
        Symbol::of_momentum(move |xi| p.value(xi))
    }

    pub fn v_symbol(&self) -> Symbol {
        let p = self.v.clone();
        Symbol::of_position(move |x| p.value(x))
    }

    pub fn symbol(&self) -> Symbol {
        self.h_symbol().add(&self.v_symbol())
    }

    /// Same scenario with `V` replaced by `V + c`.
    pub fn shifted_potential(&self, c: f64) -> Result<Self> {
        let mut d = self.declared.clone();
        d.v_minus = d.v_minus.shifted(c);
        d.v_plus = d.v_plus.shifted(c);
        d.v_min += c;
        d.v_max += c;
        AnisotropicScenario::with_declared(self.name.clone(), self.h.clone(), self.v.shifted(c), d)
    }
}

fn check_bounds(push: &mut impl FnMut(&str, String), field: &str, f: impl Fn(f64) -> f64, r: f64, lo: f64, hi: f64) {
    if !(lo <= hi) || !lo.is_finite() {
        push(field, format!("declared bounds [{lo}, {hi}] are not ordered"));
        return;
    }
    let slack = 1e-12 * (1.0 + lo.abs().max(if hi.is_finite() { hi.abs() } else { 0.0 }));
    for i in 0..PROBE_POINTS {
        let t = -r + 2.0 * r * i as f64 / (PROBE_POINTS - 1) as f64;
        let v = f(t);
        if v < lo - slack || v > hi + slack {
            push(field, format!("value {v} at {t} outside declared [{lo}, {hi}]"));
            return;
        }
    }
}

pub const BUILTIN_SCENARIOS: [&str; 4] = ["step", "tanh", "constant", "mathieu"];

/// `h = xi^2`, `V = (1 + tanh x) / 2`.
pub fn step_scenario() -> AnisotropicScenario {
    AnisotropicScenario::new(
        "step",
        Profile::quadratic(),
        Potential::Profile(Profile::tanh(1.0, 0.5, 0.5)),
    )
    .expect("builtin scenario is consistent")
}

/// `h = tanh xi`, `V = 5 + 3 tanh(x / 3)`.
pub fn tanh_scenario() -> AnisotropicScenario {
    AnisotropicScenario::new(
        "tanh",
        Profile::tanh(1.0, 0.0, 1.0),
        Potential::Profile(Profile::tanh(3.0, 5.0, 3.0)),
    )
    .expect("builtin scenario is consistent")
}

/// `h = 1`, `V = 2`.
pub fn constant_scenario() -> AnisotropicScenario {
    AnisotropicScenario::new(
        "constant",
        Profile::constant(1.0),
        Potential::Profile(Profile::constant(2.0)),
    )
    .expect("builtin scenario is consistent")
}

/// `h = xi^2`, `V = 2 cos x`.
pub fn mathieu_scenario() -> AnisotropicScenario {
    let t = 2.0 * std::f64::consts::PI;
    AnisotropicScenario::new(
        "mathieu",
        Profile::quadratic(),
        Potential::periodic(
            Profile::Cosine {
                amplitude: 2.0,
                period: t,
                offset: 0.0,
            },
            t,
        ),
    )
    .expect("builtin scenario is consistent")
}

pub fn builtin(name: &str) -> Option<AnisotropicScenario> {
    match name {
        "step" => Some(step_scenario()),
        "tanh" => Some(tanh_scenario()),
        "constant" => Some(constant_scenario()),
        "mathieu" => Some(mathieu_scenario()),
        _ => None,
    }
}

/// Edges of the phase-space square at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryComponent {
    XMinus,
    XPlus,
    XiMinus,
    XiPlus,
}

impl BoundaryComponent {
    pub const ALL: [BoundaryComponent; 4] = [
        BoundaryComponent::XMinus,
        BoundaryComponent::XPlus,
        BoundaryComponent::XiMinus,
        BoundaryComponent::XiPlus,
    ];

    pub fn is_position(self) -> bool {
        matches!(self, BoundaryComponent::XMinus | BoundaryComponent::XPlus)
    }

    pub fn sign(self) -> f64 {
        match self {
            BoundaryComponent::XMinus | BoundaryComponent::XiMinus => -1.0,
            _ => 1.0,
        }
    }
}

impl fmt::Display for BoundaryComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryComponent::XMinus => "x_minus",
            BoundaryComponent::XPlus => "x_plus",
            BoundaryComponent::XiMinus => "xi_minus",
            BoundaryComponent::XiPlus => "xi_plus",
        })
    }
}

/// Bloch discretization used when a limit is periodic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FloquetOptions {
    pub cell_points: usize,
    pub quasimomenta: usize,
}

impl Default for FloquetOptions {
    fn default() -> Self {
        FloquetOptions {
            cell_points: 31,
            quasimomenta: 32,
        }
    }
}

/// Predicted spectrum of the asymptotic Hamiltonian on one component.
pub fn component_spectrum(
    s: &AnisotropicScenario,
    f: BoundaryComponent,
    opts: &FloquetOptions,
) -> Result<PredictedSpectrum> {
    let d = &s.declared;
    let interval = |lo: f64, hi: f64| PredictedSpectrum::from_intervals(vec![SpectralInterval::new(lo, hi)]);
    match f {
        BoundaryComponent::XMinus | BoundaryComponent::XPlus => {
            let lim = if f == BoundaryComponent::XMinus {
                &d.v_minus
            } else {
                &d.v_plus
            };
            match lim {
                Limit::Finite(c) => Ok(interval(d.h_min + c, d.h_max + c)),
                Limit::Periodic { cell, period } => {
                    let cell = cell.clone();
                    let v = Symbol::of_position(move |x| cell.value(x));
                    let bands = floquet_bands(&s.h_symbol(), &v, *period, opts.cell_points, opts.quasimomenta)?;
                    Ok(if s.is_elliptic() { bands.elliptic_tail() } else { bands }.spectrum())
                }
                Limit::PlusInfinity => Err(Error::UnsupportedComponent(format!("{f}: V has no finite limit"))),
            }
        }
        BoundaryComponent::XiMinus | BoundaryComponent::XiPlus => {
            let lim = if f == BoundaryComponent::XiMinus {
                &d.h_minus
            } else {
                &d.h_plus
            };
            match lim {
                Limit::Finite(c) => Ok(interval(c + d.v_min, c + d.v_max)),
                _ => Ok(PredictedSpectrum::empty()),
            }
        }
    }
}

/// Union of the four component contributions.
pub fn predicted_essential_spectrum(s: &AnisotropicScenario) -> Result<PredictedSpectrum> {
    predicted_essential_spectrum_with(s, &FloquetOptions::default())
}

pub fn predicted_essential_spectrum_with(s: &AnisotropicScenario, opts: &FloquetOptions) -> Result<PredictedSpectrum> {
    let mut out = PredictedSpectrum::empty();
    for f in BoundaryComponent::ALL {
        out = out.union(&component_spectrum(s, f, opts)?);
    }
    Ok(out)
}

/// Translation limit of the symbol on `f`, as a symbol.
pub fn asymptotic_symbol(s: &AnisotropicScenario, f: BoundaryComponent) -> Result<Symbol> {
    let d = &s.declared;
    match f {
        BoundaryComponent::XMinus | BoundaryComponent::XPlus => {
            let lim = if f == BoundaryComponent::XMinus {
                &d.v_minus
            } else {
                &d.v_plus
            };
            let h = s.h.clone();
            match lim {
                Limit::Finite(c) => {
                    let c = *c;
                    Ok(Symbol::of_momentum(move |xi| h.value(xi) + c))
                }
                Limit::Periodic { cell, .. } => {
                    let cell = cell.clone();
                    Ok(Symbol::of_momentum(move |xi| h.value(xi)).add(&Symbol::of_position(move |x| cell.value(x))))
                }
                Limit::PlusInfinity => Err(Error::UnsupportedComponent(format!("{f}: V has no finite limit"))),
            }
        }
        BoundaryComponent::XiMinus | BoundaryComponent::XiPlus => {
            let lim = if f == BoundaryComponent::XiMinus {
                &d.h_minus
            } else {
                &d.h_plus
            };
            match lim {
                Limit::Finite(c) => {
                    let (c, v) = (*c, s.v.clone());
                    Ok(Symbol::of_position(move |x| c + v.value(x)))
                }
                _ => Err(Error::UnsupportedComponent(format!(
                    "{f}: h is unbounded there, the asymptotic Hamiltonian is infinite"
                ))),
            }
        }
    }
}

/// `H(F)`: quantization of the asymptotic symbol on the grid.
pub fn asymptotic_hamiltonian(
    s: &AnisotropicScenario,
    f: BoundaryComponent,
    grid: &PhaseGrid,
) -> Result<ComplexMatrix> {
    Ok(quantize(grid, &asymptotic_symbol(s, f)?))
}

/// Control of the periodic wrap at the box edges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoxOptions {
    pub bridge: bool,
    /// Fraction of the half period used by the bridge.
    pub bridge_fraction: f64,
}

impl Default for BoxOptions {
    fn default() -> Self {
        BoxOptions {
            bridge: true,
            bridge_fraction: 0.05,
        }
    }
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Periodic version of `f` on `[-P/2, P/2)`. If the two ends disagree, the
/// outer `fraction * P/2` on each side is replaced by a smooth blend from
/// `f(P/2 - beta)` to `f(-P/2 + beta)` across the seam.
pub fn bridged(f: RealFn, period: f64, fraction: f64) -> (RealFn, bool) {
    let half = 0.5 * period;
    let (top, bottom) = (f(half), f(-half));
    if (top - bottom).abs() <= 1e-9 * (1.0 + top.abs() + bottom.abs()) || fraction <= 0.0 {
        return (f, false);
    }
    let beta = fraction * half;
    let a = f(half - beta);
    let b = f(-half + beta);
    let g = move |t: f64| {
        let u = if (-half..half).contains(&t) {
            t
        } else {
            (t + half).rem_euclid(period) - half
        };
        let s = if u > half - beta {
            (u - (half - beta)) / (2.0 * beta)
        } else if u < -half + beta {
            (u + half + beta) / (2.0 * beta)
        } else {
            return f(u);
        };
        let w = smooth_step(s);
        (1.0 - w) * a + w * b
    };
    (Arc::new(g), true)
}

/// Box version of `h(xi) + V(x)` with the wrap bridges applied.
#[derive(Clone)]
pub struct BoxSymbol {
    pub h: Symbol,
    pub v: Symbol,
    pub h_bridged: bool,
    pub v_bridged: bool,
}

impl BoxSymbol {
    pub fn symbol(&self) -> Symbol {
        self.h.add(&self.v)
    }
}

pub fn box_symbol(s: &AnisotropicScenario, grid: &PhaseGrid, opts: &BoxOptions) -> BoxSymbol {
    let frac = if opts.bridge { opts.bridge_fraction } else { 0.0 };
    let hp = s.h.clone();
    let vp = s.v.clone();
    let (hf, h_bridged) = bridged(Arc::new(move |t| hp.value(t)), grid.momentum_period(), frac);
    let (vf, v_bridged) = bridged(Arc::new(move |t| vp.value(t)), grid.box_length(), frac);
    BoxSymbol {
        h: Symbol::of_momentum(move |xi| hf(xi)),
        v: Symbol::of_position(move |x| vf(x)),
        h_bridged,
        v_bridged,
    }
}

/// Operator of the full scenario on the finite box.
pub fn box_hamiltonian(s: &AnisotropicScenario, grid: &PhaseGrid, opts: &BoxOptions) -> ComplexMatrix {
    let b = box_symbol(s, grid, opts);
    quantize(grid, &b.h).add(&quantize(grid, &b.v))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub predicted: PredictedSpectrum,
    /// Predicted set restricted to `[lambda_min, lambda_max]`.
    pub compared: PredictedSpectrum,
    pub clipped: bool,
    pub eigenvalues: Vec<f64>,
    pub one_sided_hausdorff: f64,
}

/// Distance from every probe point of the predicted set to the box spectrum.
pub fn numeric_spectrum_check(s: &AnisotropicScenario, grid: &PhaseGrid, opts: &BoxOptions) -> Result<SpectrumReport> {
    if grid.box_length() < 10.0 * s.v.scale() {
        return Err(Error::invalid(format!(
            "box length {} is below 10x the potential scale {}",
            grid.box_length(),
            s.v.scale()
        )));
    }
    let predicted = predicted_essential_spectrum(s)?;
    let eigenvalues = eigvalsh(&box_hamiltonian(s, grid, opts))?;
    Ok(compare_spectrum(predicted, eigenvalues))
}

/// One-sided comparison of a predicted set with an ascending eigenvalue list.
pub fn compare_spectrum(predicted: PredictedSpectrum, eigenvalues: Vec<f64>) -> SpectrumReport {
    let (lo, hi) = match (eigenvalues.first(), eigenvalues.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => (f64::INFINITY, f64::NEG_INFINITY),
    };
    let (compared, clipped) = predicted.clip(lo, hi);
    let one_sided_hausdorff = compared.one_sided_hausdorff(&eigenvalues, PROBE_SPACING);
    SpectrumReport {
        predicted,
        compared,
        clipped,
        eigenvalues,
        one_sided_hausdorff,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::C64;
    use proptest::prelude::*;

    fn single(lo: f64, hi: f64) -> PredictedSpectrum {
        PredictedSpectrum::from_intervals(vec![SpectralInterval::new(lo, hi)])
    }

    #[test]
    fn builtins_verify() {
        for name in BUILTIN_SCENARIOS {
            assert!(builtin(name).is_some(), "{name}");
        }
        assert!(builtin("nope").is_none());
    }

    #[test]
    fn wrong_declared_limit_is_reported() {
        let s = tanh_scenario();
        let mut d = s.declared.clone();
        d.v_plus = Limit::Finite(7.0);
        d.h_min = 0.0;
        let err = AnisotropicScenario::with_declared("bad", s.h.clone(), s.v.clone(), d).unwrap_err();
        let Error::Validation(issues) = err else { panic!() };
        let fields: Vec<&str> = issues.iter().map(|i| i.field.as_str()).collect();
        assert!(fields.contains(&"v.plus") && fields.contains(&"h.bounds"), "{fields:?}");
    }

    #[test]
    fn elliptic_prediction() {
        // h_m = 0, V_- = 0, V_+ = 1: [h_m + min(V_-, V_+), inf)
        let s = AnisotropicScenario::new(
            "e",
            Profile::quadratic(),
            Potential::Profile(Profile::tanh(1.0, 0.5, 0.5)),
        )
        .unwrap();
        assert_eq!(predicted_essential_spectrum(&s).unwrap(), single(0.0, f64::INFINITY));
        assert!(s.is_elliptic());
    }

    #[test]
    fn full_anisotropy_prediction() {
        let s = tanh_scenario();
        let parts: Vec<PredictedSpectrum> = BoundaryComponent::ALL
            .iter()
            .map(|&f| component_spectrum(&s, f, &FloquetOptions::default()).unwrap())
            .collect();
        assert_eq!(parts[0], single(1.0, 3.0));
        assert_eq!(parts[1], single(7.0, 9.0));
        assert_eq!(parts[2], single(1.0, 7.0));
        assert_eq!(parts[3], single(3.0, 9.0));
        assert_eq!(predicted_essential_spectrum(&s).unwrap(), single(1.0, 9.0));
    }

    #[test]
    fn constant_prediction_is_a_point() {
        assert_eq!(
            predicted_essential_spectrum(&constant_scenario()).unwrap(),
            single(3.0, 3.0)
        );
    }

    #[test]
    fn swapping_roles_keeps_the_union() {
        let a = Profile::tanh(1.0, 0.0, 1.0);
        let b = Profile::tanh(3.0, 5.0, 3.0);
        let s = AnisotropicScenario::new("ab", a.clone(), Potential::Profile(b.clone())).unwrap();
        let t = AnisotropicScenario::new("ba", b, Potential::Profile(a)).unwrap();
        assert_eq!(
            predicted_essential_spectrum(&s).unwrap(),
            predicted_essential_spectrum(&t).unwrap()
        );
        let x = |sc: &AnisotropicScenario, f| component_spectrum(sc, f, &FloquetOptions::default()).unwrap();
        assert_eq!(x(&s, BoundaryComponent::XPlus), x(&t, BoundaryComponent::XiPlus));
        assert_eq!(x(&s, BoundaryComponent::XiMinus), x(&t, BoundaryComponent::XMinus));
    }

    #[test]
    fn step_xplus_is_fourier_diagonal() {
        let s = step_scenario();
        let g = PhaseGrid::new(63, 30.0).unwrap();
        let h = asymptotic_hamiltonian(&s, BoundaryComponent::XPlus, &g).unwrap();
        let ev = eigvalsh(&h).unwrap();
        let mut expect: Vec<f64> = g.momenta().iter().map(|p| p * p + 1.0).collect();
        expect.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-9 * (1.0 + b.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn xiplus_is_multiplication_operator() {
        let s = tanh_scenario();
        let g = PhaseGrid::new(63, 30.0).unwrap();
        let h = asymptotic_hamiltonian(&s, BoundaryComponent::XiPlus, &g).unwrap();
        for j in 0..63 {
            for k in 0..63 {
                let expect = if j == k {
                    1.0 + 5.0 + 3.0 * (g.position(j) / 3.0).tanh()
                } else {
                    0.0
                };
                assert_eq!(h.get(j, k), C64::new(expect, 0.0));
            }
        }
    }

    #[test]
    fn elliptic_momentum_edges_are_unsupported() {
        let g = PhaseGrid::new(31, 20.0).unwrap();
        let s = step_scenario();
        for f in [BoundaryComponent::XiMinus, BoundaryComponent::XiPlus] {
            assert!(matches!(
                asymptotic_hamiltonian(&s, f, &g),
                Err(Error::UnsupportedComponent(_))
            ));
            assert!(component_spectrum(&s, f, &FloquetOptions::default())
                .unwrap()
                .is_empty());
        }
    }

    #[test]
    fn constant_components_coincide() {
        let s = constant_scenario();
        let g = PhaseGrid::new(31, 20.0).unwrap();
        let hs: Vec<ComplexMatrix> = BoundaryComponent::ALL
            .iter()
            .map(|&f| asymptotic_hamiltonian(&s, f, &g).unwrap())
            .collect();
        for h in &hs[1..] {
            assert!(h.max_entry_distance(&hs[0]) < 1e-14);
        }
    }

    #[test]
    fn asymptotic_spectra_lie_in_prediction() {
        let s = tanh_scenario();
        let g = PhaseGrid::new(101, 60.0).unwrap();
        let pred = predicted_essential_spectrum(&s).unwrap();
        for f in BoundaryComponent::ALL {
            let comp = component_spectrum(&s, f, &FloquetOptions::default()).unwrap();
            for e in eigvalsh(&asymptotic_hamiltonian(&s, f, &g).unwrap()).unwrap() {
                assert!(comp.contains(e, 1e-9) && pred.contains(e, 1e-9), "{f}: {e}");
            }
        }
    }

    #[test]
    fn mathieu_prediction_uses_bands() {
        let s = mathieu_scenario();
        let p = predicted_essential_spectrum(&s).unwrap();
        // the lowest Mathieu band starts below the bottom of V and has a gap above it
        let first = p.intervals()[0];
        assert!(first.lo < 0.0 && first.lo > -2.0);
        assert!(p.intervals().len() > 1);
        assert_eq!(p.intervals().last().unwrap().hi, f64::INFINITY);
    }

    #[test]
    fn bridge_only_on_mismatch() {
        let g = PhaseGrid::new(101, 40.0).unwrap();
        let b = box_symbol(&step_scenario(), &g, &BoxOptions::default());
        assert!(b.v_bridged && !b.h_bridged);
        let t = box_symbol(&tanh_scenario(), &g, &BoxOptions::default());
        assert!(t.v_bridged && t.h_bridged);
        let m = box_symbol(
            &mathieu_scenario(),
            &PhaseGrid::new(101, 20.0 * std::f64::consts::PI).unwrap(),
            &BoxOptions::default(),
        );
        assert!(!m.v_bridged && !m.h_bridged);
    }

    #[test]
    fn bridge_keeps_bulk_and_closes_the_seam() {
        let f: RealFn = Arc::new(|x: f64| (x / 2.0).tanh());
        let (g, on) = bridged(f.clone(), 40.0, 0.05);
        assert!(on);
        for k in 0..100 {
            let x = -18.9 + 37.8 * k as f64 / 99.0;
            assert_eq!(g(x), f(x));
        }
        assert!((g(20.0 - 1e-9) - g(-20.0)).abs() < 1e-6);
        assert!((g(-20.0) - 0.5 * (f(19.0) + f(-19.0))).abs() < 1e-15);
        assert_eq!(g(-19.0), f(-19.0));
        assert_eq!(g(19.0), f(19.0));
        assert!((g(20.0 + 3.0) - g(-17.0)).abs() < 1e-15);
    }

    #[test]
    fn constant_numeric_check_is_exact() {
        let g = PhaseGrid::new(41, 20.0).unwrap();
        let r = numeric_spectrum_check(&constant_scenario(), &g, &BoxOptions::default()).unwrap();
        assert!(r.one_sided_hausdorff <= 1e-9);
        assert_eq!(r.predicted, single(3.0, 3.0));
    }

    #[test]
    fn elliptic_numeric_check_is_clipped() {
        let g = PhaseGrid::new(81, 40.0).unwrap();
        let r = numeric_spectrum_check(&step_scenario(), &g, &BoxOptions::default()).unwrap();
        assert!(r.clipped);
        assert!(r.compared.intervals().iter().all(|i| i.hi.is_finite()));
    }

    #[test]
    fn small_box_is_rejected() {
        let g = PhaseGrid::new(41, 20.0).unwrap();
        assert!(numeric_spectrum_check(&tanh_scenario(), &g, &BoxOptions::default()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn potential_shift_moves_prediction(c in -5.0f64..5.0) {
            let s = tanh_scenario();
            let moved = s.shifted_potential(c).unwrap();
            let a = predicted_essential_spectrum(&s).unwrap().shift(c);
            let b = predicted_essential_spectrum(&moved).unwrap();
            prop_assert_eq!(a.intervals().len(), b.intervals().len());
            for (x, y) in a.intervals().iter().zip(b.intervals()) {
                prop_assert!((x.lo - y.lo).abs() < 1e-12 && (x.hi - y.hi).abs() < 1e-12);
            }
        }
    }
}
