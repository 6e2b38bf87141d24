use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, FieldIssue, Result};
use crate::localization::{EnergyWindow, DEFAULT_COLLAR};
use crate::numerics::NumericsConfig;
use crate::phase_space::PhaseGrid;
use crate::scenarios::{
    builtin, AnisotropicScenario, BoundaryComponent, BoxOptions, FloquetOptions, Potential, Profile,
};

/// Default mollifier width in lattice cells, on each axis.
pub const DEFAULT_MOLLIFIER_CELLS: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "L")]
    pub l: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MollifierConfig {
    /// Position half-width; `4 dx` when absent.
    pub width_x: Option<f64>,
    /// Momentum half-width; `4 (2 pi / L)` when absent.
    pub width_xi: Option<f64>,
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub alpha: f64,
    pub beta: f64,
    #[serde(default = "half")]
    pub plateau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeConfig {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl RangeConfig {
    /// `start, start + step, ...` up to and including `stop` (to `1e-9 step`).
    pub fn expand(&self) -> Vec<f64> {
        let mut out = Vec::new();
        if !(self.step > 0.0) || !(self.stop >= self.start) {
            return out;
        }
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        for k in 0..=count {
            out.push(self.start + k as f64 * self.step);
        }
        out
    }
}

fn default_collar() -> f64 {
    DEFAULT_COLLAR
}

fn default_seminorm() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub component: BoundaryComponent,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offsets: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<RangeConfig>,
    #[serde(default = "default_collar")]
    pub collar: f64,
    /// Index of the lattice seminorm reported by the product-decay check.
    #[serde(default = "default_seminorm")]
    pub seminorm_order: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimesConfig {
    /// Explicit times; overrides the log-spaced schedule.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    pub count: usize,
    pub min: f64,
    pub max: f64,
    pub include_zero: bool,
}

impl Default for TimesConfig {
    fn default() -> Self {
        TimesConfig {
            values: None,
            count: 50,
            min: 0.1,
            max: 200.0,
            include_zero: true,
        }
    }
}

impl TimesConfig {
    pub fn times(&self) -> Vec<f64> {
        if let Some(v) = &self.values {
            return v.clone();
        }
        let mut t = Vec::with_capacity(self.count + 1);
        if self.include_zero {
            t.push(0.0);
        }
        match self.count {
            0 => {}
            1 => t.push(self.min),
            n => t.extend((0..n).map(|i| self.min * (self.max / self.min).powf(i as f64 / (n - 1) as f64))),
        }
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagationConfig {
    pub random_states: usize,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        PropagationConfig { random_states: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TolerancesConfig {
    /// Target localization norm of a sweep.
    pub epsilon: f64,
    /// Sweeps whose smallest norm stays at or above this are flagged as plateaus.
    pub plateau: f64,
    /// Accepted one-sided Hausdorff distance of the spectrum check.
    pub hausdorff: f64,
}

impl Default for TolerancesConfig {
    fn default() -> Self {
        TolerancesConfig {
            epsilon: 0.1,
            plateau: 0.3,
            hausdorff: 0.15,
        }
    }
}

/// One experiment, as read from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Builtin scenario name, or a label when `h` and `v` are both given.
    pub scenario: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<Profile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Potential>,
    pub grid: GridConfig,
    #[serde(default)]
    pub mollifier: MollifierConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_window: Option<WindowConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub times: TimesConfig,
    #[serde(default)]
    pub propagation: PropagationConfig,
    #[serde(default)]
    pub tolerances: TolerancesConfig,
    #[serde(default, rename = "box")]
    pub box_options: BoxOptions,
    #[serde(default)]
    pub floquet: FloquetOptions,
    #[serde(default)]
    pub numerics: NumericsConfig,
}

/// A config after validation, with every default that was filled in listed.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedConfig {
    pub config: ScenarioConfig,
    pub normalizations: Vec<String>,
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> std::result::Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn grid(&self) -> Result<PhaseGrid> {
        PhaseGrid::new(self.grid.n, self.grid.l)
    }

    pub fn scenario(&self) -> Result<AnisotropicScenario> {
        let base = builtin(&self.scenario);
        let h = match (&self.h, &base) {
            (Some(h), _) => h.clone(),
            (None, Some(b)) => b.h.clone(),
            (None, None) => {
                return Err(Error::invalid(format!(
                    "unknown scenario {:?} and no h given",
                    self.scenario
                )))
            }
        };
        let v = match (&self.v, &base) {
            (Some(v), _) => v.clone(),
            (None, Some(b)) => b.v.clone(),
            (None, None) => {
                return Err(Error::invalid(format!(
                    "unknown scenario {:?} and no v given",
                    self.scenario
                )))
            }
        };
        if self.h.is_none() && self.v.is_none() {
            return Ok(base.expect("checked above"));
        }
        AnisotropicScenario::new(self.scenario.clone(), h, v)
    }

    pub fn window(&self) -> Result<EnergyWindow> {
        match &self.energy_window {
            Some(w) => EnergyWindow::new(w.alpha, w.beta, w.plateau),
            None => Err(Error::Validation(vec![FieldIssue {
                field: "energy_window".into(),
                message: "required by this command".into(),
            }])),
        }
    }

    /// Every rule violation, in field order.
    pub fn issues(&self) -> Vec<FieldIssue> {
        let mut out = Vec::new();
        let mut push = |field: &str, message: String| {
            out.push(FieldIssue {
                field: field.into(),
                message,
            })
        };

        let known = builtin(&self.scenario).is_some();
        if !known && (self.h.is_none() || self.v.is_none()) {
            push(
                "scenario",
                format!(
                    "{:?} is not a builtin scenario; give both h and v for a custom one",
                    self.scenario
                ),
            );
        }
        if let Some(h) = &self.h {
            for (f, m) in h.issues() {
                push(&format!("h.{f}"), m);
            }
        }
        if let Some(v) = &self.v {
            for (f, m) in v.issues() {
                push(&format!("v.{f}"), m);
            }
        }

        if self.grid.n.is_multiple_of(2) {
            push("grid.N", format!("must be odd, got {}", self.grid.n));
        } else if self.grid.n < 3 {
            push("grid.N", format!("must be at least 3, got {}", self.grid.n));
        }
        if !(self.grid.l > 0.0 && self.grid.l.is_finite()) {
            push("grid.L", format!("must be positive and finite, got {}", self.grid.l));
        }

        for (f, w) in [
            ("mollifier.width_x", self.mollifier.width_x),
            ("mollifier.width_xi", self.mollifier.width_xi),
        ] {
            if let Some(w) = w {
                if !(w > 0.0 && w.is_finite()) {
                    push(f, format!("must be positive, got {w}"));
                }
            }
        }

        if let Some(w) = &self.energy_window {
            if !(w.alpha.is_finite() && w.beta.is_finite() && w.alpha < w.beta) {
                push(
                    "energy_window",
                    format!("needs alpha < beta, got ({}, {})", w.alpha, w.beta),
                );
            }
            if !(w.plateau > 0.0 && w.plateau < 1.0) {
                push(
                    "energy_window.plateau",
                    format!("must lie in (0, 1), got {}", w.plateau),
                );
            }
        }

        if let Some(s) = &self.sweep {
            match (&s.offsets, &s.range) {
                (Some(_), Some(_)) => push("sweep", "give either offsets or range, not both".into()),
                (None, None) => push("sweep.offsets", "missing; give offsets or range".into()),
                _ => {}
            }
            if let Some(r) = &s.range {
                if !(r.step > 0.0 && r.step.is_finite()) {
                    push("sweep.range.step", format!("must be positive, got {}", r.step));
                }
                if !(r.start.is_finite() && r.stop.is_finite() && r.stop >= r.start) {
                    push(
                        "sweep.range",
                        format!("needs start <= stop, got ({}, {})", r.start, r.stop),
                    );
                }
            }
            if let Some(o) = &s.offsets {
                if o.is_empty() {
                    push("sweep.offsets", "is empty".into());
                } else if o.iter().any(|a| !a.is_finite()) {
                    push("sweep.offsets", "must be finite".into());
                } else if o.windows(2).any(|w| w[0] >= w[1]) {
                    push("sweep.offsets", "must be strictly ascending".into());
                }
            }
            if !(0.0..0.5).contains(&s.collar) {
                push("sweep.collar", format!("must lie in [0, 0.5), got {}", s.collar));
            }
            if s.seminorm_order > 2 {
                push("sweep.seminorm_order", format!("at most 2, got {}", s.seminorm_order));
            }
        }

        if let Some(v) = &self.times.values {
            if v.is_empty() || v.iter().any(|t| !t.is_finite()) {
                push("times.values", "must be a nonempty list of finite times".into());
            }
        } else if !(self.times.min > 0.0 && self.times.max >= self.times.min && self.times.max.is_finite()) {
            push(
                "times",
                format!("needs 0 < min <= max, got ({}, {})", self.times.min, self.times.max),
            );
        }

        let t = &self.tolerances;
        for (f, v) in [
            ("tolerances.epsilon", t.epsilon),
            ("tolerances.plateau", t.plateau),
            ("tolerances.hausdorff", t.hausdorff),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                push(f, format!("must be positive, got {v}"));
            }
        }
        if !(self.box_options.bridge_fraction >= 0.0 && self.box_options.bridge_fraction < 1.0) {
            push(
                "box.bridge_fraction",
                format!("must lie in [0, 1), got {}", self.box_options.bridge_fraction),
            );
        }
        if self.floquet.cell_points.is_multiple_of(2) {
            push(
                "floquet.cell_points",
                format!("must be odd, got {}", self.floquet.cell_points),
            );
        }
        if self.floquet.quasimomenta < crate::scenarios::MIN_QUASIMOMENTA {
            push(
                "floquet.quasimomenta",
                format!(
                    "at least {}, got {}",
                    crate::scenarios::MIN_QUASIMOMENTA,
                    self.floquet.quasimomenta
                ),
            );
        }

        if out.is_empty() && (self.h.is_some() || self.v.is_some()) {
            if let Err(Error::Validation(more)) = self.scenario() {
                out.extend(more);
            }
        }
        out
    }

    /// Checks every rule, then fills defaults that depend on the grid.
    pub fn validate(mut self) -> Result<ValidatedConfig> {
        let issues = self.issues();
        if !issues.is_empty() {
            return Err(Error::Validation(issues));
        }
        let grid = self.grid()?;
        let mut normalizations = Vec::new();
        if self.mollifier.width_x.is_none() {
            let w = DEFAULT_MOLLIFIER_CELLS * grid.dx();
            normalizations.push(format!(
                "mollifier.width_x defaulted to {DEFAULT_MOLLIFIER_CELLS} dx = {w}"
            ));
            self.mollifier.width_x = Some(w);
        }
        if self.mollifier.width_xi.is_none() {
            let w = DEFAULT_MOLLIFIER_CELLS * grid.momentum_spacing();
            normalizations.push(format!(
                "mollifier.width_xi defaulted to {DEFAULT_MOLLIFIER_CELLS} dxi = {w}"
            ));
            self.mollifier.width_xi = Some(w);
        }
        if let Some(s) = &mut self.sweep {
            if let Some(r) = s.range.take() {
                let o = r.expand();
                normalizations.push(format!(
                    "sweep.range ({}, {}, {}) expanded to {} offsets",
                    r.start,
                    r.stop,
                    r.step,
                    o.len()
                ));
                s.offsets = Some(o);
            }
        }
        Ok(ValidatedConfig {
            config: self,
            normalizations,
        })
    }

    pub fn offsets(&self) -> &[f64] {
        self.sweep.as_ref().and_then(|s| s.offsets.as_deref()).unwrap_or(&[])
    }
}

/// Reads and validates a config file.
pub fn parse_config(path: impl AsRef<Path>) -> Result<ValidatedConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let raw = ScenarioConfig::from_toml_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.message().to_string(),
    })?;
    raw.validate()
}
