use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

fn one() -> f64 {
    1.0
}

/// Closed-form one-variable building blocks for `h(xi)` and `V(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    /// `offset + coefficient t^2`.
    Quadratic {
        #[serde(default = "one")]
        coefficient: f64,
        #[serde(default)]
        offset: f64,
    },
    /// `offset + amplitude tanh(t / scale)`.
    Tanh {
        #[serde(default = "one")]
        scale: f64,
        #[serde(default)]
        offset: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `offset + amplitude (2/pi) atan(t / scale)`.
    ArctanNormalized {
        #[serde(default = "one")]
        scale: f64,
        #[serde(default)]
        offset: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    Constant {
        value: f64,
    },
    /// `offset + amplitude cos(2 pi t / period)`; only meaningful as a periodic cell.
    Cosine {
        #[serde(default = "one")]
        amplitude: f64,
        period: f64,
        #[serde(default)]
        offset: f64,
    },
}

/// Behaviour of a profile at one end of the line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EndBehavior {
    Finite(f64),
    PlusInfinity,
    Oscillating,
}

impl Profile {
    pub fn tanh(scale: f64, offset: f64, amplitude: f64) -> Self {
        Profile::Tanh {
            scale,
            offset,
            amplitude,
        }
    }

    pub fn quadratic() -> Self {
        Profile::Quadratic {
            coefficient: 1.0,
            offset: 0.0,
        }
    }

    pub fn constant(value: f64) -> Self {
        Profile::Constant { value }
    }

    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Profile::Quadratic { coefficient, offset } => offset + coefficient * t * t,
            Profile::Tanh {
                scale,
                offset,
                amplitude,
            } => offset + amplitude * (t / scale).tanh(),
            Profile::ArctanNormalized {
                scale,
                offset,
                amplitude,
            } => offset + amplitude * (2.0 / PI) * (t / scale).atan(),
            Profile::Constant { value } => value,
            Profile::Cosine {
                amplitude,
                period,
                offset,
            } => offset + amplitude * (2.0 * PI * t / period).cos(),
        }
    }

    /// Limits at `-inf` and `+inf`.
    pub fn ends(&self) -> (EndBehavior, EndBehavior) {
        use EndBehavior::*;
        match *self {
            Profile::Quadratic { .. } => (PlusInfinity, PlusInfinity),
            Profile::Tanh { offset, amplitude, .. } | Profile::ArctanNormalized { offset, amplitude, .. } => {
                (Finite(offset - amplitude), Finite(offset + amplitude))
            }
            Profile::Constant { value } => (Finite(value), Finite(value)),
            Profile::Cosine { .. } => (Oscillating, Oscillating),
        }
    }

    /// `(inf, sup)` over the real line.
    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            Profile::Quadratic { offset, .. } => (offset, f64::INFINITY),
            Profile::Tanh { offset, amplitude, .. }
            | Profile::ArctanNormalized { offset, amplitude, .. }
            | Profile::Cosine { offset, amplitude, .. } => (offset - amplitude.abs(), offset + amplitude.abs()),
            Profile::Constant { value } => (value, value),
        }
    }

    /// Length over which the profile reaches its limits. For the algebraic
    /// arctan tail this is where it stays within 5% of the amplitude.
    pub fn scale(&self) -> f64 {
        match *self {
            Profile::Tanh { scale, .. } => scale.abs(),
            Profile::ArctanNormalized { scale, .. } => scale.abs() * (0.475 * PI).tan(),
            Profile::Cosine { period, .. } => period.abs(),
            _ => 1.0,
        }
    }

    pub fn shifted(&self, c: f64) -> Profile {
        let mut p = self.clone();
        match &mut p {
            Profile::Quadratic { offset, .. }
            | Profile::Tanh { offset, .. }
            | Profile::ArctanNormalized { offset, .. }
            | Profile::Cosine { offset, .. } => *offset += c,
            Profile::Constant { value } => *value += c,
        }
        p
    }

    /// Parameter problems, as `(field, message)` pairs relative to this profile.
    pub fn issues(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        let mut finite = |name: &str, v: f64| {
            if !v.is_finite() {
                out.push((name.to_string(), format!("must be finite, got {v}")));
            }
        };
        match *self {
            Profile::Quadratic { coefficient, offset } => {
                finite("coefficient", coefficient);
                finite("offset", offset);
                if !(coefficient > 0.0) {
                    out.push(("coefficient".into(), format!("must be positive, got {coefficient}")));
                }
            }
            Profile::Tanh {
                scale,
                offset,
                amplitude,
            }
            | Profile::ArctanNormalized {
                scale,
                offset,
                amplitude,
            } => {
                finite("scale", scale);
                finite("offset", offset);
                finite("amplitude", amplitude);
                if !(scale > 0.0) {
                    out.push(("scale".into(), format!("must be positive, got {scale}")));
                }
            }
            Profile::Constant { value } => finite("value", value),
            Profile::Cosine {
                amplitude,
                period,
                offset,
            } => {
                finite("amplitude", amplitude);
                finite("offset", offset);
                if !(period > 0.0 && period.is_finite()) {
                    out.push(("period".into(), format!("must be positive, got {period}")));
                }
            }
        }
        out
    }
}
