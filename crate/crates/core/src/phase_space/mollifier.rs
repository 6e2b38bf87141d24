use std::sync::OnceLock;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{Dependence, PhaseGrid, Symbol};
use crate::error::{Error, Result};
use crate::numerics::quadrature::integrate_adaptive;

/// Highest derivative order of the bump with closed-form evaluators.
pub const MAX_MOLLIFIER_ORDER: usize = 3;

const QUAD_TOL: f64 = 1e-12;

fn unit_bump(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - u * u)).exp()
    }
}

fn bump_constant() -> f64 {
    static C: OnceLock<f64> = OnceLock::new();
    *C.get_or_init(|| {
        let mass = integrate_adaptive(unit_bump, -1.0, 1.0, 1e-15)
            .expect("bump integral converges")
            .value;
        1.0 / mass
    })
}

/// `k`-th derivative of the normalized unit bump `C exp(-1/(1-u^2))`, `k <= 4`.
pub fn bump_derivative(u: f64, k: usize) -> f64 {
    if u.abs() >= 1.0 {
        return 0.0;
    }
    let q = 1.0 - u * u;
    let e = (-1.0 / q).exp();
    if e == 0.0 {
        return 0.0;
    }
    let g1 = -2.0 * u / (q * q);
    let g2 = -2.0 / (q * q) - 8.0 * u * u / (q * q * q);
    let g3 = -24.0 * u / q.powi(3) - 48.0 * u.powi(3) / q.powi(4);
    let g4 = -24.0 / q.powi(3) - 288.0 * u * u / q.powi(4) - 384.0 * u.powi(4) / q.powi(5);
    let poly = match k {
        0 => 1.0,
        1 => g1,
        2 => g2 + g1 * g1,
        3 => g3 + 3.0 * g1 * g2 + g1.powi(3),
        4 => g4 + 4.0 * g1 * g3 + 3.0 * g2 * g2 + 6.0 * g1 * g1 * g2 + g1.powi(4),
        _ => panic!("bump derivative order {k} unsupported"),
    };
    bump_constant() * e * poly
}

// Cumulative integral of the normalized unit bump from -1 to u.
fn bump_cdf(u: f64) -> f64 {
    if u <= -1.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    if u > 0.0 {
        return 1.0 - bump_cdf(-u);
    }
    let c = bump_constant();
    let v = integrate_adaptive(unit_bump, -1.0, u, QUAD_TOL / c)
        .expect("bump integral converges")
        .value;
    c * v
}

/// Product bump `phi1(x) phi1(xi)` with independent widths per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mollifier {
    width_x: f64,
    width_xi: f64,
}

impl Mollifier {
    pub fn new(width_x: f64, width_xi: f64) -> Result<Self> {
        for (name, w) in [("position", width_x), ("momentum", width_xi)] {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::invalid(format!(
                    "{name} mollifier width must be positive, got {w}"
                )));
            }
        }
        Ok(Mollifier { width_x, width_xi })
    }

    /// Widths of `cells` lattice spacings on each axis.
    pub fn for_grid(grid: &PhaseGrid, cells: f64) -> Result<Self> {
        Mollifier::new(cells * grid.dx(), cells * grid.momentum_spacing())
    }

    pub fn width_x(&self) -> f64 {
        self.width_x
    }

    pub fn width_xi(&self) -> f64 {
        self.width_xi
    }

    /// One-dimensional factor `phi1_w^(k)(t)`.
    pub fn profile(t: f64, w: f64, k: usize) -> f64 {
        bump_derivative(t / w, k) / w.powi(k as i32 + 1)
    }

    pub fn eval(&self, x: f64, xi: f64) -> f64 {
        Self::profile(x, self.width_x, 0) * Self::profile(xi, self.width_xi, 0)
    }

    /// Quadrature of `phi` over phase space, as a product of axis integrals.
    pub fn total_mass(&self) -> f64 {
        let axis = |w: f64| {
            integrate_adaptive(|t| Self::profile(t, w, 0), -w, w, 1e-14)
                .expect("bump integral converges")
                .value
        };
        axis(self.width_x) * axis(self.width_xi)
    }
}

/// Open interval; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn full() -> Self {
        Interval::new(f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn is_full(&self) -> bool {
        self.lo == f64::NEG_INFINITY && self.hi == f64::INFINITY
    }

    fn validate(&self, what: &str) -> Result<()> {
        if self.lo.is_nan()
            || self.hi.is_nan()
            || self.lo >= self.hi
            || self.lo == f64::INFINITY
            || self.hi == f64::NEG_INFINITY
        {
            return Err(Error::invalid(format!(
                "{what} interval ({}, {}) is not well ordered",
                self.lo, self.hi
            )));
        }
        Ok(())
    }

    /// Distance from `t` to the interval (0 inside).
    pub fn gap(&self, t: f64) -> f64 {
        if t < self.lo {
            self.lo - t
        } else if t > self.hi {
            t - self.hi
        } else {
            0.0
        }
    }
}

/// Localization regions in phase space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    /// `(a, inf) x R`.
    PositionAbove {
        a: f64,
    },
    /// `(-inf, -a) x R`.
    PositionBelow {
        a: f64,
    },
    /// `R x (b, inf)`.
    MomentumAbove {
        b: f64,
    },
    /// `R x (-inf, -b)`.
    MomentumBelow {
        b: f64,
    },
    Rectangle {
        x: Interval,
        xi: Interval,
    },
    Full,
    Empty,
}

impl Region {
    /// Axis intervals, `None` for the empty region.
    pub fn axes(&self) -> Option<(Interval, Interval)> {
        let inf = f64::INFINITY;
        let full = Interval::full();
        match *self {
            Region::PositionAbove { a } => Some((Interval::new(a, inf), full)),
            Region::PositionBelow { a } => Some((Interval::new(-inf, -a), full)),
            Region::MomentumAbove { b } => Some((full, Interval::new(b, inf))),
            Region::MomentumBelow { b } => Some((full, Interval::new(-inf, -b))),
            Region::Rectangle { x, xi } => Some((x, xi)),
            Region::Full => Some((full, full)),
            Region::Empty => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Region::PositionAbove { a } | Region::PositionBelow { a } if !a.is_finite() => {
                Err(Error::invalid(format!("half-line offset must be finite, got {a}")))
            }
            Region::MomentumAbove { b } | Region::MomentumBelow { b } if !b.is_finite() => {
                Err(Error::invalid(format!("half-line offset must be finite, got {b}")))
            }
            Region::Rectangle { x, xi } => {
                x.validate("position")?;
                xi.validate("momentum")
            }
            _ => Ok(()),
        }
    }

    /// Complement, for the region kinds closed under complement.
    pub fn complement(&self) -> Option<Region> {
        match *self {
            Region::PositionAbove { a } => Some(Region::PositionBelow { a: -a }),
            Region::PositionBelow { a } => Some(Region::PositionAbove { a: -a }),
            Region::MomentumAbove { b } => Some(Region::MomentumBelow { b: -b }),
            Region::MomentumBelow { b } => Some(Region::MomentumAbove { b: -b }),
            Region::Full => Some(Region::Empty),
            Region::Empty => Some(Region::Full),
            Region::Rectangle { .. } => None,
        }
    }

    pub fn contains(&self, x: f64, xi: f64) -> bool {
        match self.axes() {
            Some((ix, ip)) => ix.gap(x) == 0.0 && ip.gap(xi) == 0.0,
            None => false,
        }
    }
}

/// Convolution of the interval indicator with `phi1_w`, or with its
/// `order`-th derivative, evaluated by adaptive quadrature over the overlap.
fn axis_factor_quadrature(t: f64, iv: Interval, w: f64, order: usize) -> f64 {
    // chi^{phi1^(k)}(t) = int_{t-hi}^{t-lo} phi1^(k)(s) ds, restricted to [-w, w]
    let lo = (t - iv.hi).max(-w);
    let hi = (t - iv.lo).min(w);
    if lo >= hi {
        return 0.0;
    }
    if order == 0 {
        return bump_cdf(hi / w) - bump_cdf(lo / w);
    }
    let scale = w.powi(order as i32 + 1);
    let tol = QUAD_TOL * scale / w;
    integrate_adaptive(|s| bump_derivative(s / w, order), lo, hi, tol)
        .expect("bump derivative integral converges")
        .value
        / scale
}

/// Closed form of the same axis factor: the `order`-th derivative of the
/// smoothed step pair.
fn axis_factor_closed(t: f64, iv: Interval, w: f64, order: usize) -> f64 {
    if order == 0 {
        return axis_factor_quadrature(t, iv, w, 0);
    }
    let edge = |c: f64| {
        if c.is_infinite() {
            0.0
        } else {
            bump_derivative((t - c) / w, order - 1) / w.powi(order as i32)
        }
    };
    edge(iv.lo) - edge(iv.hi)
}

/// Smoothed indicator of `iv` with a bump of half-width `w`, as a function of one variable.
pub fn smoothed_indicator(t: f64, iv: Interval, w: f64) -> f64 {
    if iv.is_full() {
        1.0
    } else {
        axis_factor_quadrature(t, iv, w, 0)
    }
}

fn region_dependence(ix: Interval, ip: Interval) -> Dependence {
    match (ix.is_full(), ip.is_full()) {
        (true, true) => Dependence::Constant,
        (false, true) => Dependence::Position,
        (true, false) => Dependence::Momentum,
        (false, false) => Dependence::Mixed,
    }
}

/// `chi_W^phi = phi * chi_W`, with closed-form partials up to order 3.
pub fn mollify_indicator(region: &Region, phi: &Mollifier) -> Result<Symbol> {
    region.validate()?;
    let Some((ix, ip)) = region.axes() else {
        return Ok(Symbol::constant(0.0));
    };
    let (wx, wp) = (phi.width_x(), phi.width_xi());
    let dep = region_dependence(ix, ip);
    let factor = move |t: f64, iv: Interval, w: f64, k: usize| -> f64 {
        if iv.is_full() {
            if k == 0 {
                1.0
            } else {
                0.0
            }
        } else {
            axis_factor_closed(t, iv, w, k)
        }
    };
    let s = Symbol::real(dep, move |x, xi| factor(x, ix, wx, 0) * factor(xi, ip, wp, 0))
        .with_partials(MAX_MOLLIFIER_ORDER, move |a, b, x, xi| {
            C64::new(factor(x, ix, wx, a) * factor(xi, ip, wp, b), 0.0)
        });
    Ok(s)
}

/// `chi_W^{d^alpha phi}` by quadrature against the differentiated bump.
pub fn mollified_derivative(region: &Region, phi: &Mollifier, alpha: (usize, usize)) -> Result<Symbol> {
    let (a, b) = alpha;
    if a + b > MAX_MOLLIFIER_ORDER {
        return Err(Error::invalid(format!(
            "mollifier derivative order {} exceeds {MAX_MOLLIFIER_ORDER}",
            a + b
        )));
    }
    region.validate()?;
    let Some((ix, ip)) = region.axes() else {
        return Ok(Symbol::constant(0.0));
    };
    let (wx, wp) = (phi.width_x(), phi.width_xi());
    let dep = region_dependence(ix, ip);
    let factor = move |t: f64, iv: Interval, w: f64, k: usize| -> f64 {
        if iv.is_full() {
            // int phi1^(k) over R is 1 for k = 0 and 0 otherwise
            if k == 0 {
                1.0
            } else {
                0.0
            }
        } else {
            axis_factor_quadrature(t, iv, w, k)
        }
    };
    Ok(Symbol::real(dep, move |x, xi| {
        factor(x, ix, wx, a) * factor(xi, ip, wp, b)
    }))
}
