use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use super::PhaseGrid;
use crate::error::{Error, Result};

type EvalFn = Arc<dyn Fn(f64, f64) -> C64 + Send + Sync>;
type PartialFn = Arc<dyn Fn(usize, usize, f64, f64) -> C64 + Send + Sync>;

/// Highest derivative order served by finite differences.
const MAX_FD_ORDER: usize = 3;

/// Which variables a symbol actually depends on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dependence {
    Constant,
    Position,
    Momentum,
    Mixed,
}

impl Dependence {
    pub fn join(self, other: Dependence) -> Dependence {
        use Dependence::*;
        match (self, other) {
            (Constant, d) | (d, Constant) => d,
            (a, b) if a == b => a,
            _ => Mixed,
        }
    }

    fn varies_in_x(self) -> bool {
        matches!(self, Dependence::Position | Dependence::Mixed)
    }

    fn varies_in_xi(self) -> bool {
        matches!(self, Dependence::Momentum | Dependence::Mixed)
    }
}

/// Function `f(x, xi)` on continuous phase space.
#[derive(Clone)]
pub struct Symbol {
    eval: EvalFn,
    partials: Option<(usize, PartialFn)>,
    real: bool,
    dependence: Dependence,
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Symbol")
            .field("real", &self.real)
            .field("dependence", &self.dependence)
            .field("analytic_order", &self.analytic_order())
            .finish()
    }
}

impl Symbol {
    pub fn new(dependence: Dependence, real: bool, f: impl Fn(f64, f64) -> C64 + Send + Sync + 'static) -> Self {
        Symbol {
            eval: Arc::new(f),
            partials: None,
            real,
            dependence,
        }
    }

    pub fn real(dependence: Dependence, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Symbol::new(dependence, true, move |x, xi| C64::new(f(x, xi), 0.0))
    }

    pub fn constant(c: f64) -> Self {
        Symbol::constant_complex(C64::new(c, 0.0))
    }

    pub fn constant_complex(c: C64) -> Self {
        Symbol::new(Dependence::Constant, c.im == 0.0, move |_, _| c)
    }

    pub fn of_position(v: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Symbol::real(Dependence::Position, move |x, _| v(x))
    }

    pub fn of_momentum(h: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Symbol::real(Dependence::Momentum, move |_, xi| h(xi))
    }

    /// Attaches closed-form partials `d^a_x d^b_xi f` valid for `a + b <= order`.
    pub fn with_partials(
        mut self,
        order: usize,
        p: impl Fn(usize, usize, f64, f64) -> C64 + Send + Sync + 'static,
    ) -> Self {
        self.partials = Some((order, Arc::new(p)));
        self
    }

    pub fn eval(&self, x: f64, xi: f64) -> C64 {
        (self.eval)(x, xi)
    }

    pub fn eval_re(&self, x: f64, xi: f64) -> f64 {
        (self.eval)(x, xi).re
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn dependence(&self) -> Dependence {
        self.dependence
    }

    pub fn analytic_order(&self) -> Option<usize> {
        self.partials.as_ref().map(|(o, _)| *o)
    }

    /// Largest derivative order available, analytic or by finite differences.
    pub fn max_order(&self) -> usize {
        self.analytic_order().unwrap_or(0).max(MAX_FD_ORDER)
    }

    /// Checks the realness flag: imaginary parts at `points` must stay below 1e-14.
    pub fn verify_real(&self, points: &[(f64, f64)]) -> Result<()> {
        if !self.real {
            return Ok(());
        }
        for &(x, xi) in points {
            let im = self.eval(x, xi).im;
            if im.abs() > 1e-14 {
                return Err(Error::ContractViolation(format!(
                    "symbol flagged real has imaginary part {im:e} at ({x}, {xi})"
                )));
            }
        }
        Ok(())
    }

    /// `d^a_x d^b_xi f (x, xi)`, closed form when available, otherwise by
    /// centered finite differences (orders up to 3).
    pub fn partial(&self, a: usize, b: usize, x: f64, xi: f64) -> Result<C64> {
        if a == 0 && b == 0 {
            return Ok(self.eval(x, xi));
        }
        if (a > 0 && !self.dependence.varies_in_x()) || (b > 0 && !self.dependence.varies_in_xi()) {
            return Ok(C64::new(0.0, 0.0));
        }
        if let Some((order, p)) = &self.partials {
            if a + b <= *order {
                return Ok(p(a, b, x, xi));
            }
        }
        if a > MAX_FD_ORDER || b > MAX_FD_ORDER || a + b > MAX_FD_ORDER {
            return Err(Error::invalid(format!(
                "derivative order ({a}, {b}) exceeds available evaluators"
            )));
        }
        let f = &self.eval;
        let total = a + b;
        let inner = |x: f64| centered_difference(&|t| f(x, t), b, total, xi);
        Ok(centered_difference(&inner, a, total, x))
    }

    pub fn translate(&self, x0: f64, xi0: f64) -> Symbol {
        let f = self.eval.clone();
        let partials = self.partials.clone().map(|(o, p)| {
            let p: PartialFn = Arc::new(move |a, b, x, xi| p(a, b, x + x0, xi + xi0));
            (o, p)
        });
        Symbol {
            eval: Arc::new(move |x, xi| f(x + x0, xi + xi0)),
            partials,
            real: self.real,
            dependence: self.dependence,
        }
    }

    pub fn conj(&self) -> Symbol {
        let f = self.eval.clone();
        let partials = self.partials.clone().map(|(o, p)| {
            let p: PartialFn = Arc::new(move |a, b, x, xi| p(a, b, x, xi).conj());
            (o, p)
        });
        Symbol {
            eval: Arc::new(move |x, xi| f(x, xi).conj()),
            partials,
            real: self.real,
            dependence: self.dependence,
        }
    }

    fn combine(&self, other: &Symbol, real: bool, op: impl Fn(C64, C64) -> C64 + Send + Sync + 'static) -> Symbol {
        let (f, g) = (self.eval.clone(), other.eval.clone());
        Symbol {
            eval: Arc::new(move |x, xi| op(f(x, xi), g(x, xi))),
            partials: None,
            real,
            dependence: self.dependence.join(other.dependence),
        }
    }

    pub fn add(&self, other: &Symbol) -> Symbol {
        let mut s = self.combine(other, self.real && other.real, |a, b| a + b);
        if let (Some((o1, p1)), Some((o2, p2))) = (&self.partials, &other.partials) {
            let (p1, p2) = (p1.clone(), p2.clone());
            let (d1, d2) = (self.dependence, other.dependence);
            let p: PartialFn = Arc::new(move |a, b, x, xi| {
                let zero = C64::new(0.0, 0.0);
                let v1 = if vanishes(d1, a, b) { zero } else { p1(a, b, x, xi) };
                let v2 = if vanishes(d2, a, b) { zero } else { p2(a, b, x, xi) };
                v1 + v2
            });
            s.partials = Some(((*o1).min(*o2), p));
        }
        s
    }

    pub fn sub(&self, other: &Symbol) -> Symbol {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &Symbol) -> Symbol {
        self.combine(other, self.real && other.real, |a, b| a * b)
    }

    pub fn scale(&self, c: C64) -> Symbol {
        let f = self.eval.clone();
        let partials = self.partials.clone().map(|(o, p)| {
            let p: PartialFn = Arc::new(move |a, b, x, xi| c * p(a, b, x, xi));
            (o, p)
        });
        Symbol {
            eval: Arc::new(move |x, xi| c * f(x, xi)),
            partials,
            real: self.real && c.im == 0.0,
            dependence: if c == C64::new(0.0, 0.0) {
                Dependence::Constant
            } else {
                self.dependence
            },
        }
    }
}

fn vanishes(d: Dependence, a: usize, b: usize) -> bool {
    (a > 0 && !d.varies_in_x()) || (b > 0 && !d.varies_in_xi())
}

// Centered stencils of order 1..=3; the step eps^(1/(k+2)) (1 + |t|) uses the
// total order k of the (possibly nested) derivative.
fn centered_difference(f: &dyn Fn(f64) -> C64, order: usize, total: usize, t: f64) -> C64 {
    if order == 0 {
        return f(t);
    }
    let h = f64::EPSILON.powf(1.0 / (total as f64 + 2.0)) * (1.0 + t.abs());
    match order {
        1 => (f(t + h) - f(t - h)) / (2.0 * h),
        2 => (f(t + h) - f(t) * 2.0 + f(t - h)) / (h * h),
        _ => (f(t + 2.0 * h) - f(t + h) * 2.0 + f(t - h) * 2.0 - f(t - 2.0 * h)) / (2.0 * h * h * h),
    }
}

/// `(T_X f)(Y) = f(Y + X)`.
pub fn translate_symbol(f: &Symbol, x0: f64, xi0: f64) -> Symbol {
    f.translate(x0, xi0)
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// `sum_{|mu| <= j} ||d^mu f||_inf / mu!`, sup over the refined grid samples.
pub fn frechet_seminorm(f: &Symbol, grid: &PhaseGrid, j: usize) -> Result<f64> {
    if j > f.max_order() {
        return Err(Error::invalid(format!(
            "seminorm index {j} exceeds derivative order {}",
            f.max_order()
        )));
    }
    let xs = if f.dependence().varies_in_x() {
        grid.refined_positions()
    } else {
        vec![0.0]
    };
    let ps = if f.dependence().varies_in_xi() {
        grid.refined_momenta()
    } else {
        vec![0.0]
    };
    let mut total = 0.0;
    for order in 0..=j {
        for a in 0..=order {
            let b = order - a;
            if vanishes(f.dependence(), a, b) {
                continue;
            }
            let mut sup: f64 = 0.0;
            for &x in &xs {
                for &xi in &ps {
                    sup = sup.max(f.partial(a, b, x, xi)?.norm());
                }
            }
            total += sup / (factorial(a) * factorial(b));
        }
    }
    Ok(total)
}
