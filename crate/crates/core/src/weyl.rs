//! Discrete Weyl calculus on the odd periodic lattice: quantization,
//! dequantization, the Weyl system and the deformed product.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::numerics::quadrature::gauss_legendre;
use crate::numerics::{operator_norm, ComplexMatrix};
use crate::phase_space::{Dependence, PhaseGrid, Symbol};

/// Lattice samples of a symbol; row `j` is position `x_j`, column `m` is
/// momentum `xi_m` (storage index, label `m - c`).
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSymbol {
    grid: PhaseGrid,
    values: DMatrix<C64>,
}

impl SampledSymbol {
    pub fn new(grid: PhaseGrid, values: DMatrix<C64>) -> Result<Self> {
        let n = grid.n_points();
        if values.nrows() != n || values.ncols() != n {
            return Err(Error::invalid(format!(
                "sample array is {}x{}, grid needs {n}x{n}",
                values.nrows(),
                values.ncols()
            )));
        }
        Ok(SampledSymbol { grid, values })
    }

    /// `f(x_j, xi_m)` on the lattice.
    pub fn from_symbol(grid: &PhaseGrid, f: &Symbol) -> Self {
        let (xs, ps) = (grid.positions(), grid.momenta());
        let n = grid.n_points();
        SampledSymbol {
            grid: *grid,
            values: DMatrix::from_fn(n, n, |j, m| f.eval(xs[j], ps[m])),
        }
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn values(&self) -> &DMatrix<C64> {
        &self.values
    }

    pub fn get(&self, j: usize, m: usize) -> C64 {
        self.values[(j, m)]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, z| a.max(z.norm()))
    }

    pub fn max_distance(&self, other: &SampledSymbol) -> f64 {
        self.values
            .iter()
            .zip(other.values.iter())
            .fold(0.0, |a, (u, v)| a.max((u - v).norm()))
    }

    pub fn add(&self, other: &SampledSymbol) -> SampledSymbol {
        SampledSymbol {
            grid: self.grid,
            values: &self.values + &other.values,
        }
    }

    pub fn scale(&self, c: C64) -> SampledSymbol {
        SampledSymbol {
            grid: self.grid,
            values: &self.values * c,
        }
    }

    /// `max |s(x_j, xi_m)|` over lattice points accepted by `keep`.
    pub fn sup_where(&self, keep: impl Fn(f64, f64) -> bool) -> f64 {
        let (xs, ps) = (self.grid.positions(), self.grid.momenta());
        let mut sup: f64 = 0.0;
        for (j, &x) in xs.iter().enumerate() {
            for (m, &p) in ps.iter().enumerate() {
                if keep(x, p) {
                    sup = sup.max(self.values[(j, m)].norm());
                }
            }
        }
        sup
    }

    // Periodic centered differences on the lattice.
    fn lattice_partial(&self, a: usize, b: usize) -> DMatrix<C64> {
        let n = self.grid.n_points();
        let mut v = self.values.clone();
        let step = |v: &DMatrix<C64>, along_x: bool, h: f64, order: usize| -> DMatrix<C64> {
            DMatrix::from_fn(n, n, |j, m| {
                let at = |d: i64| {
                    if along_x {
                        v[(((j as i64 + d).rem_euclid(n as i64)) as usize, m)]
                    } else {
                        v[(j, ((m as i64 + d).rem_euclid(n as i64)) as usize)]
                    }
                };
                match order {
                    1 => (at(1) - at(-1)) / (2.0 * h),
                    _ => (at(1) - at(0) * 2.0 + at(-1)) / (h * h),
                }
            })
        };
        let (dx, dp) = (self.grid.dx(), self.grid.momentum_spacing());
        let mut a = a;
        while a > 0 {
            let o = a.min(2);
            v = step(&v, true, dx, o);
            a -= o;
        }
        let mut b = b;
        while b > 0 {
            let o = b.min(2);
            v = step(&v, false, dp, o);
            b -= o;
        }
        v
    }

    /// Lattice Fréchet seminorm `sum_{|mu| <= j} sup|d^mu s| / mu!` using
    /// periodic centered differences; restricted to points accepted by `keep`.
    pub fn seminorm_where(&self, j: usize, keep: impl Fn(f64, f64) -> bool) -> Result<f64> {
        if j > 2 {
            return Err(Error::invalid(format!("lattice seminorm index {j} exceeds 2")));
        }
        let (xs, ps) = (self.grid.positions(), self.grid.momenta());
        let mut total = 0.0;
        for order in 0..=j {
            for a in 0..=order {
                let b = order - a;
                let d = self.lattice_partial(a, b);
                let mut sup: f64 = 0.0;
                for (jx, &x) in xs.iter().enumerate() {
                    for (m, &p) in ps.iter().enumerate() {
                        if keep(x, p) {
                            sup = sup.max(d[(jx, m)].norm());
                        }
                    }
                }
                let fact = |k: usize| (1..=k).product::<usize>() as f64;
                total += sup / (fact(a) * fact(b));
            }
        }
        Ok(total)
    }

    pub fn seminorm(&self, j: usize) -> Result<f64> {
        self.seminorm_where(j, |_, _| true)
    }
}

struct Transforms {
    forward: std::sync::Arc<dyn Fft<f64>>,
    inverse: std::sync::Arc<dyn Fft<f64>>,
}

impl Transforms {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Transforms {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }
}

fn unit_root(n: usize, k: i64) -> C64 {
    let r = k.rem_euclid(n as i64) as f64;
    C64::from_polar(1.0, 2.0 * PI * r / n as f64)
}

/// `K(d) = (1/N) sum_m s_m omega^{d (m - c)}` for all `d` mod `N`.
fn kernel_from_row(t: &Transforms, n: usize, c: usize, row: &mut [C64]) {
    t.inverse.process(row);
    let inv_n = 1.0 / n as f64;
    for (d, z) in row.iter_mut().enumerate() {
        *z *= unit_root(n, -((d * c) as i64)) * inv_n;
    }
}

/// `s(m) = sum_d e_d omega^{-d (m - c)}` for all storage indices `m`.
fn symbol_from_kernel(t: &Transforms, n: usize, c: usize, kernel: &mut [C64]) {
    for (d, z) in kernel.iter_mut().enumerate() {
        *z *= unit_root(n, (d * c) as i64);
    }
    t.forward.process(kernel);
}

/// Weyl quantization with midpoints on the short arc of the periodic box.
pub fn quantize(grid: &PhaseGrid, f: &Symbol) -> ComplexMatrix {
    let n = grid.n_points();
    let c = grid.center();
    let hermitian = f.is_real();
    match f.dependence() {
        Dependence::Constant => {
            let v = f.eval(0.0, 0.0);
            return ComplexMatrix::from_parts(DMatrix::identity(n, n) * v, hermitian && v.im == 0.0);
        }
        Dependence::Position => {
            let diag: Vec<C64> = grid.positions().iter().map(|&x| f.eval(x, 0.0)).collect();
            let m = ComplexMatrix::from_diagonal(&diag);
            return if hermitian { m.symmetrized() } else { m };
        }
        _ => {}
    }
    let t = Transforms::new(n);
    let ps = grid.momenta();
    let build = |x: f64| -> Vec<C64> {
        let mut row: Vec<C64> = ps.iter().map(|&p| f.eval(x, p)).collect();
        kernel_from_row(&t, n, c, &mut row);
        row
    };
    let a = match f.dependence() {
        Dependence::Momentum => {
            let k = build(0.0);
            DMatrix::from_fn(n, n, |j, l| k[(j + n - l) % n])
        }
        _ => {
            let dx = grid.dx();
            let half_box = 0.5 * grid.box_length();
            let kernels: Vec<Vec<C64>> = (0..2 * n)
                .map(|tw| {
                    let mut x = (tw as f64 * 0.5 - c as f64) * dx;
                    if x >= half_box - 0.25 * dx {
                        x -= grid.box_length();
                    }
                    build(x)
                })
                .collect();
            DMatrix::from_fn(n, n, |j, l| {
                let d = j as i64 - l as i64;
                let tw = if d.unsigned_abs() as usize <= c {
                    j + l
                } else {
                    (j + l + n) % (2 * n)
                };
                kernels[tw][d.rem_euclid(n as i64) as usize]
            })
        }
    };
    let m = ComplexMatrix::from_parts(a, false);
    if hermitian {
        m.symmetrized()
    } else {
        m
    }
}

fn check_dim(grid: &PhaseGrid, a: &ComplexMatrix) -> Result<()> {
    if a.dim() != grid.n_points() {
        return Err(Error::invalid(format!(
            "operator dimension {} does not match grid size {}",
            a.dim(),
            grid.n_points()
        )));
    }
    Ok(())
}

/// Exact inverse of [`quantize_sampled`]: readout along the mod-`N` midpoint classes.
pub fn dequantize(grid: &PhaseGrid, a: &ComplexMatrix) -> Result<SampledSymbol> {
    check_dim(grid, a)?;
    let n = grid.n_points();
    let c = grid.center();
    let inv2 = n.div_ceil(2);
    let t = Transforms::new(n);
    let mut values = DMatrix::zeros(n, n);
    let mut row = vec![C64::new(0.0, 0.0); n];
    for p in 0..n {
        for (d, z) in row.iter_mut().enumerate() {
            let s = (d * inv2) % n;
            *z = a.get((p + s) % n, (p + n - s) % n);
        }
        symbol_from_kernel(&t, n, c, &mut row);
        for m in 0..n {
            values[(p, m)] = row[m];
        }
    }
    SampledSymbol::new(*grid, values)
}

/// Quantization of lattice samples with mod-`N` half-sums.
pub fn quantize_sampled(s: &SampledSymbol) -> ComplexMatrix {
    let grid = s.grid();
    let n = grid.n_points();
    let c = grid.center();
    let inv2 = n.div_ceil(2);
    let t = Transforms::new(n);
    let mut a = DMatrix::zeros(n, n);
    let mut row = vec![C64::new(0.0, 0.0); n];
    for p in 0..n {
        for m in 0..n {
            row[m] = s.get(p, m);
        }
        kernel_from_row(&t, n, c, &mut row);
        for (d, z) in row.iter().enumerate() {
            let sh = (d * inv2) % n;
            a[((p + sh) % n, (p + n - sh) % n)] = *z;
        }
    }
    ComplexMatrix::from_parts(a, false)
}

/// Readout of a symbol at true midpoints: even separations are read
/// directly, odd separations by cubic interpolation over neighbouring
/// half-lattice midpoints. Exact for symbols that are constant, or sums of
/// a position part and a momentum part.
pub fn resolved_symbol(grid: &PhaseGrid, a: &ComplexMatrix) -> Result<SampledSymbol> {
    check_dim(grid, a)?;
    let n = grid.n_points();
    let ni = n as i64;
    let c = grid.center();
    let t = Transforms::new(n);
    let entry = |tw: i64, s: i64| -> C64 {
        // twice-midpoint tw and separation s share parity
        let j = ((tw + s) / 2).rem_euclid(ni) as usize;
        let k = ((tw - s) / 2).rem_euclid(ni) as usize;
        a.get(j, k)
    };
    let mut values = DMatrix::zeros(n, n);
    let mut row = vec![C64::new(0.0, 0.0); n];
    for p in 0..n {
        let tw = 2 * p as i64;
        for s in -(c as i64)..=(c as i64) {
            let k = if s % 2 == 0 {
                entry(tw, s)
            } else {
                (-entry(tw - 3, s) + entry(tw - 1, s) * 9.0 + entry(tw + 1, s) * 9.0 - entry(tw + 3, s)) / 16.0
            };
            row[s.rem_euclid(ni) as usize] = k;
        }
        symbol_from_kernel(&t, n, c, &mut row);
        for m in 0..n {
            values[(p, m)] = row[m];
        }
    }
    SampledSymbol::new(*grid, values)
}

/// `[[X, Y]] = x eta - y xi` for `X = (x, xi)`, `Y = (y, eta)`.
pub fn symplectic_form(x: (f64, f64), y: (f64, f64)) -> f64 {
    x.0 * y.1 - y.0 * x.1
}

/// Multiplier of the Weyl system: `pi(X) pi(Y) = weyl_multiplier(X, Y) pi(X + Y)`.
pub fn weyl_multiplier(x: (f64, f64), y: (f64, f64)) -> C64 {
    C64::from_polar(1.0, -0.5 * symplectic_form(x, y))
}

/// `[pi(X) u]_j = e^{i (y_j - x/2) xi} u_{j - a}` with `x = a dx`, `xi = b 2 pi / L`.
pub fn weyl_system(grid: &PhaseGrid, x: f64, xi: f64) -> Result<ComplexMatrix> {
    let (a, b) = grid.lattice_indices(x, xi)?;
    let (x, xi) = grid.lattice_point(a, b);
    let n = grid.n_points();
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        let col = (j as i64 - a).rem_euclid(n as i64) as usize;
        m[(j, col)] = C64::from_polar(1.0, (grid.position(j) - 0.5 * x) * xi);
    }
    Ok(ComplexMatrix::from_parts(m, false))
}

/// `||pi(X) Op(f) pi(-X) - Op(f(. - X))||`.
pub fn covariance_defect(grid: &PhaseGrid, f: &Symbol, x: f64, xi: f64) -> Result<f64> {
    let p = weyl_system(grid, x, xi)?;
    let pinv = weyl_system(grid, -x, -xi)?;
    let lhs = p.mul(&quantize(grid, f)).mul(&pinv);
    let rhs = quantize(grid, &f.translate(-x, -xi));
    operator_norm(&lhs.sub(&rhs))
}

/// Deformed product on the lattice: `dequantize(Op(f) Op(g))`.
pub fn moyal_product(grid: &PhaseGrid, f: &Symbol, g: &Symbol) -> SampledSymbol {
    let a = quantize(grid, f).mul(&quantize(grid, g));
    dequantize(grid, &a).expect("dimensions agree")
}

/// Deformed product of lattice symbols.
pub fn moyal_product_sampled(f: &SampledSymbol, g: &SampledSymbol) -> SampledSymbol {
    let a = quantize_sampled(f).mul(&quantize_sampled(g));
    dequantize(f.grid(), &a).expect("dimensions agree")
}

/// Deformed product read out at true midpoints, for comparison with the
/// continuum product.
pub fn moyal_product_resolved(grid: &PhaseGrid, f: &Symbol, g: &Symbol) -> SampledSymbol {
    let a = quantize(grid, f).mul(&quantize(grid, g));
    resolved_symbol(grid, &a).expect("dimensions agree")
}

/// Direct quadrature of
/// `pi^{-2} int int e^{2i[[Y, Z]]} f(X0 + Y) g(X0 + Z) dY dZ`
/// over `|Y|, |Z| <= R` with a `quad_points`-point Gauss–Legendre rule per
/// axis. Errors when the integrands are not negligible on the cutoff box.
pub fn moyal_quadrature_probe(
    f: &Symbol,
    g: &Symbol,
    x0: (f64, f64),
    cutoff: f64,
    quad_points: usize,
    tol: f64,
) -> Result<C64> {
    if !(cutoff > 0.0) || quad_points < 2 {
        return Err(Error::invalid(
            "quadrature needs a positive cutoff and at least two points",
        ));
    }
    let (nodes, weights) = gauss_legendre(quad_points);
    let t: Vec<f64> = nodes.iter().map(|u| u * cutoff).collect();
    let w: Vec<f64> = weights.iter().map(|v| v * cutoff).collect();
    let q = quad_points;

    let fv = DMatrix::from_fn(q, q, |i, k| f.eval(x0.0 + t[i], x0.1 + t[k]));
    let gv = DMatrix::from_fn(q, q, |i, k| g.eval(x0.0 + t[i], x0.1 + t[k]));

    let edge_sup = |s: &Symbol| {
        let mut m: f64 = 0.0;
        for &u in &t {
            for (a, b) in [(cutoff, u), (-cutoff, u), (u, cutoff), (u, -cutoff)] {
                m = m.max(s.eval(x0.0 + a, x0.1 + b).norm());
            }
        }
        m
    };
    let sup = |v: &DMatrix<C64>| v.iter().fold(0.0f64, |a, z| a.max(z.norm()));
    let tail = edge_sup(f) * sup(&gv) + edge_sup(g) * sup(&fv);
    if tail > tol {
        return Err(Error::Accuracy {
            message: format!("integrands not negligible at cutoff {cutoff}"),
            estimate: tail,
            tolerance: tol,
        });
    }

    let fw = DMatrix::from_fn(q, q, |i, k| fv[(i, k)] * (w[i] * w[k]));
    let gw = DMatrix::from_fn(q, q, |i, k| gv[(i, k)] * (w[i] * w[k]));
    let e = DMatrix::from_fn(q, q, |i, k| C64::from_polar(1.0, 2.0 * t[i] * t[k]));
    let ebar = e.map(|z| z.conj());
    let inner = &e * gw.transpose() * &ebar;
    let total = fw.component_mul(&inner).sum();
    Ok(total / (PI * PI))
}
