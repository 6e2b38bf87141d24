//! Dense complex linear algebra: Hermitian eigendecomposition, operator norms,
//! spectral functional calculus and unitary propagators.

mod eigen;
mod norm;
pub mod quadrature;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use eigen::{eigh, eigh_with, eigvalsh, eigvalsh_with, symmetric_tridiagonal_eigen};
pub use norm::{operator_norm, operator_norm_with, NormMethod};

pub type C64 = Complex64;

/// `C^inf` step from 0 on `(-inf, 0]` to 1 on `[1, inf)`, built from `exp(-1/u)`.
pub fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / u).exp();
    let b = (-1.0 / (1.0 - u)).exp();
    a / (a + b)
}

/// Tolerances and algorithm choices for the linear algebra kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NumericsConfig {
    /// Relative bound on `|A_jk - conj(A_kj)|` accepted as Hermitian.
    pub hermitian_tol: f64,
    /// QL iteration cap, as a multiple of the dimension.
    pub eig_sweep_factor: usize,
    pub norm_method: NormMethod,
    /// `Auto` uses a full eigensolve of `A^H A` below this dimension.
    pub dense_norm_below: usize,
    /// Stopping tolerance of the iterative norm estimators.
    pub norm_rel_tol: f64,
    pub norm_max_iter: usize,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        NumericsConfig {
            hermitian_tol: 1e-12,
            eig_sweep_factor: 30,
            norm_method: NormMethod::Auto,
            dense_norm_below: 200,
            norm_rel_tol: 1e-10,
            norm_max_iter: 5000,
        }
    }
}

/// Square complex matrix with a checked Hermitian flag.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    data: DMatrix<C64>,
    hermitian: bool,
}

impl ComplexMatrix {
    /// Wraps a square matrix without asserting any symmetry.
    pub fn new(data: DMatrix<C64>) -> Result<Self> {
        if data.nrows() != data.ncols() || data.nrows() == 0 {
            return Err(Error::invalid(format!(
                "matrix must be square and nonempty, got {}x{}",
                data.nrows(),
                data.ncols()
            )));
        }
        Ok(ComplexMatrix { data, hermitian: false })
    }

    /// Wraps a matrix that must be Hermitian up to `tol * max|A|`; the stored
    /// copy is symmetrized exactly.
    pub fn hermitian_with_tol(data: DMatrix<C64>, tol: f64) -> Result<Self> {
        let m = ComplexMatrix::new(data)?;
        let defect = m.hermitian_defect();
        let scale = m.max_abs();
        if defect > tol * scale {
            return Err(Error::ContractViolation(format!(
                "matrix is not Hermitian: defect {defect:.3e} exceeds {:.3e}",
                tol * scale
            )));
        }
        Ok(m.symmetrized())
    }

    pub fn hermitian(data: DMatrix<C64>) -> Result<Self> {
        Self::hermitian_with_tol(data, NumericsConfig::default().hermitian_tol)
    }

    /// Hermitian part `(A + A^H)/2`, flagged Hermitian.
    pub fn symmetrized(&self) -> Self {
        let n = self.dim();
        let mut out = self.data.clone();
        for j in 0..n {
            out[(j, j)] = C64::new(self.data[(j, j)].re, 0.0);
            for k in (j + 1)..n {
                let v = (self.data[(j, k)] + self.data[(k, j)].conj()) * 0.5;
                out[(j, k)] = v;
                out[(k, j)] = v.conj();
            }
        }
        ComplexMatrix {
            data: out,
            hermitian: true,
        }
    }

    pub fn identity(n: usize) -> Self {
        ComplexMatrix {
            data: DMatrix::identity(n, n),
            hermitian: true,
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let v = DVector::from_iterator(diag.len(), diag.iter().map(|&d| C64::new(d, 0.0)));
        ComplexMatrix {
            data: DMatrix::from_diagonal(&v),
            hermitian: true,
        }
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let real = diag.iter().all(|z| z.im == 0.0);
        ComplexMatrix {
            data: DMatrix::from_diagonal(&DVector::from_column_slice(diag)),
            hermitian: real,
        }
    }

    pub(crate) fn from_parts(data: DMatrix<C64>, hermitian: bool) -> Self {
        ComplexMatrix { data, hermitian }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn data(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub fn into_data(self) -> DMatrix<C64> {
        self.data
    }

    pub fn get(&self, j: usize, k: usize) -> C64 {
        self.data[(j, k)]
    }

    pub fn adjoint(&self) -> Self {
        ComplexMatrix {
            data: self.data.adjoint(),
            hermitian: self.hermitian,
        }
    }

    pub fn mul(&self, other: &ComplexMatrix) -> Self {
        ComplexMatrix {
            data: &self.data * &other.data,
            hermitian: false,
        }
    }

    pub fn add(&self, other: &ComplexMatrix) -> Self {
        ComplexMatrix {
            data: &self.data + &other.data,
            hermitian: self.hermitian && other.hermitian,
        }
    }

    pub fn sub(&self, other: &ComplexMatrix) -> Self {
        ComplexMatrix {
            data: &self.data - &other.data,
            hermitian: self.hermitian && other.hermitian,
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        ComplexMatrix {
            data: &self.data * c,
            hermitian: self.hermitian && c.im == 0.0,
        }
    }

    pub fn apply(&self, u: &StateVector) -> StateVector {
        StateVector::new(&self.data * u.amplitudes())
    }

    pub fn trace(&self) -> C64 {
        self.data.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.norm()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// `max_{j,k} |A_jk - conj(A_kj)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.dim();
        let mut d: f64 = 0.0;
        for j in 0..n {
            for k in j..n {
                d = d.max((self.data[(j, k)] - self.data[(k, j)].conj()).norm());
            }
        }
        d
    }

    pub fn max_entry_distance(&self, other: &ComplexMatrix) -> f64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }
}

/// Complex state vector; its norm is always computed from the amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: DVector<C64>,
}

impl StateVector {
    pub fn new(amplitudes: DVector<C64>) -> Self {
        StateVector { amplitudes }
    }

    pub fn from_slice(values: &[C64]) -> Self {
        StateVector::new(DVector::from_column_slice(values))
    }

    /// Entries with real and imaginary parts uniform in `[-1, 1)`.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let amplitudes = DVector::from_fn(dim, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        StateVector { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::invalid("cannot normalize a zero or non-finite state"));
        }
        Ok(StateVector::new(self.amplitudes.unscale(n)))
    }
}

/// Eigenvalues in ascending order with orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<C64>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, k: usize) -> StateVector {
        StateVector::new(self.eigenvectors.column(k).into_owned())
    }

    /// `||H V - V diag(lambda)||_F`.
    pub fn residual(&self, h: &ComplexMatrix) -> f64 {
        let hv = h.data() * &self.eigenvectors;
        let mut vl = self.eigenvectors.clone();
        for (k, &l) in self.eigenvalues.iter().enumerate() {
            vl.column_mut(k).scale_mut(l);
        }
        (hv - vl).norm()
    }

    /// `||V^H V - I||_F`.
    pub fn orthonormality_defect(&self) -> f64 {
        let n = self.dim();
        (self.eigenvectors.adjoint() * &self.eigenvectors - DMatrix::<C64>::identity(n, n)).norm()
    }

    /// `sum_k w_k v_k v_k^H` for complex weights `w`.
    fn weighted_outer(&self, weights: &[C64]) -> DMatrix<C64> {
        let mut scaled = self.eigenvectors.clone();
        for (k, &w) in weights.iter().enumerate() {
            for z in scaled.column_mut(k).iter_mut() {
                *z *= w;
            }
        }
        scaled * self.eigenvectors.adjoint()
    }

    /// Spectral functional calculus `rho(H)`; Hermitian because `rho` is real.
    pub fn apply_function(&self, rho: impl Fn(f64) -> f64) -> ComplexMatrix {
        let w: Vec<C64> = self.eigenvalues.iter().map(|&l| C64::new(rho(l), 0.0)).collect();
        ComplexMatrix::from_parts(self.weighted_outer(&w), false).symmetrized()
    }

    /// Unitary group `e^{itH}`.
    pub fn propagator(&self, t: f64) -> ComplexMatrix {
        let w: Vec<C64> = self.eigenvalues.iter().map(|&l| C64::from_polar(1.0, t * l)).collect();
        ComplexMatrix::from_parts(self.weighted_outer(&w), false)
    }

    /// Coefficients of `u` in the eigenbasis.
    pub fn coefficients(&self, u: &StateVector) -> DVector<C64> {
        self.eigenvectors.ad_mul(u.amplitudes())
    }

    /// `rho(H) u` without forming the matrix.
    pub fn apply_function_to(&self, rho: impl Fn(f64) -> f64, u: &StateVector) -> StateVector {
        let mut c = self.coefficients(u);
        for (ck, &l) in c.iter_mut().zip(&self.eigenvalues) {
            *ck *= rho(l);
        }
        StateVector::new(&self.eigenvectors * c)
    }

    /// `e^{itH} u` without forming the matrix.
    pub fn evolve(&self, u: &StateVector, t: f64) -> StateVector {
        let mut c = self.coefficients(u);
        for (ck, &l) in c.iter_mut().zip(&self.eigenvalues) {
            *ck *= C64::from_polar(1.0, t * l);
        }
        StateVector::new(&self.eigenvectors * c)
    }
}

pub fn apply_function(s: &SpectralDecomposition, rho: impl Fn(f64) -> f64) -> ComplexMatrix {
    s.apply_function(rho)
}

pub fn propagator(s: &SpectralDecomposition, t: f64) -> ComplexMatrix {
    s.propagator(t)
}
