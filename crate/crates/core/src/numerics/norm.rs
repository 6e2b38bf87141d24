use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{eigvalsh_with, symmetric_tridiagonal_eigen, ComplexMatrix, NumericsConfig, C64};
use crate::error::{Error, Result};

/// How the largest singular value is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMethod {
    /// Dense below `dense_norm_below`, Lanczos above.
    Auto,
    Dense,
    Power,
    Lanczos,
}

const START_SEED: u64 = 0x6e6f726d;

fn start_vector(n: usize) -> DVector<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let v = DVector::from_fn(n, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let nv = v.norm();
    v.unscale(nv)
}

fn gram(a: &DMatrix<C64>, v: &DVector<C64>) -> DVector<C64> {
    a.ad_mul(&(a * v))
}

fn dense(a: &DMatrix<C64>, cfg: &NumericsConfig) -> Result<f64> {
    let g = ComplexMatrix::from_parts(a.ad_mul(a), false).symmetrized();
    let vals = eigvalsh_with(&g, cfg)?;
    Ok(vals.last().copied().unwrap_or(0.0).max(0.0).sqrt())
}

fn power(a: &DMatrix<C64>, cfg: &NumericsConfig) -> Result<f64> {
    let mut v = start_vector(a.ncols());
    let mut previous = 0.0;
    for _ in 0..cfg.norm_max_iter {
        let w = gram(a, &v);
        let rayleigh = v.dotc(&w).re;
        let nw = w.norm();
        if nw == 0.0 {
            return Ok(0.0);
        }
        if (rayleigh - previous).abs() <= cfg.norm_rel_tol * rayleigh.abs() {
            return Ok(rayleigh.max(0.0).sqrt());
        }
        previous = rayleigh;
        v = w.unscale(nw);
    }
    Err(Error::NumericalFailure {
        message: format!("power iteration did not settle in {} steps", cfg.norm_max_iter),
        residual: previous,
    })
}

// Lanczos on A^H A with full reorthogonalization. Stops when the Ritz residual
// of the top pair falls below `norm_rel_tol * theta`.
fn lanczos(a: &DMatrix<C64>, cfg: &NumericsConfig) -> Result<f64> {
    let n = a.ncols();
    let max_steps = n.min(cfg.norm_max_iter.max(1));
    let mut basis: Vec<DVector<C64>> = vec![start_vector(n)];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut last_residual = f64::INFINITY;

    for k in 0..max_steps {
        let q = &basis[k];
        let mut w = gram(a, q);
        let alpha = q.dotc(&w).re;
        alphas.push(alpha);
        for _ in 0..2 {
            for b in &basis {
                let c = b.dotc(&w);
                w.axpy(-c, b, C64::new(1.0, 0.0));
            }
        }
        let beta = w.norm();

        let (vals, vecs) = symmetric_tridiagonal_eigen(&alphas, &betas, true, 30 * (k + 1))?;
        let theta = *vals.last().expect("nonempty");
        if theta <= 0.0 && beta == 0.0 {
            return Ok(0.0);
        }
        let vecs = vecs.expect("vectors requested");
        let s_last = vecs[(k, k)].abs();
        let residual = beta * s_last;
        last_residual = residual / theta.abs().max(f64::MIN_POSITIVE);
        if residual <= cfg.norm_rel_tol * theta.abs() || beta <= f64::EPSILON * theta.abs() || k + 1 == n {
            return Ok(theta.max(0.0).sqrt());
        }
        betas.push(beta);
        basis.push(w.unscale(beta));
    }
    Err(Error::NumericalFailure {
        message: format!("Lanczos did not converge in {max_steps} steps"),
        residual: last_residual,
    })
}

/// Largest singular value of `A`.
pub fn operator_norm_with(a: &ComplexMatrix, cfg: &NumericsConfig) -> Result<f64> {
    let data = a.data();
    if data.iter().all(|z| *z == C64::new(0.0, 0.0)) {
        return Ok(0.0);
    }
    let method = match cfg.norm_method {
        NormMethod::Auto if a.dim() < cfg.dense_norm_below => NormMethod::Dense,
        NormMethod::Auto => NormMethod::Lanczos,
        m => m,
    };
    match method {
        NormMethod::Dense => dense(data, cfg),
        NormMethod::Power => power(data, cfg),
        _ => lanczos(data, cfg),
    }
}

pub fn operator_norm(a: &ComplexMatrix) -> Result<f64> {
    operator_norm_with(a, &NumericsConfig::default())
}
