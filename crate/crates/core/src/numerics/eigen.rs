// Hermitian eigensolver: Householder reduction to a complex tridiagonal,
// a diagonal phase change to a real symmetric tridiagonal, then implicit QL
// with Wilkinson-type shifts (the EISPACK tql2 scheme).

use nalgebra::{DMatrix, DVector};

use super::{ComplexMatrix, NumericsConfig, SpectralDecomposition, C64};
use crate::error::{Error, Result};

struct Reduction {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
    // Unitary Q D with A = (Q D) T (Q D)^H, T real tridiagonal.
    basis: Option<DMatrix<C64>>,
}

fn tridiagonalize(a: &DMatrix<C64>, want_basis: bool) -> Reduction {
    let n = a.nrows();
    let mut w = a.clone();
    let mut reflectors: Vec<(DVector<C64>, f64)> = Vec::with_capacity(n.saturating_sub(2));
    let mut sub = vec![C64::new(0.0, 0.0); n.saturating_sub(1)];

    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let x = w.view((k + 1, k), (m, 1)).column(0).into_owned();
        let xnorm = x.norm();
        if xnorm == 0.0 {
            reflectors.push((DVector::zeros(m), 0.0));
            continue;
        }
        let x0 = x[0];
        let phase = if x0.norm() == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let tau = 2.0 / v.norm_squared();
        sub[k] = alpha;

        let mut b = w.view_mut((k + 1, k + 1), (m, m));
        let p: DVector<C64> = (&b * &v) * C64::new(tau, 0.0);
        let kappa = 0.5 * tau * v.dotc(&p).re;
        let q = &p - &v * C64::new(kappa, 0.0);
        let one = C64::new(1.0, 0.0);
        b.gerc(-one, &v, &q, one);
        b.gerc(-one, &q, &v, one);
        reflectors.push((v, tau));
    }
    if n >= 2 {
        sub[n - 2] = w[(n - 1, n - 2)];
    }

    let diag: Vec<f64> = (0..n).map(|i| w[(i, i)].re).collect();
    let mut phases = vec![C64::new(1.0, 0.0); n];
    let mut offdiag = vec![0.0; n];
    for k in 0..n.saturating_sub(1) {
        let r = sub[k].norm();
        offdiag[k] = r;
        phases[k + 1] = if r == 0.0 { phases[k] } else { phases[k] * sub[k] / r };
    }

    let basis = want_basis.then(|| {
        let mut q = DMatrix::<C64>::identity(n, n);
        for (k, (v, tau)) in reflectors.iter().enumerate().rev() {
            if *tau == 0.0 {
                continue;
            }
            let m = n - k - 1;
            let mut block = q.view_mut((k + 1, k + 1), (m, m));
            let row: DVector<C64> = block.ad_mul(v);
            block.gerc(C64::new(-*tau, 0.0), v, &row, C64::new(1.0, 0.0));
        }
        for (j, ph) in phases.iter().enumerate() {
            for z in q.column_mut(j).iter_mut() {
                *z *= *ph;
            }
        }
        q
    });

    Reduction { diag, offdiag, basis }
}

/// Implicit QL on a real symmetric tridiagonal matrix. `e[k]` couples rows
/// `k` and `k+1`; `e[n-1]` is ignored. Returns ascending eigenvalues and, if
/// requested, the orthogonal eigenvector matrix.
pub fn symmetric_tridiagonal_eigen(
    d: &[f64],
    e: &[f64],
    want_vectors: bool,
    max_iter: usize,
) -> Result<(Vec<f64>, Option<DMatrix<f64>>)> {
    let n = d.len();
    if e.len() < n.saturating_sub(1) {
        return Err(Error::invalid("off-diagonal too short for tridiagonal solve"));
    }
    let mut d = d.to_vec();
    let mut e: Vec<f64> = (0..n).map(|i| if i + 1 < n { e[i] } else { 0.0 }).collect();
    let mut z = want_vectors.then(|| DMatrix::<f64>::identity(n, n));

    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let mut iterations = 0usize;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            loop {
                iterations += 1;
                if iterations > max_iter {
                    return Err(Error::NumericalFailure {
                        message: format!("QL iteration cap {max_iter} reached at index {l}"),
                        residual: e[l].abs(),
                    });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(z) = z.as_mut() {
                        for k in 0..n {
                            let zi1 = z[(k, i + 1)];
                            let zi = z[(k, i)];
                            z[(k, i + 1)] = s * zi + c * zi1;
                            z[(k, i)] = c * zi - s * zi1;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let vectors = z.map(|z| DMatrix::from_fn(n, n, |r, c| z[(r, order[c])]));
    Ok((values, vectors))
}

fn check_input(h: &ComplexMatrix) -> Result<()> {
    if !h.is_hermitian() {
        return Err(Error::ContractViolation(
            "eigh requires a matrix flagged Hermitian".into(),
        ));
    }
    if h.data().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NumericalFailure {
            message: "matrix has non-finite entries".into(),
            residual: f64::INFINITY,
        });
    }
    Ok(())
}

pub fn eigh_with(h: &ComplexMatrix, cfg: &NumericsConfig) -> Result<SpectralDecomposition> {
    check_input(h)?;
    let n = h.dim();
    let red = tridiagonalize(h.data(), true);
    let (values, z) = symmetric_tridiagonal_eigen(&red.diag, &red.offdiag, true, cfg.eig_sweep_factor * n.max(1))?;
    let z = z.expect("vectors requested");
    let zc = z.map(|v| C64::new(v, 0.0));
    let basis = red.basis.expect("basis requested");
    Ok(SpectralDecomposition {
        eigenvalues: values,
        eigenvectors: basis * zc,
    })
}

pub fn eigh(h: &ComplexMatrix) -> Result<SpectralDecomposition> {
    eigh_with(h, &NumericsConfig::default())
}

pub fn eigvalsh_with(h: &ComplexMatrix, cfg: &NumericsConfig) -> Result<Vec<f64>> {
    check_input(h)?;
    let red = tridiagonalize(h.data(), false);
    let (values, _) =
        symmetric_tridiagonal_eigen(&red.diag, &red.offdiag, false, cfg.eig_sweep_factor * h.dim().max(1))?;
    Ok(values)
}

pub fn eigvalsh(h: &ComplexMatrix) -> Result<Vec<f64>> {
    eigvalsh_with(h, &NumericsConfig::default())
}
