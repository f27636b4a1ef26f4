//! Lowest eigenpairs of Hermitian grid operators.
//!
//! Dense diagonalization up to [`DENSE_LIMIT`]; above it, shift-invert Lanczos
//! with full reorthogonalization on real symmetric matrices.

use nalgebra::{DMatrix, SymmetricEigen};

use super::sparse::{CsrMatrix, C64};
use crate::error::{Error, Result};

pub const DENSE_LIMIT: usize = 2048;
const LANCZOS_TOL: f64 = 1e-13;
const LANCZOS_MAX_ITER: usize = 600;
const RITZ_TOL: f64 = 1e-9;
const CG_TOL: f64 = 1e-13;
const CG_MAX_ITER: usize = 20_000;
const GRAM_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct Eigenpairs {
    /// Ascending.
    pub values: Vec<f64>,
    /// Unit vectors in the Euclidean norm of the coefficient space.
    pub vectors: Vec<Vec<C64>>,
}

impl Eigenpairs {
    /// Largest `|⟨vᵢ|vⱼ⟩ − δᵢⱼ|`.
    pub fn gram_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.vectors.iter().enumerate() {
            for (j, b) in self.vectors.iter().enumerate() {
                let d: C64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((d - target).norm());
            }
        }
        worst
    }
}

pub fn lowest_eigenpairs<T: super::sparse::Entry>(h: &CsrMatrix<T>, k: usize) -> Result<Eigenpairs> {
    let n = h.dim();
    if k > n {
        return Err(Error::DimensionMismatch { expected: n, got: k });
    }
    let complex = h.to_complex();
    let pairs = match complex.as_real() {
        Some(real) if n > DENSE_LIMIT => lanczos(&real, k)?,
        Some(real) => dense_real(&real.to_dense_real(), k),
        None if n <= DENSE_LIMIT => dense_complex(&complex.to_dense(), k),
        None => {
            return Err(Error::invalid(
                "hamiltonian",
                format!("complex operator of dimension {n} exceeds the dense limit {DENSE_LIMIT}"),
            ))
        }
    };
    let gram = pairs.gram_residual();
    if gram > GRAM_TOL {
        return Err(Error::EigenFailure { residual: gram, iterations: 0 });
    }
    Ok(pairs)
}

pub fn dense_real(m: &DMatrix<f64>, k: usize) -> Eigenpairs {
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let order = &order[..k];
    Eigenpairs {
        values: order.iter().map(|&i| eig.eigenvalues[i]).collect(),
        vectors: order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect(),
    }
}

pub fn dense_complex(m: &DMatrix<C64>, k: usize) -> Eigenpairs {
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let order = &order[..k];
    Eigenpairs {
        values: order.iter().map(|&i| eig.eigenvalues[i]).collect(),
        vectors: order.iter().map(|&i| eig.eigenvectors.column(i).iter().copied().collect()).collect(),
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Deterministic, well-spread start vector.
fn start_vector(n: usize) -> Vec<f64> {
    let mut state: u64 = 0x9E37_79B9_7F4A_7C15;
    let mut v: Vec<f64> = (0..n)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect();
    let norm = dot(&v, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    v
}

/// Bounds on the spectrum from Gershgorin discs.
fn gershgorin(h: &CsrMatrix<f64>) -> (f64, f64) {
    (0..h.dim()).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), i| {
        let (mut diag, mut off) = (0.0, 0.0);
        for (j, v) in h.row(i) {
            if j == i {
                diag += v;
            } else {
                off += v.abs();
            }
        }
        (lo.min(diag - off), hi.max(diag + off))
    })
}

/// Conjugate gradients for `(H − σ) x = b` with `H − σ` positive definite.
fn shifted_cg(h: &CsrMatrix<f64>, sigma: f64, b: &[f64]) -> Result<Vec<f64>> {
    let n = b.len();
    let apply = |v: &[f64], out: &mut [f64]| {
        h.apply_real(v, out);
        axpy(-sigma, v, out);
    };
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let bnorm = dot(b, b).sqrt();
    let mut rr = dot(&r, &r);
    for _ in 0..CG_MAX_ITER {
        if rr.sqrt() <= CG_TOL * bnorm {
            return Ok(x);
        }
        apply(&p, &mut ap);
        let alpha = rr / dot(&p, &ap);
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
    }
    Err(Error::SolverFailure { residual: rr.sqrt() / bnorm, iterations: CG_MAX_ITER })
}

/// Shift-invert Lanczos: the lowest eigenvalues of `H` are the largest of `(H − σ)⁻¹`
/// for `σ` just below the Gershgorin bound.
fn lanczos(h: &CsrMatrix<f64>, k: usize) -> Result<Eigenpairs> {
    let n = h.dim();
    let (lo, hi) = gershgorin(h);
    let sigma = lo - 1e-6 * (hi - lo) - f64::MIN_POSITIVE;
    let max_iter = n.min(LANCZOS_MAX_ITER);
    let mut basis: Vec<Vec<f64>> = vec![start_vector(n)];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut last_residual = f64::INFINITY;
    for j in 0..max_iter {
        let mut w = shifted_cg(h, sigma, &basis[j])?;
        let a = dot(&basis[j], &w);
        alphas.push(a);
        axpy(-a, &basis[j], &mut w);
        if j > 0 {
            axpy(-betas[j - 1], &basis[j - 1], &mut w);
        }
        for _ in 0..2 {
            for v in &basis {
                let c = dot(v, &w);
                axpy(-c, v, &mut w);
            }
        }
        let b = dot(&w, &w).sqrt();
        let m = j + 1;
        let exhausted = b < 1e-14 * a.abs() || m == max_iter;
        if m >= k && (m % 5 == 0 || exhausted) {
            let eig = SymmetricEigen::new(tridiagonal(&alphas, &betas));
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
            let converged = order[..k]
                .iter()
                .map(|&i| (b * eig.eigenvectors[(m - 1, i)]).abs() / eig.eigenvalues[i].abs())
                .fold(0.0, f64::max);
            if converged <= LANCZOS_TOL || exhausted {
                let mut pairs: Vec<(f64, Vec<f64>)> = order[..k]
                    .iter()
                    .map(|&i| {
                        let mut x = vec![0.0; n];
                        for (row, v) in basis.iter().enumerate() {
                            axpy(eig.eigenvectors[(row, i)], v, &mut x);
                        }
                        let norm = dot(&x, &x).sqrt();
                        x.iter_mut().for_each(|xi| *xi /= norm);
                        let mut hx = vec![0.0; n];
                        h.apply_real(&x, &mut hx);
                        (dot(&x, &hx), x)
                    })
                    .collect();
                let scale = hi.abs().max(lo.abs()).max(1.0);
                last_residual = pairs
                    .iter()
                    .map(|(value, x)| {
                        let mut hx = vec![0.0; n];
                        h.apply_real(x, &mut hx);
                        axpy(-value, x, &mut hx);
                        dot(&hx, &hx).sqrt() / scale
                    })
                    .fold(0.0, f64::max);
                if last_residual <= RITZ_TOL {
                    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
                    return Ok(Eigenpairs {
                        values: pairs.iter().map(|p| p.0).collect(),
                        vectors: pairs
                            .into_iter()
                            .map(|(_, x)| x.into_iter().map(|v| C64::new(v, 0.0)).collect())
                            .collect(),
                    });
                }
            }
        }
        if exhausted {
            break;
        }
        betas.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
    Err(Error::EigenFailure { residual: last_residual, iterations: basis.len() })
}

fn tridiagonal(alphas: &[f64], betas: &[f64]) -> DMatrix<f64> {
    let m = alphas.len();
    let mut t = DMatrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alphas[i];
        if i + 1 < m {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    t
}
