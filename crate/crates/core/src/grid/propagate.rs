//! Crank–Nicolson time stepping with a BiCGSTAB linear solver.

use super::sparse::{CsrMatrix, Entry, C64};
use super::GridState;
use crate::error::{Error, Result};

const SOLVE_TOL: f64 = 1e-14;
const ACCEPT_TOL: f64 = 1e-11;
const MAX_ITER: usize = 1000;
const LEAK_CELLS: usize = 2;
const LEAK_LIMIT: f64 = 1e-10;

/// `H(t)` applied to a vector.
pub trait TimeDependentOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, t: f64, x: &[C64], y: &mut [C64]);
}

impl<T: Entry> TimeDependentOperator for CsrMatrix<T> {
    fn dim(&self) -> usize {
        CsrMatrix::dim(self)
    }
    fn apply(&self, _t: f64, x: &[C64], y: &mut [C64]) {
        CsrMatrix::apply(self, x, y)
    }
}

/// Rebuilds the matrix from a closure at every evaluation.
pub struct MatrixFn<F> {
    pub dim: usize,
    pub build: F,
}

impl<T: Entry, F: Fn(f64) -> CsrMatrix<T> + Sync> TimeDependentOperator for MatrixFn<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn apply(&self, t: f64, x: &[C64], y: &mut [C64]) {
        (self.build)(t).apply(x, y)
    }
}

type Coefficient = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// `Σₖ cₖ(t) Mₖ` with fixed matrices.
#[derive(Default)]
pub struct TermSum {
    terms: Vec<(CsrMatrix<C64>, Coefficient)>,
}

impl TermSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with<T: Entry>(mut self, matrix: &CsrMatrix<T>, coeff: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.terms.push((matrix.to_complex(), Box::new(coeff)));
        self
    }

    pub fn constant<T: Entry>(self, matrix: &CsrMatrix<T>) -> Self {
        self.with(matrix, |_| 1.0)
    }
}

impl TimeDependentOperator for TermSum {
    fn dim(&self) -> usize {
        self.terms.first().map(|t| t.0.dim()).unwrap_or(0)
    }
    fn apply(&self, t: f64, x: &[C64], y: &mut [C64]) {
        y.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        for (m, c) in &self.terms {
            let c = c(t);
            if c != 0.0 {
                m.apply_add(C64::new(c, 0.0), x, y);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolverStats {
    pub iterations: usize,
    pub residual: f64,
}

fn dotc(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Solves `A x = b` starting from the guess in `x`; `apply(v, out)` computes `A v`.
pub fn bicgstab(apply: impl Fn(&[C64], &mut [C64]), b: &[C64], x: &mut [C64]) -> Result<SolverStats> {
    let n = b.len();
    let zero = C64::new(0.0, 0.0);
    let bnorm = norm(b).max(f64::MIN_POSITIVE);
    let mut r = vec![zero; n];
    apply(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0));
    let mut v = vec![zero; n];
    let mut p = vec![zero; n];
    let mut s = vec![zero; n];
    let mut t = vec![zero; n];
    let mut residual = norm(&r) / bnorm;
    if residual <= SOLVE_TOL {
        return Ok(SolverStats { iterations: 0, residual });
    }
    for it in 1..=MAX_ITER {
        let rho_new = dotc(&r_hat, &r);
        if rho_new.norm() == 0.0 {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        apply(&p, &mut v);
        alpha = rho / dotc(&r_hat, &v);
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if norm(&s) / bnorm <= SOLVE_TOL {
            for i in 0..n {
                x[i] += alpha * p[i];
            }
            residual = norm(&s) / bnorm;
            return Ok(SolverStats { iterations: it, residual });
        }
        apply(&s, &mut t);
        let tt = dotc(&t, &t);
        omega = if tt.norm() > 0.0 { dotc(&t, &s) / tt } else { zero };
        for i in 0..n {
            x[i] += alpha * p[i] + omega * s[i];
            r[i] = s[i] - omega * t[i];
        }
        residual = norm(&r) / bnorm;
        if residual <= SOLVE_TOL {
            return Ok(SolverStats { iterations: it, residual });
        }
        if omega.norm() == 0.0 {
            break;
        }
    }
    // Recompute the true residual before judging stagnation.
    apply(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    residual = norm(&r) / bnorm;
    if residual <= ACCEPT_TOL {
        Ok(SolverStats { iterations: MAX_ITER, residual })
    } else {
        Err(Error::SolverFailure { residual, iterations: MAX_ITER })
    }
}

#[derive(Debug, Clone)]
pub struct Propagation {
    pub state: GridState,
    pub steps: usize,
    pub dt: f64,
    /// `|‖ψ(T)‖² − ‖ψ(0)‖²|`.
    pub norm_drift: f64,
    /// Largest probability within two cells of a wall over the run.
    pub boundary_probability: f64,
    pub boundary_flag: bool,
    pub max_solver_residual: f64,
}

/// `(1 + i dt H(t+dt/2)/2ħ) ψ_{t+dt} = (1 − i dt H(t+dt/2)/2ħ) ψ_t`.
///
/// The step count is `ceil(Tf/dt)`; the step is shrunk to land on `Tf` exactly.
pub fn propagate(
    h: &impl TimeDependentOperator,
    psi0: &GridState,
    tf: f64,
    dt: f64,
    hbar: f64,
) -> Result<Propagation> {
    if !(dt > 0.0) {
        return Err(Error::invalid("dt", format!("must be positive, got {dt}")));
    }
    if !(tf >= 0.0) {
        return Err(Error::invalid("Tf", format!("must be non-negative, got {tf}")));
    }
    let n = psi0.amplitudes.len();
    if h.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: h.dim() });
    }
    let steps = (tf / dt).ceil().max(if tf > 0.0 { 1.0 } else { 0.0 }) as usize;
    let dt = if steps > 0 { tf / steps as f64 } else { 0.0 };
    let half = C64::new(0.0, 0.5 * dt / hbar);
    let mut psi = psi0.amplitudes.clone();
    let mut rhs = vec![C64::new(0.0, 0.0); n];
    let mut hpsi = vec![C64::new(0.0, 0.0); n];
    let mut max_res: f64 = 0.0;
    let mut leak = psi0.boundary_probability(LEAK_CELLS);
    let mut state = psi0.clone();
    for step in 0..steps {
        let tm = (step as f64 + 0.5) * dt;
        h.apply(tm, &psi, &mut hpsi);
        for i in 0..n {
            rhs[i] = psi[i] - half * hpsi[i];
        }
        // Explicit predictor as the starting guess.
        let mut next: Vec<C64> = (0..n).map(|i| psi[i] - half * hpsi[i] * 2.0).collect();
        let stats = bicgstab(
            |v, out| {
                h.apply(tm, v, out);
                for i in 0..v.len() {
                    out[i] = v[i] + half * out[i];
                }
            },
            &rhs,
            &mut next,
        )?;
        max_res = max_res.max(stats.residual);
        psi = next;
        if step % 64 == 63 || step + 1 == steps {
            state.amplitudes.clone_from(&psi);
            leak = leak.max(state.boundary_probability(LEAK_CELLS));
        }
    }
    state.amplitudes = psi;
    let norm_drift = (state.norm_sq() - psi0.norm_sq()).abs();
    Ok(Propagation {
        state,
        steps,
        dt,
        norm_drift,
        boundary_probability: leak,
        boundary_flag: leak > LEAK_LIMIT,
        max_solver_residual: max_res,
    })
}
