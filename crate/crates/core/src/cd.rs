//! Counterdiabatic terms for the coupled oscillators and a generic spectral builder.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::gaussian::C64;
use crate::jet::Jet;
use crate::oscillators::{boa_jets, mode_jets};
use crate::params::OscillatorParams;

/// Coordinate pair on which a squeezing term `coeff·{x, p}` acts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SqueezeTarget {
    Mode1,
    Mode2,
    /// `{x_S, p_S}`
    Slow,
    /// `{x_T, p_F}`
    Fast,
}

/// `coeff·{x, p}` with `coeff = −ω̇/(4ω)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeCD {
    pub coeff: f64,
    pub target: SqueezeTarget,
}

impl SqueezeCD {
    pub fn from_frequency(omega: Jet, target: SqueezeTarget) -> Self {
        Self {
            coeff: -omega.d1 / (4.0 * omega.value),
            target,
        }
    }
}

/// `ω_T² = ω² − 3ω̇²/(4ω²) + ω̈/(2ω)`.
pub fn transformed_frequency_sq(omega: Jet) -> f64 {
    let w = omega.value;
    w * w - 0.75 * omega.d1 * omega.d1 / (w * w) + omega.d2 / (2.0 * w)
}

/// Exact counterdiabatic squeezing terms of the two normal modes.
pub fn exact_cd(p: &OscillatorParams, t: f64) -> Result<[SqueezeCD; 2]> {
    let m = mode_jets(p, t)?;
    Ok([
        SqueezeCD::from_frequency(m.omega1, SqueezeTarget::Mode1),
        SqueezeCD::from_frequency(m.omega2, SqueezeTarget::Mode2),
    ])
}

/// `(ω_{T,1}², ω_{T,2}²)`.
pub fn transformed_frequencies(p: &OscillatorParams, t: f64) -> Result<(f64, f64)> {
    let m = mode_jets(p, t)?;
    Ok((transformed_frequency_sq(m.omega1), transformed_frequency_sq(m.omega2)))
}

/// Sub-system terms: slow on `{x_S, p_S}` from `ω_S`, fast on `{x_T, p_F}` from `ω_F`.
pub fn cbod_cd(p: &OscillatorParams, t: f64) -> Result<(SqueezeCD, SqueezeCD)> {
    let b = boa_jets(p, t)?;
    Ok((
        SqueezeCD::from_frequency(b.omega_slow, SqueezeTarget::Slow),
        SqueezeCD::from_frequency(b.omega_fast, SqueezeTarget::Fast),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveSprings {
    pub gamma_slow: f64,
    pub gamma_fast: f64,
    pub k_int: f64,
    pub omega_t1_sq: f64,
    pub omega_t2_sq: f64,
    /// `γ_S γ_F > k_I²` and `γ_F > 0`: the γ-Hamiltonian has real normal-mode frequencies.
    pub real_frequency: bool,
}

/// Spring of `x_S` in the approximate CBOD Hamiltonian, `κ_S − m_F ω̇_F² k_I²/(4ω_F²κ_F²)`.
pub(crate) fn absorbed_slow_spring(p: &OscillatorParams, t: f64) -> Result<f64> {
    let s = p.springs(t)?;
    let b = boa_jets(p, t)?;
    let wf = b.omega_fast;
    let (kf, ki) = (s.kappa_fast.value, s.k_int.value);
    Ok(s.kappa_slow.value - p.m_fast * wf.d1 * wf.d1 * ki * ki / (4.0 * wf.value * wf.value * kf * kf))
}

/// Springs of the local Hamiltonian unitarily equivalent to the CBOD-driven one.
pub fn cbod_effective_springs(p: &OscillatorParams, t: f64) -> Result<EffectiveSprings> {
    let s = p.springs(t)?;
    let b = boa_jets(p, t)?;
    let (ws, wf) = (b.omega_slow, b.omega_fast);
    let (ms, mf) = (p.m_slow, p.m_fast);
    let (kf, ki) = (s.kappa_fast.value, s.k_int.value);
    let gamma_slow = s.kappa_slow.value - 0.75 * ms * ws.d1 * ws.d1 / (ws.value * ws.value)
        - mf * wf.d1 * wf.d1 * ki * ki / (4.0 * wf.value * wf.value * kf * kf)
        + ms * ws.d2 / (2.0 * ws.value);
    let gamma_fast = kf - 0.75 * mf * wf.d1 * wf.d1 / (wf.value * wf.value) + mf * wf.d2 / (2.0 * wf.value);
    let (omega_t1_sq, omega_t2_sq) = transformed_frequencies(p, t)?;
    Ok(EffectiveSprings {
        gamma_slow,
        gamma_fast,
        k_int: ki,
        omega_t1_sq,
        omega_t2_sq,
        real_frequency: gamma_fast > 0.0 && gamma_slow * gamma_fast > ki * ki,
    })
}

/// `H₁ = iħ Σ_{m≠n} P_m (∂ₜH₀) P_n / (ε_n − ε_m)`.
///
/// Fails if two eigenvalues of `h0` are closer than `1e-9` times its spectral range.
pub fn spectral_cd_matrix(h0: &DMatrix<C64>, dh0: &DMatrix<C64>, hbar: f64) -> Result<DMatrix<C64>> {
    let n = h0.nrows();
    if h0.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: h0.ncols() });
    }
    if dh0.nrows() != n || dh0.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: dh0.nrows() });
    }
    let eig = SymmetricEigen::new(h0.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let range = eig.eigenvalues.max() - eig.eigenvalues.min();
    let tol = 1e-9 * range.max(f64::MIN_POSITIVE);
    for w in order.windows(2) {
        let gap = eig.eigenvalues[w[1]] - eig.eigenvalues[w[0]];
        if gap < tol {
            return Err(Error::Degenerate { i: w[0], j: w[1], gap, tol });
        }
    }
    let v = &eig.eigenvectors;
    let mut d = v.adjoint() * dh0 * v;
    for m in 0..n {
        for k in 0..n {
            d[(m, k)] = if m == k {
                C64::new(0.0, 0.0)
            } else {
                d[(m, k)] * C64::new(0.0, hbar) / (eig.eigenvalues[k] - eig.eigenvalues[m])
            };
        }
    }
    Ok(v * d * v.adjoint())
}
