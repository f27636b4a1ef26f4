//! Correlated Gaussian wavefunctions and their closed-form overlaps.
//!
//! A state is `ψ(x) = exp(log_norm + i·phase − ½ xᵀ A x)` with `A` complex
//! symmetric and `Re A` positive definite. Every coordinate change used in
//! this crate (canonical mass scaling, normal-mode rotation, the Born-Oppenheimer
//! shift) is linear, so it acts on `A` as a congruence.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub type C64 = Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianState2D {
    pub quad: Matrix2<C64>,
    pub log_norm: f64,
    pub phase: f64,
}

fn real_part(m: &Matrix2<C64>) -> Matrix2<f64> {
    m.map(|z| z.re)
}

fn is_positive_definite(m: &Matrix2<f64>) -> bool {
    m[(0, 0)] > 0.0 && m.determinant() > 0.0
}

/// Eigenvalues of a complex 2×2 matrix.
fn eigenvalues(m: &Matrix2<C64>) -> (C64, C64) {
    let half_tr = (m[(0, 0)] + m[(1, 1)]) * 0.5;
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let disc = (half_tr * half_tr - det).sqrt();
    (half_tr + disc, half_tr - disc)
}

impl GaussianState2D {
    /// Builds the normalized state with quadratic form `quad` and zero phase.
    pub fn normalized(quad: Matrix2<C64>) -> Result<Self> {
        let sym = (quad + quad.transpose()) * C64::new(0.5, 0.0);
        let re = real_part(&sym);
        if !is_positive_definite(&re) {
            return Err(Error::invalid(
                "gaussian",
                format!("real part of quadratic form is not positive definite: {re}"),
            ));
        }
        Ok(Self {
            quad: sym,
            log_norm: 0.25 * re.determinant().ln() - 0.5 * PI.ln(),
            phase: 0.0,
        })
    }

    pub fn from_real(quad: Matrix2<f64>) -> Result<Self> {
        Self::normalized(quad.map(|x| C64::new(x, 0.0)))
    }

    /// Product state of independent mode Gaussians `exp(−½ Σ aᵢ yᵢ²)` where `y = T x`.
    pub fn from_modes(modes: [C64; 2], to_modes: &Matrix2<f64>) -> Result<Self> {
        let t = to_modes.map(|x| C64::new(x, 0.0));
        let d = Matrix2::from_diagonal(&Vector2::new(modes[0], modes[1]));
        Self::normalized(t.transpose() * d * t)
    }

    pub fn amplitude(&self, x: [f64; 2]) -> C64 {
        let v = Vector2::new(C64::new(x[0], 0.0), C64::new(x[1], 0.0));
        let q = (v.transpose() * self.quad * v)[(0, 0)];
        (C64::new(self.log_norm, self.phase) - q * 0.5).exp()
    }

    pub fn norm_sq(&self) -> f64 {
        let re = real_part(&self.quad);
        (2.0 * self.log_norm).exp() * PI / re.determinant().sqrt()
    }

    pub fn is_normalizable(&self) -> bool {
        is_positive_definite(&real_part(&self.quad))
    }

    /// `⟨self|other⟩`.
    pub fn overlap(&self, other: &GaussianState2D) -> C64 {
        let c = self.quad.map(|z| z.conj()) + other.quad;
        let (l1, l2) = eigenvalues(&c);
        let sqrt_det = l1.sqrt() * l2.sqrt();
        let pref = C64::new(self.log_norm + other.log_norm, other.phase - self.phase).exp();
        pref * (2.0 * PI) / sqrt_det
    }

    pub fn fidelity(&self, other: &GaussianState2D) -> f64 {
        let ov = self.overlap(other);
        ov.norm_sqr() / (self.norm_sq() * other.norm_sq())
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }
}

/// Single-coordinate Gaussian `exp(log_norm + i·phase − ½ a x²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaussian1D {
    pub quad: C64,
    pub log_norm: f64,
    pub phase: f64,
}

impl Gaussian1D {
    pub fn normalized(quad: C64) -> Result<Self> {
        if !(quad.re > 0.0) {
            return Err(Error::invalid(
                "gaussian",
                format!("Re(a) = {} must be positive", quad.re),
            ));
        }
        Ok(Self {
            quad,
            log_norm: 0.25 * (quad.re / PI).ln(),
            phase: 0.0,
        })
    }

    /// Ground state of a harmonic oscillator of mass `mass` and frequency `omega`.
    pub fn harmonic_ground(mass: f64, omega: f64, hbar: f64) -> Result<Self> {
        Self::normalized(C64::new(mass * omega / hbar, 0.0))
    }

    pub fn amplitude(&self, x: f64) -> C64 {
        (C64::new(self.log_norm, self.phase) - self.quad * (0.5 * x * x)).exp()
    }

    pub fn norm_sq(&self) -> f64 {
        (2.0 * self.log_norm).exp() * (PI / self.quad.re).sqrt()
    }

    pub fn overlap(&self, other: &Gaussian1D) -> C64 {
        let c = self.quad.conj() + other.quad;
        let pref = C64::new(self.log_norm + other.log_norm, other.phase - self.phase).exp();
        pref * (C64::new(2.0 * PI, 0.0) / c).sqrt()
    }

    pub fn fidelity(&self, other: &Gaussian1D) -> f64 {
        self.overlap(other).norm_sqr() / (self.norm_sq() * other.norm_sq())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::GaussLegendre2D;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sample_states() -> (GaussianState2D, GaussianState2D) {
        let a = GaussianState2D::normalized(Matrix2::new(c(2.0, 0.3), c(-0.4, 0.1), c(-0.4, 0.1), c(1.0, -0.2)))
            .unwrap()
            .with_phase(0.4);
        let b = GaussianState2D::normalized(Matrix2::new(c(1.5, -0.5), c(0.2, 0.0), c(0.2, 0.0), c(3.0, 0.7)))
            .unwrap();
        (a, b)
    }

    #[test]
    fn normalized_states_have_unit_norm() {
        let (a, b) = sample_states();
        assert!((a.norm_sq() - 1.0).abs() < 1e-12);
        assert!((b.norm_sq() - 1.0).abs() < 1e-12);
        assert!((a.overlap(&a).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn overlap_matches_quadrature_including_phase() {
        let (a, b) = sample_states();
        let quad = GaussLegendre2D::new(200, [-8.0, 8.0], [-8.0, 8.0]);
        let numeric = quad.integrate_complex(|x, y| a.amplitude([x, y]).conj() * b.amplitude([x, y]));
        let closed = a.overlap(&b);
        assert!((numeric - closed).norm() < 1e-10, "{numeric} vs {closed}");
    }

    #[test]
    fn non_normalizable_form_is_rejected() {
        let bad = Matrix2::new(c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(1.0, 0.0));
        assert!(GaussianState2D::normalized(bad).is_err());
        assert!(Gaussian1D::normalized(c(-1.0, 0.0)).is_err());
    }

    #[test]
    fn one_dimensional_overlap() {
        let f = Gaussian1D::normalized(c(2.0, 0.5)).unwrap();
        let g = Gaussian1D::normalized(c(0.7, -0.3)).unwrap();
        let h = 1e-3;
        let numeric: C64 = (-20000..=20000)
            .map(|i| {
                let x = i as f64 * h;
                f.amplitude(x).conj() * g.amplitude(x) * h
            })
            .sum();
        assert!((numeric - f.overlap(&g)).norm() < 1e-10);
        assert!((f.fidelity(&f) - 1.0).abs() < 1e-12);
    }
}
