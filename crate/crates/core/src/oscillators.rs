//! Normal modes and the Born-Oppenheimer treatment of two coupled oscillators.
//!
//! Canonical scaling `x₁ = (m_S/m_F)^{1/4} x_S`, `x₂ = (m_F/m_S)^{1/4} x_F` gives
//! both coordinates the reduced mass `μ = √(m_S m_F)` and turns the spring matrix
//! into `[[a, −k_I], [−k_I, b]]` with `a = κ_S √(m_F/m_S)`, `b = κ_F √(m_S/m_F)`.
//! The rotation `y₁ = c x₁ − s x₂`, `y₂ = s x₁ + c x₂` by `α = ½ arctan(2k_I/(a−b))`
//! diagonalizes it.

use std::f64::consts::FRAC_PI_2;

use nalgebra::Matrix2;

use crate::error::{Error, Result};
use crate::gaussian::{GaussianState2D, C64};
use crate::jet::Jet;
use crate::params::OscillatorParams;

/// Instantaneous normal-mode data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalModeFrame {
    pub alpha: f64,
    pub mu: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub omega1: f64,
    pub omega2: f64,
    /// `(m_S/m_F)^{1/4}`, the factor taking `x_S` to `x₁`.
    pub scale: f64,
}

impl NormalModeFrame {
    /// Lab coordinates `(x_S, x_F)` to mode coordinates `(y₁, y₂)`.
    pub fn to_modes(&self) -> Matrix2<f64> {
        to_modes(self.alpha, self.scale)
    }

    /// Ground state `exp(−½ Σ μωᵢ yᵢ²/ħ)` in lab coordinates.
    pub fn ground_state(&self, hbar: f64) -> Result<GaussianState2D> {
        let q = |w: f64| C64::new(self.mu * w / hbar, 0.0);
        GaussianState2D::from_modes([q(self.omega1), q(self.omega2)], &self.to_modes())
    }

    /// Largest off-diagonal element of the rotated, mass-scaled spring matrix.
    pub fn diagonalization_residual(&self, kappa_slow: f64, kappa_fast: f64, k_int: f64, m_slow: f64, m_fast: f64) -> f64 {
        let (a, b) = scaled_diagonal(kappa_slow, kappa_fast, m_slow, m_fast);
        let k = Matrix2::new(a, -k_int, -k_int, b);
        let (s, c) = self.alpha.sin_cos();
        let r = Matrix2::new(c, -s, s, c);
        let d = r * k * r.transpose();
        d[(0, 1)].abs().max(d[(1, 0)].abs())
    }
}

pub(crate) fn to_modes(alpha: f64, scale: f64) -> Matrix2<f64> {
    let (s, c) = alpha.sin_cos();
    Matrix2::new(c, -s, s, c) * Matrix2::new(scale, 0.0, 0.0, 1.0 / scale)
}

fn scaled_diagonal(kappa_slow: f64, kappa_fast: f64, m_slow: f64, m_fast: f64) -> (f64, f64) {
    let ratio = (m_fast / m_slow).sqrt();
    (kappa_slow * ratio, kappa_fast / ratio)
}

/// Principal-branch angle `½ arctan(2k/(a−b))`, with `a = b` read as `a − b = +0`.
pub fn principal_angle(a: f64, b: f64, k: f64) -> f64 {
    if k == 0.0 {
        0.0
    } else if a == b {
        0.25 * std::f64::consts::PI * k.signum()
    } else {
        0.5 * (2.0 * k / (a - b)).atan()
    }
}

/// Mode springs for a general spring matrix, which may be indefinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSprings {
    pub alpha: f64,
    pub kappa1: Jet,
    pub kappa2: Jet,
}

/// Which eigenvalue of the scaled spring matrix mode 1 follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeLabels {
    /// No coupling at any time: mode 1 is `x₁` and mode 2 is `x₂`.
    Decoupled,
    /// Mode 1 is the upper (`true`) or lower eigenvalue.
    Ranked { mode1_upper: bool },
}

impl ModeLabels {
    /// Labels fixed by the principal branch at the reference springs.
    pub fn at_reference(a: f64, b: f64, k_int_vanishes: bool) -> Self {
        if k_int_vanishes {
            ModeLabels::Decoupled
        } else {
            ModeLabels::Ranked { mode1_upper: a >= b }
        }
    }

    /// Labels used for time-dependent work on `p`: the principal branch at `t = 0`.
    pub fn for_params(p: &OscillatorParams) -> Result<Self> {
        let s = p.springs(0.0)?;
        let (a, b) = scaled_diagonal(s.kappa_slow.value, s.kappa_fast.value, p.m_slow, p.m_fast);
        let vanishes = matches!(p.k_int, crate::params::Spring::Constant(k) if k == 0.0);
        Ok(Self::at_reference(a, b, vanishes))
    }
}

/// Mode springs with time derivatives for scaled diagonal `a`, `b` and coupling `k`.
pub fn mode_springs(a: Jet, b: Jet, k: Jet, labels: ModeLabels) -> ModeSprings {
    let upper_first = match labels {
        ModeLabels::Decoupled => {
            return ModeSprings {
                alpha: 0.0,
                kappa1: a,
                kappa2: b,
            }
        }
        ModeLabels::Ranked { mode1_upper } => mode1_upper,
    };
    let d = a - b;
    let r = (d * d + k * k * 4.0).sqrt();
    let mean = (a + b) * 0.5;
    let (upper, lower) = (mean + r * 0.5, mean - r * 0.5);
    let principal = principal_angle(a.value, b.value, k.value);
    let principal_upper = a.value >= b.value;
    let alpha = if principal_upper == upper_first {
        principal
    } else if principal > 0.0 {
        principal - FRAC_PI_2
    } else {
        principal + FRAC_PI_2
    };
    let (kappa1, kappa2) = if upper_first { (upper, lower) } else { (lower, upper) };
    ModeSprings { alpha, kappa1, kappa2 }
}

/// Normal-mode springs and frequencies with their first two time derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeJets {
    pub alpha: f64,
    pub mu: f64,
    pub kappa1: Jet,
    pub kappa2: Jet,
    pub omega1: Jet,
    pub omega2: Jet,
}

fn real_frequency(t: f64, kappa: f64, which: &str) -> Result<()> {
    if kappa > 0.0 {
        Ok(())
    } else {
        Err(Error::RealFrequencyViolation {
            t,
            reason: format!("{which} spring {kappa} <= 0"),
        })
    }
}

pub fn mode_jets(p: &OscillatorParams, t: f64) -> Result<ModeJets> {
    let labels = ModeLabels::for_params(p)?;
    let s = p.springs(t)?;
    let ratio = (p.m_fast / p.m_slow).sqrt();
    let m = mode_springs(s.kappa_slow * ratio, s.kappa_fast / ratio, s.k_int, labels);
    real_frequency(t, m.kappa1.value, "mode 1")?;
    real_frequency(t, m.kappa2.value, "mode 2")?;
    let mu = (p.m_slow * p.m_fast).sqrt();
    Ok(ModeJets {
        alpha: m.alpha,
        mu,
        kappa1: m.kappa1,
        kappa2: m.kappa2,
        omega1: (m.kappa1 / mu).sqrt(),
        omega2: (m.kappa2 / mu).sqrt(),
    })
}

/// Normal modes at time `t`, labelled continuously from `t = 0`.
pub fn normal_mode_frame(p: &OscillatorParams, t: f64) -> Result<NormalModeFrame> {
    let j = mode_jets(p, t)?;
    Ok(NormalModeFrame {
        alpha: j.alpha,
        mu: j.mu,
        kappa1: j.kappa1.value,
        kappa2: j.kappa2.value,
        omega1: j.omega1.value,
        omega2: j.omega2.value,
        scale: (p.m_slow / p.m_fast).powf(0.25),
    })
}

pub fn exact_ground_state(p: &OscillatorParams, t: f64) -> Result<GaussianState2D> {
    normal_mode_frame(p, t)?.ground_state(p.hbar())
}

/// `ε_ij = ħω₁(i+½) + ħω₂(j+½)`.
pub fn exact_energy(p: &OscillatorParams, t: f64, i: u32, j: u32) -> Result<f64> {
    let f = normal_mode_frame(p, t)?;
    Ok(p.hbar() * (f.omega1 * (i as f64 + 0.5) + f.omega2 * (j as f64 + 0.5)))
}

/// Born-Oppenheimer frame: the fast oscillator sees `x_T = x_F − slope·x_S`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoaFrame {
    pub slope: f64,
    pub kappa_slow_eff: f64,
    pub omega_slow: f64,
    pub omega_fast: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoaJets {
    pub slope: Jet,
    pub kappa_slow_eff: Jet,
    pub omega_slow: Jet,
    pub omega_fast: Jet,
}

pub fn boa_jets(p: &OscillatorParams, t: f64) -> Result<BoaJets> {
    let s = p.springs(t)?;
    if !(s.kappa_fast.value > 0.0) {
        return Err(Error::RealFrequencyViolation {
            t,
            reason: format!("kappa_F = {} <= 0", s.kappa_fast.value),
        });
    }
    let slope = s.k_int / s.kappa_fast;
    let kappa_prime = s.kappa_slow - s.k_int * slope;
    if !(kappa_prime.value > 0.0) {
        return Err(Error::ImaginaryFrequency {
            kappa_prime: kappa_prime.value,
        });
    }
    Ok(BoaJets {
        slope,
        kappa_slow_eff: kappa_prime,
        omega_slow: (kappa_prime / p.m_slow).sqrt(),
        omega_fast: (s.kappa_fast / p.m_fast).sqrt(),
    })
}

pub fn boa_frame(p: &OscillatorParams, t: f64) -> Result<BoaFrame> {
    let j = boa_jets(p, t)?;
    Ok(BoaFrame {
        slope: j.slope.value,
        kappa_slow_eff: j.kappa_slow_eff.value,
        omega_slow: j.omega_slow.value,
        omega_fast: j.omega_fast.value,
    })
}

/// `φ₀(x_T) ψ₀(x_S)` in lab coordinates.
pub fn boa_ground_state(p: &OscillatorParams, t: f64) -> Result<GaussianState2D> {
    let f = boa_frame(p, t)?;
    let hbar = p.hbar();
    let shear = Matrix2::new(1.0, 0.0, -f.slope, 1.0);
    GaussianState2D::from_modes(
        [
            C64::new(p.m_slow * f.omega_slow / hbar, 0.0),
            C64::new(p.m_fast * f.omega_fast / hbar, 0.0),
        ],
        &shear,
    )
}

/// `E₀₀ = ħ(ω_S + ω_F)/2`.
pub fn boa_energy(p: &OscillatorParams, t: f64) -> Result<f64> {
    let f = boa_frame(p, t)?;
    Ok(0.5 * p.hbar() * (f.omega_slow + f.omega_fast))
}

/// `|⟨Ψ_exact|Ψ_BOA⟩|²` for the ground states.
pub fn static_fidelity(p: &OscillatorParams, t: f64) -> Result<f64> {
    let exact = exact_ground_state(p, t)?;
    let boa = boa_ground_state(p, t)?;
    Ok(exact.fidelity(&boa).clamp(0.0, 1.0))
}

/// Berry connection and geometric tensor of the fast ground state with respect to `x_S`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricQuantities {
    pub connection: f64,
    pub metric: f64,
}

/// `(0, k_I² ω_F m_F / (2ħ κ_F²))`.
pub fn geometric_quantities(p: &OscillatorParams, t: f64) -> Result<GeometricQuantities> {
    let s = p.springs(t)?;
    let (kf, ki) = (s.kappa_fast.value, s.k_int.value);
    if !(kf > 0.0) {
        return Err(Error::invalid("kappa_F", format!("must be positive, got {kf}")));
    }
    let omega_fast = (kf / p.m_fast).sqrt();
    Ok(GeometricQuantities {
        connection: 0.0,
        metric: ki * ki * omega_fast * p.m_fast / (2.0 * p.hbar() * kf * kf),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::Gaussian1D;
    use crate::params::{RampSchedule, UnitSystem};
    use crate::quadrature::GaussLegendre2D;
    use nalgebra::SymmetricEigen;
    use proptest::prelude::*;

    fn params(ms: f64, mf: f64, ks: f64, kf: f64, ki: f64) -> OscillatorParams {
        OscillatorParams::new(ms, mf, ks, kf, ki).unwrap()
    }

    #[test]
    fn decoupled_frame() {
        let p = params(4.0, 1.0, 30.0, 100.0, 0.0);
        let f = normal_mode_frame(&p, 0.0).unwrap();
        assert_eq!(f.alpha, 0.0);
        assert!((f.kappa1 - 30.0 * 0.5).abs() < 1e-12);
        assert!((f.kappa2 - 100.0 * 2.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_equal_masses() {
        let f = normal_mode_frame(&params(1.0, 1.0, 100.0, 100.0, 50.0), 0.0).unwrap();
        assert!((f.alpha.abs() - std::f64::consts::FRAC_PI_4).abs() < 1e-14);
        let mut k = [f.kappa1, f.kappa2];
        k.sort_by(f64::total_cmp);
        assert!((k[0] - 50.0).abs() < 1e-12 && (k[1] - 150.0).abs() < 1e-12);
    }

    #[test]
    fn unequal_masses_match_numerical_eigenvalues() {
        let (ms, mf) = (1000.0, 1.0);
        let p = params(ms, mf, 100.0, 100.0, 50.0);
        let f = normal_mode_frame(&p, 0.0).unwrap();
        let r = (mf / ms).sqrt();
        let eig = SymmetricEigen::new(Matrix2::new(100.0 * r, -50.0, -50.0, 100.0 / r));
        let mut num = [eig.eigenvalues[0], eig.eigenvalues[1]];
        num.sort_by(f64::total_cmp);
        let mut ours = [f.kappa1, f.kappa2];
        ours.sort_by(f64::total_cmp);
        for (a, b) in num.iter().zip(&ours) {
            assert!((a - b).abs() < 1e-10 * b.abs());
        }
        let scale = f.kappa1.abs().max(f.kappa2.abs());
        assert!(f.diagonalization_residual(100.0, 100.0, 50.0, ms, mf) <= 1e-10 * scale);
    }

    #[test]
    fn ground_state_decoupled_is_product() {
        let p = params(2.0, 1.0, 50.0, 100.0, 0.0);
        let g = exact_ground_state(&p, 0.0).unwrap();
        let a = 2.0 * (50.0f64 / 2.0).sqrt();
        let b = 1.0 * 100.0f64.sqrt();
        assert!((g.quad[(0, 0)].re - a).abs() < 1e-12);
        assert!((g.quad[(1, 1)].re - b).abs() < 1e-12);
        assert!(g.quad[(0, 1)].norm() < 1e-12);
        assert!((g.norm_sq() - 1.0).abs() < 1e-12);
        let boa = boa_ground_state(&p, 0.0).unwrap();
        assert!((g.fidelity(&boa) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn energies() {
        let p = params(1.0, 1.0, 100.0, 100.0, 0.0);
        assert!((exact_energy(&p, 0.0, 1, 0).unwrap() - 20.0).abs() < 1e-12);
        let q = params(1.0, 1.0, 100.0, 100.0, 50.0);
        let f = normal_mode_frame(&q, 0.0).unwrap();
        let e = exact_energy(&q, 0.0, 0, 0).unwrap();
        assert!((e - 0.5 * (f.omega1 + f.omega2)).abs() < 1e-12);
    }

    #[test]
    fn boa_frame_examples() {
        let f = boa_frame(&params(1.0, 1.0, 100.0, 100.0, 0.0), 0.0).unwrap();
        assert_eq!((f.slope, f.kappa_slow_eff), (0.0, 100.0));
        let f = boa_frame(&params(1.0, 1.0, 100.0, 100.0, 50.0), 0.0).unwrap();
        assert!((f.kappa_slow_eff - 75.0).abs() < 1e-12 && (f.slope - 0.5).abs() < 1e-15);
        assert!(matches!(
            boa_frame(&params(1.0, 1.0, 100.0, 100.0, 101.0), 0.0),
            Err(Error::ImaginaryFrequency { .. })
        ));
    }

    #[test]
    fn boa_is_close_for_heavy_slow_mass() {
        let p = params(1000.0, 1.0, 100.0, 100.0, 50.0);
        let f = static_fidelity(&p, 0.0).unwrap();
        assert!(f > 0.99, "{f}");
        let equal = static_fidelity(&params(1.0, 1.0, 100.0, 100.0, 50.0), 0.0).unwrap();
        assert!(equal < f);
    }

    #[test]
    fn static_fidelity_matches_quadrature() {
        let p = params(100.0, 1.0, 100.0, 100.0, 50.0);
        let e = exact_ground_state(&p, 0.0).unwrap();
        let b = boa_ground_state(&p, 0.0).unwrap();
        let half_width = |i: usize| {
            [&e, &b]
                .iter()
                .map(|g| 8.0 * g.quad.map(|z| z.re).try_inverse().unwrap()[(i, i)].sqrt())
                .fold(0.0, f64::max)
        };
        let (lx, ly) = (half_width(0), half_width(1));
        let q = GaussLegendre2D::new(200, [-lx, lx], [-ly, ly]);
        let ov = q.integrate_complex(|x, y| e.amplitude([x, y]).conj() * b.amplitude([x, y]));
        let f = static_fidelity(&p, 0.0).unwrap();
        assert!((ov.norm_sqr() - f).abs() < 1e-8, "{} vs {f}", ov.norm_sqr());
    }

    #[test]
    fn geometric_tensor_examples() {
        let g = geometric_quantities(&params(1.0, 1.0, 100.0, 100.0, 50.0), 0.0).unwrap();
        assert_eq!(g.connection, 0.0);
        assert!((g.metric - 1.25).abs() < 1e-12);
        let g0 = geometric_quantities(&params(1.0, 1.0, 100.0, 100.0, 0.0), 0.0).unwrap();
        assert_eq!((g0.connection, g0.metric), (0.0, 0.0));
    }

    #[test]
    fn geometric_tensor_matches_finite_differences() {
        let (mf, kf, ki) = (2.0, 50.0, 10.0);
        let p = params(1.0, mf, 200.0, kf, ki);
        let expected = geometric_quantities(&p, 0.0).unwrap().metric;
        let omega = (kf / mf).sqrt();
        let phi = Gaussian1D::harmonic_ground(mf, omega, 1.0).unwrap();
        let slope = ki / kf;
        // φ₀(x_F − slope·x_S): derivative in x_S by central differences at x_S = 0
        let h = 1e-4;
        let width = (1.0 / phi.quad.re).sqrt();
        let rule = crate::quadrature::legendre_rule(400, -12.0 * width, 12.0 * width);
        let (mut dd, mut cross) = (0.0, 0.0);
        for &(x, w) in &rule {
            let f = |xs: f64| phi.amplitude(x - slope * xs).re;
            let d = (f(h) - f(-h)) / (2.0 * h);
            dd += w * d * d;
            cross += w * f(0.0) * d;
        }
        let numeric = dd - cross * cross;
        assert!((numeric - expected).abs() < 1e-6, "{numeric} vs {expected}");
        assert!(cross.abs() < 1e-8);
    }

    #[test]
    fn labels_follow_rank_through_a_ramp() {
        // a − b changes sign during this ramp; the principal branch would swap labels.
        let ramp = RampSchedule::new(50.0, 150.0, 1.0).unwrap();
        let p = OscillatorParams::new(1.0, 1.0, ramp, 100.0, 20.0).unwrap();
        let start = normal_mode_frame(&p, 0.0).unwrap();
        let mut prev = start;
        for i in 1..=200 {
            let f = normal_mode_frame(&p, i as f64 / 200.0).unwrap();
            assert!((f.kappa1 - prev.kappa1).abs() < 5.0, "jump at step {i}");
            assert!((f.alpha - prev.alpha).abs() < 0.2, "alpha jump at step {i}");
            prev = f;
        }
        assert!(start.kappa1 < start.kappa2);
        assert!(prev.kappa1 < prev.kappa2);
    }

    #[test]
    fn hbar_enters_quadratic_form() {
        let p = params(2.0, 1.0, 100.0, 100.0, 30.0);
        let q = p.with_units(UnitSystem::new(0.5).unwrap());
        let a = exact_ground_state(&p, 0.0).unwrap();
        let b = exact_ground_state(&q, 0.0).unwrap();
        assert!((b.quad[(0, 1)] - a.quad[(0, 1)] * 2.0).norm() < 1e-12);
    }

    fn valid_params() -> impl Strategy<Value = OscillatorParams> {
        (0.5..50.0f64, 0.5..5.0f64, 20.0..200.0f64, 20.0..200.0f64, -0.95..0.95f64).prop_map(
            |(ms, mf, ks, kf, frac)| {
                let ki = frac * (ks * kf).sqrt();
                OscillatorParams::new(ms, mf, ks, kf, ki).unwrap()
            },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn static_fidelity_is_a_probability(p in valid_params()) {
            let f = static_fidelity(&p, 0.0).unwrap();
            prop_assert!((0.0..=1.0).contains(&f));
        }

        #[test]
        fn rotation_diagonalizes(p in valid_params()) {
            let s = p.springs(0.0).unwrap();
            if let Ok(f) = normal_mode_frame(&p, 0.0) {
                let scale = f.kappa1.abs().max(f.kappa2.abs());
                let res = f.diagonalization_residual(s.kappa_slow.value, s.kappa_fast.value, s.k_int.value, p.m_slow, p.m_fast);
                prop_assert!(res <= 1e-10 * scale);
                prop_assert!(f.kappa1 > 0.0 && f.kappa2 > 0.0);
            }
        }
    }
}
