//! Physical parameters, the smooth ramp protocol and validity checks.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet;

/// Relative slack allowed when a time sits a rounding error outside `[0, Tf]`.
const TIME_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitSystem {
    pub hbar: f64,
}

impl UnitSystem {
    pub fn new(hbar: f64) -> Result<Self> {
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::invalid("hbar", format!("must be positive, got {hbar}")));
        }
        Ok(Self { hbar })
    }
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self { hbar: 1.0 }
    }
}

/// `K(t) = k0 + (k1/Tf) [t - (Tf/2π) sin(2πt/Tf)]`.
///
/// First and second derivatives vanish at both ends of the window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RampSchedule {
    pub k0: f64,
    pub k1: f64,
    pub tf: f64,
}

/// Value and first two time derivatives of a ramp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RampValue {
    pub value: f64,
    pub rate: f64,
    pub accel: f64,
}

impl RampSchedule {
    pub fn new(k0: f64, k1: f64, tf: f64) -> Result<Self> {
        if !(tf > 0.0 && tf.is_finite()) {
            return Err(Error::invalid("Tf", format!("must be positive, got {tf}")));
        }
        if !k0.is_finite() || !k1.is_finite() {
            return Err(Error::invalid("ramp", "k0 and k1 must be finite"));
        }
        Ok(Self { k0, k1, tf })
    }

    fn clamp_time(&self, t: f64) -> Result<f64> {
        let slack = TIME_SLACK * self.tf;
        if !(t >= -slack && t <= self.tf + slack) {
            return Err(Error::TimeOutOfRange { t, tf: self.tf });
        }
        Ok(t.clamp(0.0, self.tf))
    }

    pub fn eval(&self, t: f64) -> Result<RampValue> {
        let t = self.clamp_time(t)?;
        let w = TAU / self.tf;
        let rate0 = self.k1 / self.tf;
        let (s, c) = (w * t).sin_cos();
        Ok(RampValue {
            value: self.k0 + rate0 * (t - s / w),
            rate: rate0 * (1.0 - c),
            accel: rate0 * w * s,
        })
    }

    pub fn jet(&self, t: f64) -> Result<Jet> {
        let v = self.eval(t)?;
        Ok(Jet::new(v.value, v.rate, v.accel))
    }
}

/// A spring constant that is either fixed or follows a [`RampSchedule`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Spring {
    Constant(f64),
    Ramp(RampSchedule),
}

impl Spring {
    pub fn jet(&self, t: f64) -> Result<Jet> {
        match self {
            Spring::Constant(k) => Ok(Jet::constant(*k)),
            Spring::Ramp(r) => r.jet(t),
        }
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        self.jet(t).map(|j| j.value)
    }

    pub fn duration(&self) -> Option<f64> {
        match self {
            Spring::Constant(_) => None,
            Spring::Ramp(r) => Some(r.tf),
        }
    }
}

impl From<f64> for Spring {
    fn from(k: f64) -> Self {
        Spring::Constant(k)
    }
}

impl From<RampSchedule> for Spring {
    fn from(r: RampSchedule) -> Self {
        Spring::Ramp(r)
    }
}

/// Springs of the coupled pair evaluated at one instant, with time derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpringJets {
    pub kappa_slow: Jet,
    pub kappa_fast: Jet,
    pub k_int: Jet,
}

/// `H = p_S²/2m_S + p_F²/2m_F + ½κ_S x_S² + ½κ_F x_F² − k_I x_S x_F`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorParams {
    pub m_slow: f64,
    pub m_fast: f64,
    pub kappa_slow: Spring,
    pub kappa_fast: Spring,
    pub k_int: Spring,
    pub units: UnitSystem,
}

impl OscillatorParams {
    pub fn new(
        m_slow: f64,
        m_fast: f64,
        kappa_slow: impl Into<Spring>,
        kappa_fast: impl Into<Spring>,
        k_int: impl Into<Spring>,
    ) -> Result<Self> {
        if !(m_slow > 0.0 && m_slow.is_finite()) {
            return Err(Error::invalid("m_slow", format!("must be positive, got {m_slow}")));
        }
        if !(m_fast > 0.0 && m_fast.is_finite()) {
            return Err(Error::invalid("m_fast", format!("must be positive, got {m_fast}")));
        }
        Ok(Self {
            m_slow,
            m_fast,
            kappa_slow: kappa_slow.into(),
            kappa_fast: kappa_fast.into(),
            k_int: k_int.into(),
            units: UnitSystem::default(),
        })
    }

    pub fn with_units(mut self, units: UnitSystem) -> Self {
        self.units = units;
        self
    }

    pub fn hbar(&self) -> f64 {
        self.units.hbar
    }

    pub fn mass_ratio(&self) -> f64 {
        self.m_fast / self.m_slow
    }

    /// Longest ramp duration among the three springs, if any spring is ramped.
    pub fn duration(&self) -> Option<f64> {
        [self.kappa_slow, self.kappa_fast, self.k_int]
            .iter()
            .filter_map(Spring::duration)
            .reduce(f64::max)
    }

    pub fn springs(&self, t: f64) -> Result<SpringJets> {
        Ok(SpringJets {
            kappa_slow: self.kappa_slow.jet(t)?,
            kappa_fast: self.kappa_fast.jet(t)?,
            k_int: self.k_int.jet(t)?,
        })
    }

    /// Checks the real-frequency conditions on `samples` evenly spaced times in `[0, tf]`.
    pub fn validate(&self, tf: f64, samples: usize) -> ValidationReport {
        let samples = samples.max(2);
        for i in 0..samples {
            let t = tf * i as f64 / (samples - 1) as f64;
            if let Some(v) = self.violation_at(t) {
                return ValidationReport::Violation(v);
            }
        }
        ValidationReport::Ok
    }

    fn violation_at(&self, t: f64) -> Option<Violation> {
        let s = match self.springs(t) {
            Ok(s) => s,
            Err(e) => {
                return Some(Violation {
                    t,
                    kind: ViolationKind::Evaluation(e.to_string()),
                })
            }
        };
        let (ks, kf, ki) = (s.kappa_slow.value, s.kappa_fast.value, s.k_int.value);
        if !(ks * kf > ki * ki) {
            return Some(Violation {
                t,
                kind: ViolationKind::CouplingTooStrong {
                    product: ks * kf,
                    coupling_sq: ki * ki,
                },
            });
        }
        let kappa_prime = ks - ki * ki / kf;
        if !(kf > 0.0 && kappa_prime > 0.0) {
            return Some(Violation {
                t,
                kind: ViolationKind::NonPositiveSlowSpring { kappa_prime },
            });
        }
        None
    }

    /// Like [`validate`](Self::validate) but as a `Result`, for callers that treat
    /// a violation as fatal.
    pub fn ensure_valid(&self, tf: f64, samples: usize) -> Result<()> {
        match self.validate(tf, samples) {
            ValidationReport::Ok => Ok(()),
            ValidationReport::Violation(v) => Err(Error::RealFrequencyViolation {
                t: v.t,
                reason: v.kind.to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ValidationReport {
    Ok,
    Violation(Violation),
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        matches!(self, ValidationReport::Ok)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub t: f64,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ViolationKind {
    CouplingTooStrong { product: f64, coupling_sq: f64 },
    NonPositiveSlowSpring { kappa_prime: f64 },
    Evaluation(String),
}

impl std::fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ViolationKind::CouplingTooStrong {
                product,
                coupling_sq,
            } => write!(f, "kappa_S*kappa_F = {product} <= k_I^2 = {coupling_sq}"),
            ViolationKind::NonPositiveSlowSpring { kappa_prime } => {
                write!(f, "kappa'_S = {kappa_prime} <= 0")
            }
            ViolationKind::Evaluation(e) => f.write_str(e),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ramp() -> RampSchedule {
        RampSchedule::new(50.0, 25.0, 1.0).unwrap()
    }

    #[test]
    fn ramp_endpoints_and_midpoint() {
        let r = ramp();
        let v0 = r.eval(0.0).unwrap();
        assert_eq!((v0.value, v0.rate, v0.accel), (50.0, 0.0, 0.0));

        let mid = r.eval(0.5).unwrap();
        assert!((mid.value - 62.5).abs() < 1e-12);
        assert!((mid.rate - 50.0).abs() < 1e-12);
        assert!(mid.accel.abs() < 1e-12);

        let end = r.eval(1.0).unwrap();
        assert!((end.value - 75.0).abs() < 1e-12);
        assert!(end.rate.abs() < 1e-12);
        assert!(end.accel.abs() < 1e-12);
    }

    #[test]
    fn ramp_rejects_times_outside_window() {
        let r = ramp();
        assert!(matches!(r.eval(-0.1), Err(Error::TimeOutOfRange { .. })));
        assert!(matches!(r.eval(1.5), Err(Error::TimeOutOfRange { .. })));
        assert!(r.eval(1.0 + 1e-15).is_ok());
        assert!(RampSchedule::new(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn validate_examples() {
        let ok = OscillatorParams::new(1.0, 1.0, 100.0, 100.0, 50.0).unwrap();
        assert!(ok.validate(1.0, 11).is_ok());

        let decoupled = OscillatorParams::new(1.0, 1.0, 100.0, 100.0, 0.0).unwrap();
        assert!(decoupled.validate(1.0, 11).is_ok());

        let strong = OscillatorParams::new(
            1.0,
            1.0,
            100.0,
            100.0,
            RampSchedule::new(50.0, 51.0, 1.0).unwrap(),
        )
        .unwrap();
        match strong.validate(1.0, 101) {
            ValidationReport::Violation(v) => {
                // K(t) first exceeds 100 between t = 0.85 and 0.86.
                assert!(v.t > 0.85 && v.t <= 0.87, "violation reported at {}", v.t);
                assert!(matches!(v.kind, ViolationKind::CouplingTooStrong { .. }));
            }
            ValidationReport::Ok => panic!("expected a violation"),
        }
        assert!(strong.ensure_valid(1.0, 101).is_err());
    }

    #[test]
    fn masses_must_be_positive() {
        assert!(OscillatorParams::new(0.0, 1.0, 1.0, 1.0, 0.0).is_err());
        assert!(OscillatorParams::new(1.0, -1.0, 1.0, 1.0, 0.0).is_err());
        assert!(UnitSystem::new(0.0).is_err());
    }

    proptest! {
        #[test]
        fn ramp_derivatives_match_central_differences(
            k0 in -100.0..100.0f64,
            k1 in 1.0..100.0f64,
            negative in any::<bool>(),
            tf in 0.05..5.0f64,
            frac in 0.01..0.99f64,
        ) {
            let k1 = if negative { -k1 } else { k1 };
            let r = RampSchedule::new(k0, k1, tf).unwrap();
            let t = frac * tf;
            let h = 1e-5 * tf;
            let v = r.eval(t).unwrap();
            let f = |t: f64| r.eval(t).unwrap();
            let rate_fd = (f(t + h).value - f(t - h).value) / (2.0 * h);
            let accel_fd = (f(t + h).rate - f(t - h).rate) / (2.0 * h);
            let scale_rate = (k1 / tf).abs().max(1e-12);
            let scale_accel = (k1 / tf * TAU / tf).abs().max(1e-12);
            prop_assert!((v.rate - rate_fd).abs() <= 1e-6 * scale_rate);
            prop_assert!((v.accel - accel_fd).abs() <= 1e-6 * scale_accel);
        }

        #[test]
        fn ramp_is_monotone_for_nonnegative_strength(
            k1 in 0.0..100.0f64,
            tf in 0.05..5.0f64,
            a in 0.0..1.0f64,
            b in 0.0..1.0f64,
        ) {
            let r = RampSchedule::new(10.0, k1, tf).unwrap();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let vlo = r.eval(lo * tf).unwrap().value;
            let vhi = r.eval(hi * tf).unwrap().value;
            prop_assert!(vhi >= vlo - 1e-12 * (1.0 + vlo.abs()));
            prop_assert!(r.eval(lo * tf).unwrap().rate >= 0.0);
        }
    }
}
