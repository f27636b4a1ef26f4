//! Ermakov scaling solutions of a driven harmonic oscillator.

use crate::error::{Error, Result};
use crate::gaussian::{Gaussian1D, C64};

/// Samples of `b(t)`, `ḃ(t)` and `∫₀ᵗ dt′/b²` on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ErmakovSolution {
    pub omega0: f64,
    pub times: Vec<f64>,
    pub b: Vec<f64>,
    pub bdot: Vec<f64>,
    pub phase_integral: Vec<f64>,
}

/// Value of an [`ErmakovSolution`] at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingPoint {
    pub b: f64,
    pub bdot: f64,
    pub phase_integral: f64,
}

type State = [f64; 3];

fn rhs(omega_sq: f64, omega0_sq: f64, y: State) -> State {
    let [b, v, _] = y;
    [v, -omega_sq * b + omega0_sq / (b * b * b), 1.0 / (b * b)]
}

fn advance(y: State, k: State, h: f64) -> State {
    [y[0] + h * k[0], y[1] + h * k[1], y[2] + h * k[2]]
}

/// Classical RK4 for `b̈ + ω²(t) b = ω₀²/b³`, `b(0) = 1`, `ḃ(0) = 0`.
///
/// Takes `ω²(t)` so that transiently inverted potentials integrate; only `b ≤ 0`
/// is a fault.
pub fn solve_ermakov(
    omega_sq: impl Fn(f64) -> f64,
    omega0: f64,
    tf: f64,
    steps: usize,
) -> Result<ErmakovSolution> {
    if steps < 100 {
        return Err(Error::invalid("steps", format!("need at least 100, got {steps}")));
    }
    if !(omega0 > 0.0) {
        return Err(Error::invalid("omega0", format!("must be positive, got {omega0}")));
    }
    if !(tf > 0.0) {
        return Err(Error::invalid("Tf", format!("must be positive, got {tf}")));
    }
    let h = tf / steps as f64;
    let w0 = omega0 * omega0;
    let mut sol = ErmakovSolution {
        omega0,
        times: Vec::with_capacity(steps + 1),
        b: Vec::with_capacity(steps + 1),
        bdot: Vec::with_capacity(steps + 1),
        phase_integral: Vec::with_capacity(steps + 1),
    };
    let mut y: State = [1.0, 0.0, 0.0];
    let push = |sol: &mut ErmakovSolution, t: f64, y: State| {
        sol.times.push(t);
        sol.b.push(y[0]);
        sol.bdot.push(y[1]);
        sol.phase_integral.push(y[2]);
    };
    push(&mut sol, 0.0, y);
    for i in 0..steps {
        let t = i as f64 * h;
        let (wa, wm, wb) = (omega_sq(t), omega_sq(t + 0.5 * h), omega_sq(t + h));
        let k1 = rhs(wa, w0, y);
        let y2 = advance(y, k1, 0.5 * h);
        check(t + 0.5 * h, y2[0])?;
        let k2 = rhs(wm, w0, y2);
        let y3 = advance(y, k2, 0.5 * h);
        check(t + 0.5 * h, y3[0])?;
        let k3 = rhs(wm, w0, y3);
        let y4 = advance(y, k3, h);
        check(t + h, y4[0])?;
        let k4 = rhs(wb, w0, y4);
        for d in 0..3 {
            y[d] += h / 6.0 * (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d]);
        }
        let t_next = if i + 1 == steps { tf } else { (i + 1) as f64 * h };
        check(t_next, y[0])?;
        push(&mut sol, t_next, y);
    }
    Ok(sol)
}

fn check(t: f64, b: f64) -> Result<()> {
    if b > 0.0 && b.is_finite() {
        Ok(())
    } else {
        Err(Error::ErmakovSingularity { t, b })
    }
}

impl ErmakovSolution {
    pub fn tf(&self) -> f64 {
        *self.times.last().expect("nonempty")
    }

    pub fn final_point(&self) -> ScalingPoint {
        let i = self.times.len() - 1;
        ScalingPoint {
            b: self.b[i],
            bdot: self.bdot[i],
            phase_integral: self.phase_integral[i],
        }
    }

    pub fn min_b(&self) -> f64 {
        self.b.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Cubic Hermite interpolation between stored samples.
    pub fn at(&self, t: f64) -> Result<ScalingPoint> {
        let tf = self.tf();
        if !(t >= -1e-12 * tf && t <= tf * (1.0 + 1e-12)) {
            return Err(Error::TimeOutOfRange { t, tf });
        }
        let n = self.times.len() - 1;
        let h = tf / n as f64;
        let i = ((t / h).floor() as usize).min(n - 1);
        let s = ((t - self.times[i]) / h).clamp(0.0, 1.0);
        let (h00, h10, h01, h11) = (
            2.0 * s.powi(3) - 3.0 * s * s + 1.0,
            s.powi(3) - 2.0 * s * s + s,
            -2.0 * s.powi(3) + 3.0 * s * s,
            s.powi(3) - s * s,
        );
        let (d00, d10, d01, d11) = (
            (6.0 * s * s - 6.0 * s) / h,
            3.0 * s * s - 4.0 * s + 1.0,
            (-6.0 * s * s + 6.0 * s) / h,
            3.0 * s * s - 2.0 * s,
        );
        let (b0, b1, v0, v1) = (self.b[i], self.b[i + 1], self.bdot[i], self.bdot[i + 1]);
        let inv = |b: f64| 1.0 / (b * b);
        Ok(ScalingPoint {
            b: h00 * b0 + h10 * h * v0 + h01 * b1 + h11 * h * v1,
            bdot: d00 * b0 + d10 * v0 + d01 * b1 + d11 * v1,
            phase_integral: h00 * self.phase_integral[i]
                + h10 * h * inv(b0)
                + h01 * self.phase_integral[i + 1]
                + h11 * h * inv(b1),
        })
    }

    /// Largest `|b̈ + ω²b − ω₀²/b³| / ω₀²` with `b̈` from central differences of `ḃ`.
    pub fn residual(&self, omega_sq: impl Fn(f64) -> f64) -> f64 {
        let w0 = self.omega0 * self.omega0;
        (1..self.times.len() - 1)
            .map(|i| {
                let h = self.times[i + 1] - self.times[i - 1];
                let bdd = (self.bdot[i + 1] - self.bdot[i - 1]) / h;
                let b = self.b[i];
                (bdd + omega_sq(self.times[i]) * b - w0 / (b * b * b)).abs() / w0
            })
            .fold(0.0, f64::max)
    }
}

/// Largest `|b_N(t) − b_{2N}(t)|` over the common grid.
pub fn step_doubling_error(
    omega_sq: impl Fn(f64) -> f64 + Copy,
    omega0: f64,
    tf: f64,
    steps: usize,
) -> Result<f64> {
    let coarse = solve_ermakov(omega_sq, omega0, tf, steps)?;
    let fine = solve_ermakov(omega_sq, omega0, tf, 2 * steps)?;
    Ok(coarse
        .b
        .iter()
        .enumerate()
        .map(|(i, b)| (b - fine.b[2 * i]).abs())
        .fold(0.0, f64::max))
}

/// Evolved ground state `b^{-1/2} exp(i m ḃ x²/2ħb − iω₀τ/2) Φ(x/b; 0)`.
pub fn scaled_state(initial: &Gaussian1D, sol: &ErmakovSolution, mass: f64, hbar: f64, t: f64) -> Result<Gaussian1D> {
    let pt = sol.at(t)?;
    Ok(scaled_at(initial, pt, sol.omega0, mass, hbar))
}

pub(crate) fn scaled_at(initial: &Gaussian1D, pt: ScalingPoint, omega0: f64, mass: f64, hbar: f64) -> Gaussian1D {
    Gaussian1D {
        quad: initial.quad / (pt.b * pt.b) - C64::new(0.0, mass * pt.bdot / (hbar * pt.b)),
        log_norm: initial.log_norm - 0.5 * pt.b.ln(),
        phase: initial.phase - 0.5 * omega0 * pt.phase_integral,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_frequency_is_a_fixed_point() {
        let sol = solve_ermakov(|_| 49.0, 7.0, 2.0, 1000).unwrap();
        for (i, t) in sol.times.iter().enumerate() {
            assert!((sol.b[i] - 1.0).abs() < 1e-10);
            assert!((sol.phase_integral[i] - t).abs() < 1e-10);
        }
    }

    #[test]
    fn sudden_jump_closed_form() {
        let (w0, w1) = (4.0, 9.0);
        let sol = solve_ermakov(|_| w1 * w1, w0, 1.5, 20000).unwrap();
        for (i, &t) in sol.times.iter().enumerate() {
            let (s, c) = (w1 * t).sin_cos();
            let exact = c * c + (w0 * w0 / (w1 * w1)) * s * s;
            assert!((sol.b[i] * sol.b[i] - exact).abs() < 1e-8, "t = {t}");
        }
    }

    #[test]
    fn slow_ramp_follows_adiabatic_invariant() {
        let tf = 200.0;
        let w = |t: f64| 5.0 + 3.0 * t / tf;
        let sol = solve_ermakov(|t| w(t).powi(2), 5.0, tf, 200_000).unwrap();
        let b = sol.final_point().b;
        let adiabatic = (5.0 / w(tf)).sqrt();
        assert!((b - adiabatic).abs() < 0.01 * adiabatic, "{b} vs {adiabatic}");
    }

    #[test]
    fn residual_and_fourth_order_convergence() {
        let w = |t: f64| 36.0 + 20.0 * (2.0 * t).sin();
        let sol = solve_ermakov(w, 6.0, 1.0, 5000).unwrap();
        assert!(sol.residual(w) < 1e-6);
        let e1 = step_doubling_error(w, 6.0, 1.0, 200).unwrap();
        let e2 = step_doubling_error(w, 6.0, 1.0, 400).unwrap();
        let order = (e1 / e2).log2();
        assert!((order - 4.0).abs() < 0.3, "order {order}");
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        assert!(solve_ermakov(|_| 1.0, 1.0, 1.0, 50).is_err());
        assert!(solve_ermakov(|_| 1.0, 0.0, 1.0, 100).is_err());
        assert!(matches!(check(0.3, -0.1), Err(Error::ErmakovSingularity { .. })));
        // An inverted stretch is integrated, not rejected.
        assert!(solve_ermakov(|t| if t < 0.5 { 1.0 } else { -50.0 }, 1.0, 1.0, 1000).is_ok());
    }

    #[test]
    fn unit_scaling_only_adds_dynamical_phase() {
        let g = Gaussian1D::harmonic_ground(2.0, 3.0, 1.0).unwrap();
        let sol = solve_ermakov(|_| 9.0, 3.0, 1.0, 1000).unwrap();
        let s = scaled_state(&g, &sol, 2.0, 1.0, 0.7).unwrap();
        assert!((s.quad - g.quad).norm() < 1e-10);
        assert!((s.phase + 1.5 * 0.7).abs() < 1e-10);
    }

    #[test]
    fn interpolation_is_exact_at_samples() {
        let sol = solve_ermakov(|t| 4.0 + t, 2.0, 1.0, 100).unwrap();
        let p = sol.at(sol.times[37]).unwrap();
        assert!((p.b - sol.b[37]).abs() < 1e-14);
        assert!((p.bdot - sol.bdot[37]).abs() < 1e-12);
        assert!(sol.at(1.5).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn scaling_preserves_norm(w0 in 1.0..10.0f64, w1 in 1.0..10.0f64, frac in 0.0..1.0f64, mass in 0.1..5.0f64) {
            let g = Gaussian1D::harmonic_ground(mass, w0, 1.0).unwrap();
            let sol = solve_ermakov(|_| w1 * w1, w0, 1.0, 400).unwrap();
            let s = scaled_state(&g, &sol, mass, 1.0, frac).unwrap();
            prop_assert!((s.norm_sq() - 1.0).abs() < 1e-10);
        }
    }
}
