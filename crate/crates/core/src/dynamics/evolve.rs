//! Evolution of the coupled pair under CBOD driving.

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use super::ermakov::{scaled_at, solve_ermakov, ErmakovSolution};
use crate::cd::{absorbed_slow_spring, cbod_cd, cbod_effective_springs};
use crate::error::{Error, Result};
use crate::gaussian::{Gaussian1D, GaussianState2D, C64};
use crate::jet::Jet;
use crate::oscillators::{exact_ground_state, mode_springs, to_modes, ModeLabels};
use crate::params::OscillatorParams;

/// Steps per unit of ramp time used when the caller does not fix a count.
pub const STEPS_PER_UNIT_TIME: f64 = 1e4;
pub const MIN_STEPS: usize = 2000;
const MAX_DOUBLINGS: usize = 4;
const GAUSSIAN_STEP_TOL: f64 = 1e-10;
const ERMAKOV_RESIDUAL_TOL: f64 = 1e-6;
const VALIDITY_SAMPLES: usize = 401;

pub fn default_steps(tf: f64) -> usize {
    ((STEPS_PER_UNIT_TIME * tf).ceil() as usize).max(MIN_STEPS)
}

/// Quadratic Hamiltonian `½pᵀM⁻¹p + ½xᵀKx + Σⱼ sⱼ{xⱼ, pⱼ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticHamiltonian {
    pub springs: Matrix2<f64>,
    pub squeeze: [f64; 2],
}

/// Which of the two unitarily equivalent CBOD Hamiltonians to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CbodPicture {
    /// Modified springs `γ_S`, `γ_F` with the bare coupling.
    Transformed,
    /// Original springs (slow one corrected) plus `{x_S,p_S}` and `{x_F,p_F}` terms.
    Driven,
}

pub fn cbod_hamiltonian(p: &OscillatorParams, t: f64, picture: CbodPicture) -> Result<QuadraticHamiltonian> {
    match picture {
        CbodPicture::Transformed => {
            let e = cbod_effective_springs(p, t)?;
            Ok(QuadraticHamiltonian {
                springs: Matrix2::new(e.gamma_slow, -e.k_int, -e.k_int, e.gamma_fast),
                squeeze: [0.0, 0.0],
            })
        }
        CbodPicture::Driven => {
            let s = p.springs(t)?;
            let (slow, fast) = cbod_cd(p, t)?;
            let ki = s.k_int.value;
            Ok(QuadraticHamiltonian {
                springs: Matrix2::new(absorbed_slow_spring(p, t)?, -ki, -ki, s.kappa_fast.value),
                squeeze: [slow.coeff, fast.coeff],
            })
        }
    }
}

/// Exact propagation of `exp(−½xᵀAx + c)` under a quadratic Hamiltonian:
/// `Ȧ = −iħ A M⁻¹ A + (i/ħ)K − 2(SA + AS)`, `ċ = −(iħ/2) tr(M⁻¹A) − tr S`.
pub fn propagate_gaussian(
    initial: &GaussianState2D,
    masses: [f64; 2],
    hbar: f64,
    tf: f64,
    steps: usize,
    hamiltonian: impl Fn(f64) -> Result<QuadraticHamiltonian>,
) -> Result<GaussianState2D> {
    if steps == 0 {
        return Err(Error::invalid("steps", "must be positive"));
    }
    let minv = Matrix2::new(1.0 / masses[0], 0.0, 0.0, 1.0 / masses[1]).map(|x| C64::new(x, 0.0));
    let i = C64::new(0.0, 1.0);
    let re = |x: f64| C64::new(x, 0.0);
    let rhs = |t: f64, a: &Matrix2<C64>| -> Result<(Matrix2<C64>, C64)> {
        let q = hamiltonian(t)?;
        let k = q.springs.map(|x| C64::new(x, 0.0));
        let s = Matrix2::new(q.squeeze[0], 0.0, 0.0, q.squeeze[1]).map(|x| C64::new(x, 0.0));
        let da = a * minv * a * (-i * hbar) + k * (i / hbar) - (s * a + a * s) * re(2.0);
        let dc = -(i * (0.5 * hbar)) * (minv * a).trace() - C64::new(q.squeeze[0] + q.squeeze[1], 0.0);
        Ok((da, dc))
    };
    let h = tf / steps as f64;
    let mut a = initial.quad;
    let mut c = C64::new(initial.log_norm, initial.phase);
    for n in 0..steps {
        let t = n as f64 * h;
        let (k1, c1) = rhs(t, &a)?;
        let (k2, c2) = rhs(t + 0.5 * h, &(a + k1 * re(0.5 * h)))?;
        let (k3, c3) = rhs(t + 0.5 * h, &(a + k2 * re(0.5 * h)))?;
        let (k4, c4) = rhs(t + h, &(a + k3 * re(h)))?;
        a += (k1 + k2 * re(2.0) + k3 * re(2.0) + k4) * re(h / 6.0);
        c += (c1 + c2 * 2.0 + c3 * 2.0 + c4) * (h / 6.0);
        a = (a + a.transpose()) * re(0.5);
    }
    Ok(GaussianState2D {
        quad: a,
        log_norm: c.re,
        phase: c.im,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvolutionMethod {
    /// Exact Gaussian propagation of the CBOD Hamiltonian.
    Gaussian,
    /// Independent Ermakov scaling of each instantaneous normal mode.
    ModeScaling,
}

impl std::fmt::Display for EvolutionMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EvolutionMethod::Gaussian => "gaussian",
            EvolutionMethod::ModeScaling => "mode-scaling",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionSettings {
    pub method: EvolutionMethod,
    /// Fixed step count; `None` uses [`default_steps`].
    pub steps: Option<usize>,
    /// Treat an imaginary γ-mode frequency as an error instead of a flag.
    pub strict: bool,
}

impl Default for EvolutionSettings {
    fn default() -> Self {
        Self {
            method: EvolutionMethod::Gaussian,
            steps: None,
            strict: false,
        }
    }
}

/// Ermakov summary for one γ normal mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeDiagnostics {
    pub mode: usize,
    pub omega0: f64,
    pub b_final: f64,
    pub bdot_final: f64,
    pub b_min: f64,
    pub min_omega_sq: f64,
    pub residual: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeScaling {
    pub state: GaussianState2D,
    pub fidelity: f64,
    pub modes: [ModeDiagnostics; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionResult {
    pub final_state: GaussianState2D,
    pub fidelity: f64,
    pub method: EvolutionMethod,
    pub steps: usize,
    /// Change in fidelity between the final and the previous step count.
    pub step_error: f64,
    /// γ-Hamiltonian kept real normal-mode frequencies on the sampled times.
    pub gamma_real_frequency: bool,
    /// Per-mode scaling route, or why it failed.
    pub mode_scaling: std::result::Result<ModeScaling, Error>,
}

impl EvolutionResult {
    pub fn ermakov_residual(&self) -> f64 {
        match &self.mode_scaling {
            Ok(m) => m.modes.iter().map(|d| d.residual).fold(0.0, f64::max),
            Err(_) => f64::NAN,
        }
    }

    pub fn validity_flag(&self) -> &'static str {
        match (&self.mode_scaling, self.gamma_real_frequency) {
            (Err(Error::ErmakovSingularity { .. }), _) => "ermakov-singular",
            (_, false) => "gamma-imaginary",
            (Err(_), true) => "mode-scaling-failed",
            (Ok(_), true) => "ok",
        }
    }
}

fn check_duration(p: &OscillatorParams, tf: f64) -> Result<()> {
    if !(tf > 0.0 && tf.is_finite()) {
        return Err(Error::invalid("Tf", format!("must be positive, got {tf}")));
    }
    if let Some(d) = p.duration() {
        if (d - tf).abs() > 1e-12 * tf {
            return Err(Error::invalid("Tf", format!("evolution time {tf} differs from ramp duration {d}")));
        }
    }
    Ok(())
}

fn gamma_validity(p: &OscillatorParams, tf: f64) -> Result<bool> {
    for i in 0..VALIDITY_SAMPLES {
        let t = tf * i as f64 / (VALIDITY_SAMPLES - 1) as f64;
        if !cbod_effective_springs(p, t)?.real_frequency {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Squared γ normal-mode frequencies `κᵢ^γ(t)/μ`, labelled as the modes of `H₀(0)`.
fn gamma_mode_frequencies(p: &OscillatorParams, labels: ModeLabels, t: f64) -> Result<(f64, f64, f64)> {
    let e = cbod_effective_springs(p, t)?;
    let ratio = (p.m_fast / p.m_slow).sqrt();
    let m = mode_springs(
        Jet::constant(e.gamma_slow * ratio),
        Jet::constant(e.gamma_fast / ratio),
        Jet::constant(e.k_int),
        labels,
    );
    let mu = (p.m_slow * p.m_fast).sqrt();
    Ok((m.kappa1.value / mu, m.kappa2.value / mu, m.alpha))
}

fn sample<T: Copy>(p: &OscillatorParams, tf: f64, steps: usize, f: impl Fn(f64) -> Result<T>) -> Result<Vec<T>> {
    let _ = p;
    // Ermakov RK4 needs values at whole and half steps.
    (0..=2 * steps).map(|k| f(tf * k as f64 / (2 * steps) as f64)).collect()
}

fn mode_scaling_once(p: &OscillatorParams, tf: f64, steps: usize) -> Result<ModeScaling> {
    let labels = ModeLabels::for_params(p)?;
    let table = sample(p, tf, steps, |t| gamma_mode_frequencies(p, labels, t))?;
    let h = tf / (2 * steps) as f64;
    let lookup = |which: usize| {
        let table = &table;
        move |t: f64| {
            let k = ((t / h).round() as usize).min(table.len() - 1);
            if which == 0 {
                table[k].0
            } else {
                table[k].1
            }
        }
    };
    let hbar = p.hbar();
    let mu = (p.m_slow * p.m_fast).sqrt();
    let scale = (p.m_slow / p.m_fast).powf(0.25);
    let mut modes = Vec::with_capacity(2);
    let mut quads = [C64::new(0.0, 0.0); 2];
    for (which, quad) in quads.iter_mut().enumerate() {
        let w2 = lookup(which);
        let w0_sq = w2(0.0);
        if !(w0_sq > 0.0) {
            return Err(Error::RealFrequencyViolation {
                t: 0.0,
                reason: format!("mode {} has omega^2 = {w0_sq}", which + 1),
            });
        }
        let omega0 = w0_sq.sqrt();
        let sol: ErmakovSolution = solve_ermakov(w2, omega0, tf, steps)?;
        let ground = Gaussian1D::harmonic_ground(mu, omega0, hbar)?;
        let evolved = scaled_at(&ground, sol.final_point(), omega0, mu, hbar);
        *quad = evolved.quad;
        modes.push(ModeDiagnostics {
            mode: which + 1,
            omega0,
            b_final: sol.final_point().b,
            bdot_final: sol.final_point().bdot,
            b_min: sol.min_b(),
            min_omega_sq: table.iter().map(|r| if which == 0 { r.0 } else { r.1 }).fold(f64::INFINITY, f64::min),
            residual: sol.residual(w2),
            steps,
        });
    }
    let alpha_final = table.last().expect("nonempty").2;
    let state = GaussianState2D::from_modes(quads, &to_modes(alpha_final, scale))?;
    let target = exact_ground_state(p, tf)?;
    Ok(ModeScaling {
        fidelity: target.fidelity(&state).clamp(0.0, 1.0),
        state,
        modes: [modes[0], modes[1]],
    })
}

/// Per-mode Ermakov route; doubles the step count while the residual exceeds `1e-6·ω₀²`.
pub fn evolve_mode_scaling(p: &OscillatorParams, tf: f64, steps: usize) -> Result<ModeScaling> {
    check_duration(p, tf)?;
    let mut steps = steps.max(100);
    let mut out = mode_scaling_once(p, tf, steps)?;
    for _ in 0..MAX_DOUBLINGS {
        if out.modes.iter().all(|m| m.residual <= ERMAKOV_RESIDUAL_TOL) {
            break;
        }
        steps *= 2;
        out = mode_scaling_once(p, tf, steps)?;
    }
    Ok(out)
}

fn gaussian_once(p: &OscillatorParams, tf: f64, steps: usize) -> Result<(GaussianState2D, f64)> {
    let initial = exact_ground_state(p, 0.0)?;
    let state = propagate_gaussian(&initial, [p.m_slow, p.m_fast], p.hbar(), tf, steps, |t| {
        cbod_hamiltonian(p, t, CbodPicture::Transformed)
    })?;
    let target = exact_ground_state(p, tf)?;
    if !state.is_normalizable() {
        return Err(Error::invalid("evolution", "propagated Gaussian lost normalizability"));
    }
    Ok((state, target.fidelity(&state).clamp(0.0, 1.0)))
}

/// Evolves the ground state of `H₀(0)` under CBOD driving for the ramp duration `tf`.
pub fn evolve_cbod_with(p: &OscillatorParams, tf: f64, settings: &EvolutionSettings) -> Result<EvolutionResult> {
    check_duration(p, tf)?;
    p.ensure_valid(tf, VALIDITY_SAMPLES)?;
    let gamma_ok = gamma_validity(p, tf)?;
    if settings.strict && !gamma_ok {
        return Err(Error::RealFrequencyViolation {
            t: f64::NAN,
            reason: "CBOD effective springs give an imaginary normal-mode frequency".into(),
        });
    }
    let base = settings.steps.unwrap_or_else(|| default_steps(tf));
    let mode_scaling = evolve_mode_scaling(p, tf, base);
    if settings.strict {
        if let Err(e) = &mode_scaling {
            return Err(e.clone());
        }
    }
    match settings.method {
        EvolutionMethod::Gaussian => {
            let mut steps = base;
            let (mut state, mut fidelity) = gaussian_once(p, tf, steps)?;
            let (_, mut previous) = gaussian_once(p, tf, (steps / 2).max(1))?;
            for _ in 0..MAX_DOUBLINGS {
                if (fidelity - previous).abs() <= GAUSSIAN_STEP_TOL {
                    break;
                }
                previous = fidelity;
                steps *= 2;
                (state, fidelity) = gaussian_once(p, tf, steps)?;
            }
            Ok(EvolutionResult {
                final_state: state,
                fidelity,
                method: EvolutionMethod::Gaussian,
                steps,
                step_error: (fidelity - previous).abs(),
                gamma_real_frequency: gamma_ok,
                mode_scaling,
            })
        }
        EvolutionMethod::ModeScaling => {
            let m = mode_scaling.clone()?;
            Ok(EvolutionResult {
                final_state: m.state,
                fidelity: m.fidelity,
                method: EvolutionMethod::ModeScaling,
                steps: m.modes[0].steps,
                step_error: m.modes.iter().map(|d| d.residual).fold(0.0, f64::max),
                gamma_real_frequency: gamma_ok,
                mode_scaling,
            })
        }
    }
}

pub fn evolve_cbod(p: &OscillatorParams, tf: f64, steps: usize) -> Result<EvolutionResult> {
    evolve_cbod_with(
        p,
        tf,
        &EvolutionSettings {
            steps: Some(steps),
            ..EvolutionSettings::default()
        },
    )
}

/// `|⟨Ψ_exact(T_f)|Ψ_CBOD(T_f)⟩|²`, with `Ψ_exact(T_f)` the ground state of `H₀(T_f)`.
pub fn dynamic_fidelity(p: &OscillatorParams, tf: f64) -> Result<f64> {
    Ok(evolve_cbod_with(p, tf, &EvolutionSettings::default())?.fidelity)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{RampSchedule, Spring};

    fn fig2(target: &str, ratio: f64, k1: f64, tf: f64) -> OscillatorParams {
        let ramp: Spring = RampSchedule::new(50.0, k1, tf).unwrap().into();
        let (ks, kf) = match target {
            "slow" => (ramp, Spring::Constant(100.0)),
            _ => (Spring::Constant(100.0), ramp),
        };
        OscillatorParams::new(1.0 / ratio, 1.0, ks, kf, 50.0).unwrap()
    }

    #[test]
    fn no_ramp_keeps_the_ground_state() {
        let p = fig2("slow", 0.1, 0.0, 1.0);
        let r = evolve_cbod(&p, 1.0, 2000).unwrap();
        assert!((r.fidelity - 1.0).abs() < 1e-10);
        let m = r.mode_scaling.as_ref().unwrap();
        assert!((m.fidelity - 1.0).abs() < 1e-10);
        assert_eq!(r.validity_flag(), "ok");
    }

    #[test]
    fn both_pictures_agree_at_the_endpoints() {
        let p = fig2("fast", 0.1, 25.0, 0.2);
        let g0 = exact_ground_state(&p, 0.0).unwrap();
        let run = |pic| propagate_gaussian(&g0, [10.0, 1.0], 1.0, 0.2, 4000, |t| cbod_hamiltonian(&p, t, pic)).unwrap();
        let a = run(CbodPicture::Transformed);
        let b = run(CbodPicture::Driven);
        assert!((a.fidelity(&b) - 1.0).abs() < 1e-10);
        assert!((a.quad - b.quad).norm() < 1e-8);
    }

    #[test]
    fn static_gaussian_propagation_is_stationary() {
        let p = OscillatorParams::new(3.0, 1.0, 80.0, 100.0, 30.0).unwrap();
        let g0 = exact_ground_state(&p, 0.0).unwrap();
        let out = propagate_gaussian(&g0, [3.0, 1.0], 1.0, 0.7, 2000, |t| cbod_hamiltonian(&p, t, CbodPicture::Driven)).unwrap();
        assert!((out.quad - g0.quad).norm() < 1e-10);
        assert!((out.norm_sq() - 1.0).abs() < 1e-10);
        let e = crate::oscillators::exact_energy(&p, 0.0, 0, 0).unwrap();
        assert!((out.phase + e * 0.7).abs() < 1e-8);
    }

    #[test]
    fn moderate_ramps_keep_high_fidelity() {
        for target in ["slow", "fast"] {
            for ratio in [1e-3, 1e-2, 1e-1] {
                let f = dynamic_fidelity(&fig2(target, ratio, 25.0, 1.0), 1.0).unwrap();
                assert!(f >= 0.99, "{target} {ratio}: {f}");
            }
        }
    }

    #[test]
    fn duration_mismatch_is_rejected() {
        let p = fig2("slow", 0.1, 25.0, 1.0);
        assert!(evolve_cbod(&p, 0.5, 2000).is_err());
    }
}
