//! Ermakov scaling factors of the two CBOD sub-systems for a kappa_S ramp,
//! and the per-mode diagnostics next to the exact Gaussian evolution.

use cbod::dynamics::{evolve_cbod, solve_ermakov};
use cbod::params::{OscillatorParams, RampSchedule};

fn main() -> cbod::Result<()> {
    let ramp = RampSchedule::new(50.0, 25.0, 1.0)?;
    let sol = solve_ermakov(|t| ramp.eval(t).map(|v| v.value).unwrap_or(f64::NAN), 50f64.sqrt(), 1.0, 10_000)?;
    println!("single oscillator, m = 1, kappa 50 -> 75 over Tf = 1");
    for i in (0..=10_000).step_by(1000) {
        println!("  t = {:<4.1} b = {:.8}  bdot = {:+.6}", sol.times[i], sol.b[i], sol.bdot[i]);
    }
    println!("  adiabatic limit (w0/w)^(1/2) = {:.8}", (50f64 / 75.0).powf(0.25));

    for tf in [1.0, 0.1] {
        let p = OscillatorParams::new(100.0, 1.0, RampSchedule::new(50.0, 25.0, tf)?, 100.0, 50.0)?;
        let r = evolve_cbod(&p, tf, cbod::dynamics::default_steps(tf))?;
        println!("coupled pair, mF/mS = 0.01, Tf = {tf}: F = {:.8} [{}]", r.fidelity, r.validity_flag());
        if let Ok(m) = &r.mode_scaling {
            println!("  mode scaling F = {:.8}", m.fidelity);
            for d in &m.modes {
                println!("  mode {}: b(Tf) = {:.6}, min b = {:.6}, residual = {:.1e}", d.mode, d.b_final, d.b_min, d.residual);
            }
        }
    }
    Ok(())
}
