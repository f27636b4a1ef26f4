//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fails.

use std::time::Instant;

use cbod::dynamics::dynamic_fidelity;
use cbod::experiment::{run_experiment, ExperimentConfig, ExperimentKind, Table};
use cbod::oracle::{
    cbod_vs_crank_nicolson, coulomb_suite, ermakov_closed_forms, grid_ground_energy, overlap_vs_quadrature,
    scaling_vs_crank_nicolson, spectral_cd, static_trends, OracleCheck,
};
use cbod::params::{OscillatorParams, RampSchedule};
use cbod::Result;

type Criterion = (&'static str, fn() -> Result<Outcome>);

struct Outcome {
    passed: bool,
    details: Vec<String>,
}

impl Outcome {
    fn from_checks(checks: Vec<OracleCheck>) -> Self {
        Self { passed: checks.iter().all(|c| c.passed), details: checks.iter().map(OracleCheck::line).collect() }
    }
}

fn dynamic_rows(kind: ExperimentKind, overrides: &[&str]) -> Result<Vec<cbod::experiment::DynamicRow>> {
    let overrides: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
    let cfg = ExperimentConfig::load(kind, None, &overrides)?;
    match run_experiment(&cfg, 0)? {
        Table::Dynamic(rows) => Ok(rows),
        _ => unreachable!(),
    }
}

/// Ramps of κ_S and κ_F, k1 = 25, Tf = 1: F ≥ 0.99 for every mF/mS ≤ 0.1.
fn ramp_regime() -> Result<Outcome> {
    let mut details = Vec::new();
    let mut passed = true;
    for target in ["kappa-slow", "kappa-fast"] {
        let t = format!("ramp.target=\"{target}\"");
        let rows = dynamic_rows(
            ExperimentKind::RampFidelity,
            &[&t, "curves.values=[25.0]", "sweep.lo=0.001", "sweep.hi=0.1", "sweep.points=17"],
        )?;
        let worst = rows.iter().map(|r| r.fidelity).fold(1.0, f64::min);
        passed &= rows.len() == 17 && worst >= 0.99;
        details.push(format!("{target}: min F = {worst:.8} over {} mass ratios in [1e-3, 0.1]", rows.len()));
    }
    Ok(Outcome { passed, details })
}

/// Time sweep at the same parameters: F ≥ 0.9 on [0.05, 1] and |F(0.05) − F(0.1)| ≤ 0.02.
fn time_regime() -> Result<Outcome> {
    let mut details = Vec::new();
    let mut passed = true;
    for (target, slow) in [("kappa-slow", true), ("kappa-fast", false)] {
        let t = format!("ramp.target=\"{target}\"");
        let rows = dynamic_rows(ExperimentKind::TimeSweep, &[&t, "curves.values=[25.0]"])?;
        let worst = rows.iter().map(|r| r.fidelity).fold(1.0, f64::min);
        let ratio = rows[0].mass_ratio;
        let at = |tf: f64| -> Result<f64> {
            let ramp = RampSchedule::new(50.0, 25.0, tf)?;
            let p = if slow {
                OscillatorParams::new(1.0 / ratio, 1.0, ramp, 100.0, 50.0)?
            } else {
                OscillatorParams::new(1.0 / ratio, 1.0, 100.0, ramp, 50.0)?
            };
            dynamic_fidelity(&p, tf)
        };
        let plateau = (at(0.05)? - at(0.1)?).abs();
        let covers = rows.first().map(|r| r.tf) == Some(0.05) && rows.last().map(|r| r.tf) == Some(1.0);
        passed &= covers && worst >= 0.9 && plateau <= 0.02;
        details.push(format!(
            "{target}: min F = {worst:.8} over {} Tf in [0.05, 1], |F(0.05) - F(0.1)| = {plateau:.2e}",
            rows.len()
        ));
    }
    Ok(Outcome { passed, details })
}

/// Static trends, plus the control curve of the static-fidelity experiment.
fn static_regime() -> Result<Outcome> {
    let mut out = Outcome::from_checks(static_trends()?);
    let cfg = ExperimentConfig::load(ExperimentKind::StaticFidelity, None, &[])?;
    let Table::Static(rows) = run_experiment(&cfg, 0)? else { unreachable!() };
    let control = rows.iter().filter(|r| r.curve == "control").map(|r| (r.fidelity - 1.0).abs()).fold(0.0, f64::max);
    out.passed &= control <= 1e-12;
    out.details.push(format!("static-fidelity control curve: max |F - 1| = {control:e}"));
    Ok(out)
}

fn static_oracles() -> Result<Outcome> {
    Ok(Outcome::from_checks(vec![overlap_vs_quadrature()?, grid_ground_energy(128)?]))
}

fn cd_oracles() -> Result<Outcome> {
    Ok(Outcome::from_checks(spectral_cd()?))
}

fn dynamics_oracles() -> Result<Outcome> {
    let mut checks = ermakov_closed_forms()?;
    checks.push(scaling_vs_crank_nicolson(20_000)?);
    checks.extend(cbod_vs_crank_nicolson(128, 20_000)?);
    Ok(Outcome::from_checks(checks))
}

fn coulomb_oracles() -> Result<Outcome> {
    Ok(Outcome::from_checks(coulomb_suite()?))
}

/// Every experiment, run twice from the same resolved config with different
/// thread counts, gives byte-identical CSV.
fn determinism() -> Result<Outcome> {
    let mut details = Vec::new();
    let mut passed = true;
    let kinds = [
        (ExperimentKind::StaticFidelity, vec![]),
        (ExperimentKind::RampFidelity, vec!["sweep.points=6".to_string()]),
        (ExperimentKind::TimeSweep, vec!["sweep.points=6".to_string()]),
        (ExperimentKind::CoulombReport, vec![]),
        (ExperimentKind::OracleCheck, vec!["oracle.dynamics_2d=false".to_string()]),
    ];
    let dir = tempfile::tempdir().map_err(cbod::Error::from)?;
    for (kind, overrides) in kinds {
        let cfg = ExperimentConfig::load(kind, None, &overrides)?;
        let first = run_experiment(&cfg, 4)?.to_csv()?;
        let path = dir.path().join(format!("{kind}.toml"));
        std::fs::write(&path, cfg.to_toml()?)?;
        let reloaded = ExperimentConfig::load(kind, Some(&path), &[])?;
        let second = run_experiment(&reloaded, 1)?.to_csv()?;
        let same = reloaded == cfg && first == second;
        passed &= same;
        details.push(format!("{kind}: {} bytes, identical = {same}", first.len()));
    }
    Ok(Outcome { passed, details })
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 ramp fidelity >= 0.99 for mF/mS <= 0.1", ramp_regime),
        ("2 time sweep F >= 0.9 with small-Tf plateau", time_regime),
        ("3 static fidelity trends", static_regime),
        ("4 static oracles: overlap quadrature and 2D grid energy", static_oracles),
        ("5 CD oracle: spectral vs analytic squeeze", cd_oracles),
        ("6 dynamics oracles: Ermakov, 1D and 2D Crank-Nicolson", dynamics_oracles),
        ("7 Coulomb suite", coulomb_oracles),
        ("8 determinism of CSV output", determinism),
    ];
    let mut failures = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = run().unwrap_or_else(|e| Outcome { passed: false, details: vec![format!("error: {e}")] });
        println!("{} criterion {name} ({:.1} s)", if outcome.passed { "PASS" } else { "FAIL" }, start.elapsed().as_secs_f64());
        for d in &outcome.details {
            println!("    {d}");
        }
        failures += usize::from(!outcome.passed);
    }
    println!("{} of 8 acceptance criteria passed", 8 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
