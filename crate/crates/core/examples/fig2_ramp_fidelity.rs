//! CBOD fidelity at Tf = 1 against mass ratio, for ramps of each spring.
//!
//! `cargo run --release --example fig2_ramp_fidelity [OUT_DIR]`

use cbod::experiment::{emit_outputs, run_experiment, ExperimentConfig, ExperimentKind, Table};

fn main() -> cbod::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "out/fig2".into());
    for target in ["kappa-slow", "kappa-fast", "k-int"] {
        let cfg = ExperimentConfig::load(ExperimentKind::RampFidelity, None, &[format!("ramp.target=\"{target}\"")])?;
        let table = run_experiment(&cfg, 0)?;
        let files = emit_outputs(&table, &cfg, &std::path::Path::new(&out).join(target))?;
        let Table::Dynamic(rows) = &table else { unreachable!() };
        let worst = rows.iter().map(|r| r.fidelity).fold(1.0, f64::min);
        let flagged = rows.iter().filter(|r| r.validity_flag != "ok").count();
        println!("{target:<11} min F = {worst:.6}, {flagged} rows flagged -> {}", files.csv.display());
    }
    Ok(())
}
