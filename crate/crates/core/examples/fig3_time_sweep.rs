//! CBOD fidelity against ramp duration at mF/mS = 0.01.
//!
//! `cargo run --release --example fig3_time_sweep [OUT_DIR]`

use cbod::experiment::{emit_outputs, run_experiment, ExperimentConfig, ExperimentKind, Table};

fn main() -> cbod::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "out/fig3".into());
    for target in ["kappa-slow", "kappa-fast", "k-int"] {
        let cfg = ExperimentConfig::load(ExperimentKind::TimeSweep, None, &[format!("ramp.target=\"{target}\"")])?;
        let table = run_experiment(&cfg, 0)?;
        emit_outputs(&table, &cfg, &std::path::Path::new(&out).join(target))?;
        let Table::Dynamic(rows) = &table else { unreachable!() };
        println!("{target}");
        for r in rows.iter().filter(|r| r.tf == 0.05 || r.tf == 1.0) {
            println!("  k1 = {:>4}  Tf = {:<5} F = {:.6}", r.k1, r.tf, r.fidelity);
        }
    }
    Ok(())
}
