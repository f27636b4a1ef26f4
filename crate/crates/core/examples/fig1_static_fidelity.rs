//! Static fidelity between exact and BOA ground states, all three panels.
//!
//! `cargo run --release --example fig1_static_fidelity [OUT_DIR]`

use cbod::experiment::{emit_outputs, run_experiment, ExperimentConfig, ExperimentKind, Table};

fn main() -> cbod::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "out/fig1".into());
    for (panel, parameter) in [("a", "kappa-slow"), ("b", "kappa-fast"), ("c", "k-int")] {
        let cfg = ExperimentConfig::load(
            ExperimentKind::StaticFidelity,
            None,
            &[format!("curves.parameter=\"{parameter}\"")],
        )?;
        let table = run_experiment(&cfg, 0)?;
        let files = emit_outputs(&table, &cfg, &std::path::Path::new(&out).join(panel))?;
        let Table::Static(rows) = &table else { unreachable!() };
        println!("panel {panel} ({parameter}) -> {}", files.csv.display());
        for r in rows.iter().filter(|r| r.mass_ratio == 1.0) {
            println!("  {:<16} F(mF/mS = 1) = {:.6}", r.curve, r.fidelity);
        }
    }
    Ok(())
}
