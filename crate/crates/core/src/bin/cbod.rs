use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use cbod::experiment::{emit_outputs, run_experiment, ExperimentConfig, ExperimentKind, Table};
use cbod::Error;

/// Run a CBOD experiment and write its CSV table, SVG plot and resolved config.
#[derive(Parser, Debug)]
#[command(name = "cbod", version)]
struct Cli {
    experiment: ExperimentKind,

    /// TOML config; omitted keys take the experiment's defaults.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Override one setting by dotted path, e.g. `--set sweep.points=10`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,

    /// Output directory (overrides `output_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Io(_) | Error::InvalidParameter { .. } | Error::InvalidQuantumNumbers { .. } => 1,
        _ => 2,
    }
}

fn run(cli: &Cli) -> Result<bool, Error> {
    let mut cfg = ExperimentConfig::load(cli.experiment, cli.config.as_deref(), &cli.set)?;
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    let table = run_experiment(&cfg, cli.jobs)?;
    match &table {
        Table::Oracle(checks) => checks.iter().for_each(|c| println!("{}", c.line())),
        Table::Coulomb { discrepancies, .. } => discrepancies.iter().for_each(|d| println!("discrepancy {d}")),
        _ => {}
    }
    let dir = cfg.output_dir.clone();
    let out = emit_outputs(&table, &cfg, &dir)?;
    println!("{} rows -> {}", table.len(), out.csv.display());
    Ok(table.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("oracle check failed");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
