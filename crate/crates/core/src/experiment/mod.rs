//! Parameter sweeps behind the `cbod` command line: static and dynamic fidelity
//! curves, the Coulomb comparison report and the oracle suite.

mod config;
pub mod svg;

pub use config::{
    CoulombBlock, Curve, CurveParameter, CurveSet, ExperimentConfig, ExperimentKind, OracleBlock, OscillatorBlock,
    RampBlock, RampTarget, Scale, SolverBlock, SweepAxis, SweepParameter,
};

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::coulomb::coulomb_report;
use crate::dynamics::evolve_cbod_with;
use crate::error::{Error, Result};
use crate::oracle::{run_suite, OracleCheck};
use crate::oscillators::static_fidelity;
use svg::{Plot, Series};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StaticRow {
    pub mass_ratio: f64,
    pub curve: String,
    pub kappa_slow: f64,
    pub kappa_fast: f64,
    pub k_int: f64,
    pub hbar: f64,
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DynamicRow {
    pub mass_ratio: f64,
    pub k1: f64,
    #[serde(rename = "Tf")]
    pub tf: f64,
    pub fidelity: f64,
    pub ermakov_residual: f64,
    pub validity_flag: String,
    pub target: String,
    pub k0: f64,
    pub steps: usize,
    pub method: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoulombRow {
    pub n: u32,
    pub l: u32,
    pub g: f64,
    pub m_fast: f64,
    pub hbar: f64,
    pub gdot: f64,
    pub berry_formula: f64,
    pub berry_numeric: f64,
    pub diagonal_cd: f64,
    pub printed_deviation: Option<f64>,
    pub berry_discrepancy: bool,
    pub printed_discrepancy: bool,
    pub radial_nodes: String,
    pub printed_poles: String,
}

/// Rows of one experiment, in output order.
#[derive(Debug, Clone, PartialEq)]
pub enum Table {
    Static(Vec<StaticRow>),
    Dynamic(Vec<DynamicRow>),
    Coulomb { rows: Vec<CoulombRow>, discrepancies: Vec<String> },
    Oracle(Vec<OracleCheck>),
}

impl Table {
    pub fn len(&self) -> usize {
        match self {
            Table::Static(r) => r.len(),
            Table::Dynamic(r) => r.len(),
            Table::Coulomb { rows, .. } => rows.len(),
            Table::Oracle(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Oracle suites pass when every check does; other tables always pass.
    pub fn passed(&self) -> bool {
        match self {
            Table::Oracle(r) => r.iter().all(|c| c.passed),
            _ => true,
        }
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        fn write<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in rows {
                w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
            }
            w.into_inner().map_err(|e| Error::Io(e.to_string()))
        }
        match self {
            Table::Static(r) => write(r),
            Table::Dynamic(r) => write(r),
            Table::Coulomb { rows, .. } => write(rows),
            Table::Oracle(r) => write(r),
        }
    }

    pub fn plot(&self, cfg: &ExperimentConfig) -> Plot {
        fn grouped<R>(rows: &[R], key: impl Fn(&R) -> String, point: impl Fn(&R) -> (f64, f64)) -> Vec<Series> {
            let mut out: Vec<Series> = Vec::new();
            for r in rows {
                let label = key(r);
                match out.iter_mut().find(|s| s.label == label) {
                    Some(s) => s.points.push(point(r)),
                    None => out.push(Series { label, points: vec![point(r)] }),
                }
            }
            out
        }
        let log_x = cfg.sweep.scale == Scale::Log;
        match self {
            Table::Static(rows) => Plot {
                title: "Static fidelity between exact and BOA ground states".into(),
                x_label: "m_F / m_S".into(),
                y_label: "F".into(),
                log_x,
                series: grouped(rows, |r| r.curve.clone(), |r| (r.mass_ratio, r.fidelity)),
            },
            Table::Dynamic(rows) => {
                let time = cfg.experiment == ExperimentKind::TimeSweep;
                Plot {
                    title: format!("CBOD fidelity, {} ramp", cfg.ramp.target.name()),
                    x_label: if time { "T_f".into() } else { "m_F / m_S".into() },
                    y_label: "F".into(),
                    log_x,
                    series: grouped(rows, |r| format!("k1 = {}", r.k1), |r| (if time { r.tf } else { r.mass_ratio }, r.fidelity)),
                }
            }
            Table::Coulomb { rows, .. } => {
                let pick = |f: fn(&CoulombRow) -> f64| rows.iter().enumerate().map(|(i, r)| ((i + 1) as f64, f(r))).collect();
                Plot {
                    title: "Berry connection per (n, l), in units of gdot/g".into(),
                    x_label: "state index".into(),
                    y_label: "g<R|d_g R>".into(),
                    log_x: false,
                    series: vec![
                        Series { label: "closed form".into(), points: pick(|r| r.berry_formula * r.g / r.gdot) },
                        Series { label: "quadrature".into(), points: pick(|r| r.berry_numeric * r.g / r.gdot) },
                    ],
                }
            }
            Table::Oracle(rows) => Plot {
                title: "Oracle checks: log10(value / tolerance)".into(),
                x_label: "check index".into(),
                y_label: "log10 ratio".into(),
                log_x: false,
                series: vec![Series {
                    label: "checks (pass below 0)".into(),
                    points: rows
                        .iter()
                        .enumerate()
                        .map(|(i, c)| ((i + 1) as f64, (c.value.abs() / c.tolerance).log10().max(-20.0)))
                        .collect(),
                }],
            },
        }
    }
}

fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {jobs} worker threads: {e}")))
}

/// Runs the experiment on `jobs` worker threads (`0` picks the core count).
pub fn run_experiment(cfg: &ExperimentConfig, jobs: usize) -> Result<Table> {
    cfg.validate()?;
    cfg.validate_physics()?;
    let pool = thread_pool(jobs)?;
    let sweep = cfg.sweep.values();
    let tasks: Vec<(usize, Curve, f64)> = cfg
        .curves()
        .into_iter()
        .enumerate()
        .flat_map(|(i, c)| sweep.iter().map(move |&x| (i, c, x)))
        .collect();
    let order = |a: &(usize, f64), b: &(usize, f64)| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1));
    match cfg.experiment {
        ExperimentKind::StaticFidelity => {
            let mut rows: Vec<(usize, StaticRow)> = pool.install(|| {
                tasks
                    .par_iter()
                    .map(|&(i, curve, ratio)| {
                        let p = cfg.static_params(ratio, curve)?;
                        let s = p.springs(0.0)?;
                        Ok((
                            i,
                            StaticRow {
                                mass_ratio: ratio,
                                curve: match curve {
                                    Curve::Control => "control".into(),
                                    Curve::Value(v) => format!("{}={v}", cfg.curves.parameter.name()),
                                },
                                kappa_slow: s.kappa_slow.value,
                                kappa_fast: s.kappa_fast.value,
                                k_int: s.k_int.value,
                                hbar: p.hbar(),
                                fidelity: static_fidelity(&p, 0.0)?,
                            },
                        ))
                    })
                    .collect::<Result<_>>()
            })?;
            rows.sort_by(|a, b| order(&(a.0, a.1.mass_ratio), &(b.0, b.1.mass_ratio)));
            Ok(Table::Static(rows.into_iter().map(|r| r.1).collect()))
        }
        ExperimentKind::RampFidelity | ExperimentKind::TimeSweep => {
            let time = cfg.experiment == ExperimentKind::TimeSweep;
            let mut rows: Vec<(usize, DynamicRow)> = pool.install(|| {
                tasks
                    .par_iter()
                    .map(|&(i, curve, x)| {
                        let (ratio, tf) = if time { (cfg.oscillator.mass_ratio, x) } else { (x, cfg.ramp.tf) };
                        let k1 = curve.value();
                        let p = cfg.ramp_params(ratio, k1, tf)?;
                        let r = evolve_cbod_with(&p, tf, &cfg.solver.settings(tf))?;
                        Ok((
                            i,
                            DynamicRow {
                                mass_ratio: ratio,
                                k1,
                                tf,
                                fidelity: r.fidelity,
                                ermakov_residual: r.ermakov_residual(),
                                validity_flag: r.validity_flag().into(),
                                target: cfg.ramp.target.name().into(),
                                k0: cfg.k0(),
                                steps: r.steps,
                                method: r.method.to_string(),
                            },
                        ))
                    })
                    .collect::<Result<_>>()
            })?;
            rows.sort_by(|a, b| {
                let key = |r: &DynamicRow| if time { r.tf } else { r.mass_ratio };
                order(&(a.0, key(&a.1)), &(b.0, key(&b.1)))
            });
            Ok(Table::Dynamic(rows.into_iter().map(|r| r.1).collect()))
        }
        ExperimentKind::CoulombReport => {
            let c = &cfg.coulomb;
            let reports = coulomb_report(c.g, c.m_fast, c.hbar, c.gdot, c.max_n)?;
            let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";");
            let discrepancies = reports.iter().flat_map(|r| r.discrepancies(c.tolerance)).collect();
            let rows = reports
                .iter()
                .map(|r| CoulombRow {
                    n: r.n,
                    l: r.l,
                    g: c.g,
                    m_fast: c.m_fast,
                    hbar: c.hbar,
                    gdot: c.gdot,
                    berry_formula: r.berry_formula,
                    berry_numeric: r.berry_numeric,
                    diagonal_cd: r.diagonal_cd,
                    printed_deviation: r.printed_deviation,
                    berry_discrepancy: r.berry_discrepancy(c.tolerance),
                    printed_discrepancy: r.printed_discrepancy(c.tolerance),
                    radial_nodes: list(&r.canonical_poles),
                    printed_poles: list(&r.printed_poles),
                })
                .collect();
            Ok(Table::Coulomb { rows, discrepancies })
        }
        ExperimentKind::OracleCheck => Ok(Table::Oracle(pool.install(|| run_suite(&cfg.oracle))?)),
    }
}

/// Files written by [`emit_outputs`].
#[derive(Debug, Clone, PartialEq)]
pub struct Outputs {
    pub csv: PathBuf,
    pub svg: PathBuf,
    pub config: PathBuf,
}

/// Writes `<experiment>.csv`, `<experiment>.svg` and `config.resolved.toml` into `dir`.
pub fn emit_outputs(table: &Table, cfg: &ExperimentConfig, dir: &Path) -> Result<Outputs> {
    if table.is_empty() {
        return Err(Error::Config("experiment produced no rows".into()));
    }
    std::fs::create_dir_all(dir)?;
    let name = cfg.experiment.name();
    let out = Outputs {
        csv: dir.join(format!("{name}.csv")),
        svg: dir.join(format!("{name}.svg")),
        config: dir.join("config.resolved.toml"),
    };
    std::fs::write(&out.csv, table.to_csv()?)?;
    std::fs::write(&out.svg, svg::render(&table.plot(cfg)))?;
    let mut resolved = cfg.clone();
    resolved.output_dir = dir.to_path_buf();
    std::fs::write(&out.config, resolved.to_toml()?)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(kind: ExperimentKind, extra: &[&str]) -> ExperimentConfig {
        let mut o: Vec<String> = vec!["sweep.points=3".into()];
        o.extend(extra.iter().map(|s| s.to_string()));
        ExperimentConfig::load(kind, None, &o).unwrap()
    }

    #[test]
    fn static_rows_cover_every_curve() {
        let cfg = small(ExperimentKind::StaticFidelity, &[]);
        let Table::Static(rows) = run_experiment(&cfg, 2).unwrap() else { panic!() };
        assert_eq!(rows.len(), 3 * 4);
        for r in rows.iter().filter(|r| r.curve == "control") {
            assert!((r.fidelity - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dynamic_csv_header_and_order() {
        let cfg = small(ExperimentKind::RampFidelity, &["curves.values=[25.0]", "sweep.lo=0.01", "sweep.hi=0.1"]);
        let table = run_experiment(&cfg, 2).unwrap();
        let csv = String::from_utf8(table.to_csv().unwrap()).unwrap();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "mass_ratio,k1,Tf,fidelity,ermakov_residual,validity_flag,target,k0,steps,method"
        );
        let ratios: Vec<f64> = lines.map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
        assert_eq!(ratios.len(), 3);
        assert!(ratios.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn coulomb_report_lists_discrepancies() {
        let cfg = small(ExperimentKind::CoulombReport, &["coulomb.max_n=2"]);
        let Table::Coulomb { rows, discrepancies } = run_experiment(&cfg, 1).unwrap() else { panic!() };
        assert_eq!(rows.len(), 3);
        assert!(!discrepancies.is_empty());
        assert!(rows[0].printed_deviation.unwrap() < 1e-12);
    }

    #[test]
    fn outputs_are_written() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small(ExperimentKind::StaticFidelity, &[]);
        let table = run_experiment(&cfg, 1).unwrap();
        let out = emit_outputs(&table, &cfg, dir.path()).unwrap();
        let resolved = std::fs::read_to_string(&out.config).unwrap();
        assert!(resolved.contains("experiment = \"static-fidelity\""));
        assert!(std::fs::read_to_string(&out.svg).unwrap().contains("<polyline"));
    }
}
