//! Declarative experiment configuration: TOML file, defaults per experiment
//! kind, and `key=value` overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::{EvolutionMethod, EvolutionSettings, MIN_STEPS, STEPS_PER_UNIT_TIME};
use crate::error::{Error, Result};
use crate::params::{OscillatorParams, RampSchedule, Spring, UnitSystem, ValidationReport};

const VALIDATION_SAMPLES: usize = 401;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    StaticFidelity,
    RampFidelity,
    TimeSweep,
    CoulombReport,
    OracleCheck,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::StaticFidelity => "static-fidelity",
            ExperimentKind::RampFidelity => "ramp-fidelity",
            ExperimentKind::TimeSweep => "time-sweep",
            ExperimentKind::CoulombReport => "coulomb-report",
            ExperimentKind::OracleCheck => "oracle-check",
        }
    }
}

impl std::fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepParameter {
    MassRatio,
    Tf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scale {
    Log,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveParameter {
    KappaSlow,
    KappaFast,
    KInt,
    K1,
}

impl CurveParameter {
    pub fn name(self) -> &'static str {
        match self {
            CurveParameter::KappaSlow => "kappa_slow",
            CurveParameter::KappaFast => "kappa_fast",
            CurveParameter::KInt => "k_int",
            CurveParameter::K1 => "k1",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RampTarget {
    KappaSlow,
    KappaFast,
    KInt,
}

impl RampTarget {
    pub fn name(self) -> &'static str {
        match self {
            RampTarget::KappaSlow => "kappa_slow",
            RampTarget::KappaFast => "kappa_fast",
            RampTarget::KInt => "k_int",
        }
    }

    fn default_k0(self) -> f64 {
        match self {
            RampTarget::KInt => 1.0,
            _ => 50.0,
        }
    }

    fn default_k1(self) -> Vec<f64> {
        match self {
            RampTarget::KInt => vec![10.0, 20.0, 30.0],
            _ => vec![10.0, 25.0, 40.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillatorBlock {
    pub m_fast: f64,
    pub kappa_slow: f64,
    pub kappa_fast: f64,
    pub k_int: f64,
    pub hbar: f64,
    /// `m_F/m_S` when the sweep runs over `Tf`.
    pub mass_ratio: f64,
}

impl Default for OscillatorBlock {
    fn default() -> Self {
        Self {
            m_fast: 1.0,
            kappa_slow: 100.0,
            kappa_fast: 100.0,
            k_int: 50.0,
            hbar: 1.0,
            mass_ratio: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub parameter: SweepParameter,
    pub scale: Scale,
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl SweepAxis {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.lo];
        }
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                let f = i as f64 / last;
                if i == 0 {
                    return self.lo;
                }
                if i + 1 == self.points {
                    return self.hi;
                }
                match self.scale {
                    Scale::Log => (self.lo.ln() + f * (self.hi.ln() - self.lo.ln())).exp(),
                    Scale::Linear => self.lo + f * (self.hi - self.lo),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSet {
    pub parameter: CurveParameter,
    /// Empty means the default set for the parameter.
    #[serde(default)]
    pub values: Vec<f64>,
    /// Adds a `k_int = 0` curve (static fidelity only).
    #[serde(default)]
    pub control: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RampBlock {
    pub target: RampTarget,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k0: Option<f64>,
    pub tf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverBlock {
    pub method: EvolutionMethod,
    pub steps_per_unit_time: f64,
    pub min_steps: usize,
    pub strict: bool,
}

impl Default for SolverBlock {
    fn default() -> Self {
        Self {
            method: EvolutionMethod::Gaussian,
            steps_per_unit_time: STEPS_PER_UNIT_TIME,
            min_steps: MIN_STEPS,
            strict: false,
        }
    }
}

impl SolverBlock {
    pub fn settings(&self, tf: f64) -> EvolutionSettings {
        EvolutionSettings {
            method: self.method,
            steps: Some(((self.steps_per_unit_time * tf).ceil() as usize).max(self.min_steps)),
            strict: self.strict,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoulombBlock {
    pub g: f64,
    pub m_fast: f64,
    pub hbar: f64,
    pub gdot: f64,
    pub max_n: u32,
    /// Threshold for flagging formula/quadrature disagreements.
    pub tolerance: f64,
}

impl Default for CoulombBlock {
    fn default() -> Self {
        Self {
            g: 1.0,
            m_fast: 1.0,
            hbar: 1.0,
            gdot: 1.0,
            max_n: 3,
            tolerance: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleBlock {
    /// Points per axis of the 2D grids.
    pub grid_points: usize,
    /// Crank–Nicolson steps per unit time.
    pub cn_steps_per_unit_time: usize,
    /// Run the 2D Crank–Nicolson comparison of the CBOD evolution.
    pub dynamics_2d: bool,
}

impl Default for OracleBlock {
    fn default() -> Self {
        Self {
            grid_points: 128,
            cn_steps_per_unit_time: 20_000,
            dynamics_2d: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub output_dir: PathBuf,
    pub oscillator: OscillatorBlock,
    pub sweep: SweepAxis,
    pub curves: CurveSet,
    pub ramp: RampBlock,
    pub solver: SolverBlock,
    pub coulomb: CoulombBlock,
    pub oracle: OracleBlock,
}

impl ExperimentConfig {
    /// Fully resolved defaults for one experiment kind.
    pub fn defaults(kind: ExperimentKind) -> Self {
        let mass_ratio_sweep = SweepAxis {
            parameter: SweepParameter::MassRatio,
            scale: Scale::Log,
            lo: 1e-3,
            hi: 1.0,
            points: 25,
        };
        let (sweep, curves) = match kind {
            ExperimentKind::StaticFidelity => (
                mass_ratio_sweep,
                CurveSet {
                    parameter: CurveParameter::KappaSlow,
                    values: Vec::new(),
                    control: true,
                },
            ),
            ExperimentKind::TimeSweep => (
                SweepAxis {
                    parameter: SweepParameter::Tf,
                    scale: Scale::Log,
                    lo: 0.05,
                    hi: 1.0,
                    points: 20,
                },
                CurveSet {
                    parameter: CurveParameter::K1,
                    values: Vec::new(),
                    control: false,
                },
            ),
            _ => (
                mass_ratio_sweep,
                CurveSet {
                    parameter: CurveParameter::K1,
                    values: Vec::new(),
                    control: false,
                },
            ),
        };
        let mut cfg = Self {
            experiment: kind,
            output_dir: PathBuf::from("out"),
            oscillator: OscillatorBlock::default(),
            sweep,
            curves,
            ramp: RampBlock {
                target: RampTarget::KappaSlow,
                k0: None,
                tf: 1.0,
            },
            solver: SolverBlock::default(),
            coulomb: CoulombBlock::default(),
            oracle: OracleBlock::default(),
        };
        cfg.resolve();
        cfg
    }

    /// Loads `path` (if any) over the defaults for `kind`, then applies `key=value` overrides.
    pub fn load(kind: ExperimentKind, path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut table = toml::Table::try_from(Self::defaults(kind)).map_err(|e| Error::Config(e.to_string()))?;
        // Curve values and k0 depend on other settings, so they are filled after merging.
        table["curves"].as_table_mut().expect("curves table").remove("values");
        table["ramp"].as_table_mut().expect("ramp table").remove("k0");
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            let file: toml::Table =
                toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            if let Some(named) = file.get("experiment").and_then(|v| v.as_str()) {
                if named != kind.name() {
                    return Err(Error::Config(format!(
                        "config file is for experiment `{named}` but `{kind}` was requested"
                    )));
                }
            }
            merge(&mut table, file);
        }
        for item in overrides {
            apply_override(&mut table, item)?;
        }
        let mut cfg: Self = table.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.resolve();
        cfg.validate()?;
        Ok(cfg)
    }

    fn resolve(&mut self) {
        if self.ramp.k0.is_none() {
            self.ramp.k0 = Some(self.ramp.target.default_k0());
        }
        if self.curves.values.is_empty() {
            self.curves.values = match self.curves.parameter {
                CurveParameter::K1 => self.ramp.target.default_k1(),
                CurveParameter::KInt => vec![10.0, 30.0, 50.0],
                _ => vec![50.0, 100.0, 200.0],
            };
        }
    }

    pub fn k0(&self) -> f64 {
        self.ramp.k0.unwrap_or_else(|| self.ramp.target.default_k0())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Structural checks; physics constraints are checked per point by [`Self::validate_physics`].
    pub fn validate(&self) -> Result<()> {
        let kind = self.experiment;
        let expected_sweep = match kind {
            ExperimentKind::StaticFidelity | ExperimentKind::RampFidelity => Some(SweepParameter::MassRatio),
            ExperimentKind::TimeSweep => Some(SweepParameter::Tf),
            _ => None,
        };
        if let Some(expected) = expected_sweep {
            if self.sweep.parameter != expected {
                return Err(Error::Config(format!("{kind} sweeps {expected:?}, not {:?}", self.sweep.parameter)));
            }
            let s = &self.sweep;
            if s.points == 0 {
                return Err(Error::Config("sweep.points must be at least 1".into()));
            }
            if !(s.lo.is_finite() && s.hi.is_finite()) || (s.points > 1 && s.hi <= s.lo) {
                return Err(Error::Config(format!("sweep bounds [{}, {}] are not increasing", s.lo, s.hi)));
            }
            if s.lo <= 0.0 {
                return Err(Error::Config(format!("sweep.lo = {} must be positive", s.lo)));
            }
            let curve_ok = match kind {
                ExperimentKind::StaticFidelity => self.curves.parameter != CurveParameter::K1,
                _ => self.curves.parameter == CurveParameter::K1,
            };
            if !curve_ok {
                return Err(Error::Config(format!(
                    "curves.parameter = {} is not valid for {kind}",
                    self.curves.parameter.name()
                )));
            }
            if self.curves.control && kind != ExperimentKind::StaticFidelity {
                return Err(Error::Config("curves.control applies to static-fidelity only".into()));
            }
        }
        let o = &self.oscillator;
        for (name, v) in [("oscillator.m_fast", o.m_fast), ("oscillator.hbar", o.hbar), ("oscillator.mass_ratio", o.mass_ratio)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} = {v} must be positive")));
            }
        }
        if !(self.ramp.tf > 0.0) {
            return Err(Error::Config(format!("ramp.tf = {} must be positive", self.ramp.tf)));
        }
        if !(self.solver.steps_per_unit_time > 0.0) || self.solver.min_steps < 100 {
            return Err(Error::Config("solver needs steps_per_unit_time > 0 and min_steps >= 100".into()));
        }
        let c = &self.coulomb;
        if c.max_n == 0 || !(c.g > 0.0 && c.m_fast > 0.0 && c.hbar > 0.0) {
            return Err(Error::Config("coulomb block needs max_n >= 1 and positive g, m_fast, hbar".into()));
        }
        if self.oracle.grid_points < 16 {
            return Err(Error::Config("oracle.grid_points must be at least 16".into()));
        }
        Ok(())
    }

    /// Oscillator parameters for one static point.
    pub fn static_params(&self, mass_ratio: f64, curve: Curve) -> Result<OscillatorParams> {
        let o = &self.oscillator;
        let (mut ks, mut kf, mut ki) = (o.kappa_slow, o.kappa_fast, o.k_int);
        match curve {
            Curve::Control => ki = 0.0,
            Curve::Value(v) => match self.curves.parameter {
                CurveParameter::KappaSlow => ks = v,
                CurveParameter::KappaFast => kf = v,
                CurveParameter::KInt => ki = v,
                CurveParameter::K1 => unreachable!("rejected by validate"),
            },
        }
        Ok(OscillatorParams::new(o.m_fast / mass_ratio, o.m_fast, ks, kf, ki)?.with_units(UnitSystem::new(o.hbar)?))
    }

    /// Ramped parameters for one dynamic point.
    pub fn ramp_params(&self, mass_ratio: f64, k1: f64, tf: f64) -> Result<OscillatorParams> {
        let o = &self.oscillator;
        let ramp: Spring = RampSchedule::new(self.k0(), k1, tf)?.into();
        let (ks, kf, ki) = match self.ramp.target {
            RampTarget::KappaSlow => (ramp, o.kappa_fast.into(), o.k_int.into()),
            RampTarget::KappaFast => (o.kappa_slow.into(), ramp, o.k_int.into()),
            RampTarget::KInt => (o.kappa_slow.into(), o.kappa_fast.into(), ramp),
        };
        Ok(OscillatorParams::new(o.m_fast / mass_ratio, o.m_fast, ks, kf, ki)?.with_units(UnitSystem::new(o.hbar)?))
    }

    /// Every curve of the experiment, in output order.
    pub fn curves(&self) -> Vec<Curve> {
        let mut out: Vec<Curve> = self.curves.values.iter().map(|&v| Curve::Value(v)).collect();
        if self.curves.control {
            out.push(Curve::Control);
        }
        out
    }

    /// Checks `κ_Sκ_F > k_I²` (and a positive effective slow spring) at every point before running.
    pub fn validate_physics(&self) -> Result<()> {
        let sweep = self.sweep.values();
        for curve in self.curves() {
            for &x in &sweep {
                let (p, tf) = match self.experiment {
                    ExperimentKind::StaticFidelity => (self.static_params(x, curve)?, None),
                    ExperimentKind::RampFidelity => {
                        (self.ramp_params(x, curve.value(), self.ramp.tf)?, Some(self.ramp.tf))
                    }
                    ExperimentKind::TimeSweep => (self.ramp_params(self.oscillator.mass_ratio, curve.value(), x)?, Some(x)),
                    _ => return Ok(()),
                };
                if let ValidationReport::Violation(v) = p.validate(tf.unwrap_or(1.0), VALIDATION_SAMPLES) {
                    return Err(Error::RealFrequencyViolation {
                        t: v.t,
                        reason: format!("{} at {} = {}, {}: {}", self.experiment, self.sweep_name(), x, curve.label(self), v.kind),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn sweep_name(&self) -> &'static str {
        match self.sweep.parameter {
            SweepParameter::MassRatio => "mass_ratio",
            SweepParameter::Tf => "Tf",
        }
    }
}

/// One curve of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Curve {
    Value(f64),
    /// Decoupled reference with `k_int = 0`.
    Control,
}

impl Curve {
    pub fn value(self) -> f64 {
        match self {
            Curve::Value(v) => v,
            Curve::Control => 0.0,
        }
    }

    pub fn label(self, cfg: &ExperimentConfig) -> String {
        match self {
            Curve::Value(v) => format!("{} = {v}", cfg.curves.parameter.name()),
            Curve::Control => "k_int = 0 (control)".into(),
        }
    }
}

fn merge(base: &mut toml::Table, overlay: toml::Table) {
    for (key, value) in overlay {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

/// `a.b.c=value`; the value is read as a TOML literal, falling back to a bare string.
fn apply_override(table: &mut toml::Table, item: &str) -> Result<()> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{item}` is not of the form key=value")))?;
    let value = toml::from_str::<toml::Table>(&format!("v = {}", raw.trim()))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));
    let path: Vec<&str> = key.trim().split('.').collect();
    let (last, parents) = path.split_last().expect("split yields at least one part");
    let mut cursor = table;
    for part in parents {
        cursor = cursor
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("`{key}`: `{part}` is not a table")))?;
    }
    cursor.insert(last.to_string(), value);
    Ok(())
}
