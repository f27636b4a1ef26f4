use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("time {t} outside ramp window [0, {tf}]")]
    TimeOutOfRange { t: f64, tf: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("parameters leave the real-frequency regime at t = {t}: {reason}")]
    RealFrequencyViolation { t: f64, reason: String },

    #[error("effective slow spring kappa'_S = {kappa_prime} <= 0 (imaginary BOA frequency)")]
    ImaginaryFrequency { kappa_prime: f64 },

    #[error("Ermakov scaling factor reached b = {b} at t = {t}")]
    ErmakovSingularity { t: f64, b: f64 },

    #[error("degenerate eigenvalues {i} and {j} (gap {gap:e} below tolerance {tol:e})")]
    Degenerate { i: usize, j: usize, gap: f64, tol: f64 },

    #[error("matrix dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("states live on different grids")]
    GridMismatch,

    #[error("non-finite potential {value} at grid point {point:?}")]
    NonFinitePotential { point: Vec<f64>, value: f64 },

    #[error("linear solve did not converge: residual {residual:e} after {iterations} iterations")]
    SolverFailure { residual: f64, iterations: usize },

    #[error("eigensolver did not converge: residual {residual:e} after {iterations} iterations")]
    EigenFailure { residual: f64, iterations: usize },

    #[error("quadrature did not converge: estimate {estimate}, change {change:e}")]
    QuadratureFailure { estimate: f64, change: f64 },

    #[error("radial node at r = {r}: Laguerre ratio diverges")]
    RadialNode { r: f64 },

    #[error("invalid hydrogenic quantum numbers n = {n}, l = {l}")]
    InvalidQuantumNumbers { n: u32, l: u32 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
