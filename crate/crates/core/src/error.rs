use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("operator is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("not a density matrix: {0}")]
    InvalidState(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("parameter {name} = {value} outside its admissible range {range}")]
    ParameterOutOfRange { name: &'static str, value: f64, range: &'static str },
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("time {t} outside the configured horizon [{start}, {end}]")]
    OutOfHorizon { t: f64, start: f64, end: f64 },
    #[error("memory-kernel solution not available at t = {t}")]
    KernelUnsolved { t: f64 },
    #[error("memory-kernel step too large: h * max|f| = {product} > 0.5")]
    KernelStepTooLarge { product: f64 },
    #[error("|G(t)| = {magnitude:e} below 1e-12 at t = {t}; time-local rates are singular")]
    SingularRates { t: f64, magnitude: f64 },
    #[error("ODE integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },
    #[error("no analytic backend for model {0}")]
    NoAnalyticBackend(&'static str),
    #[error("propagator at t = {t} is singular (condition number {condition:e})")]
    SingularPropagator { t: f64, condition: f64 },
    #[error("integrated weight Gamma(t) vanishes at t = {t}")]
    DegenerateAverage { t: f64 },
    #[error("invalid witness: {0}")]
    InvalidWitness(String),
    #[error("invariance precondition failed: max deviation {deviation:e}")]
    NotInvariant { deviation: f64 },
    #[error("time {t} is not interior to the grid")]
    NotInterior { t: f64 },
    #[error("witness functional is not finite at t = {t}")]
    NonFinite { t: f64 },
    #[error("degenerate spectrum: could not match eigenoperators for eigenvalue {eigenvalue}")]
    UnmatchedSubspace { eigenvalue: num_complex::Complex64 },
    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),
    #[error("trajectory node {node}: {reason}")]
    TrajectoryNode { node: usize, reason: String },
    #[error("empty search: {0}")]
    EmptySearch(String),
    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("malformed input: {0}")]
    Format(String),
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}
