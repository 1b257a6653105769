use thiserror::Error;

/// Errors produced by the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unphysical state: {0}")]
    UnphysicalState(String),

    #[error("degenerate Gaussian coefficients: a_R - c = {0} must be positive")]
    DegenerateCoeffs(f64),

    #[error("degenerate environment block: a1_R - c1 = {0} must be positive")]
    DegenerateEnvironment(f64),

    #[error("density matrix lost normalizability at t = {time}: {reason}")]
    NormalizabilityLoss { time: f64, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("inverted oscillator: lambda = {lambda} exceeds omega0 * omega1 = {bound}")]
    InvertedOscillator { lambda: f64, bound: f64 },

    #[error("frequency-squared matrix is not positive definite (smallest eigenvalue {0})")]
    NotPositiveDefinite(f64),

    #[error("resonant divergence: environment mode {mode} has |omega0^2 - omega_n^2| = {gap}")]
    ResonantDivergence { mode: usize, gap: f64 },

    #[error("master equation requires a separable initial state: {0}")]
    EntangledInitialState(String),

    #[error("integrator step size underflow at t = {time} (h = {step})")]
    StepUnderflow { time: f64, step: f64 },

    #[error("integrator exceeded {0} steps")]
    TooManySteps(usize),

    #[error("insufficient sampling: {0}")]
    InsufficientSampling(String),

    #[error("unknown preset '{0}'")]
    UnknownPreset(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("I/O error on {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable name of the variant, for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::UnphysicalState(_) => "UnphysicalState",
            Error::DegenerateCoeffs(_) => "DegenerateCoeffs",
            Error::DegenerateEnvironment(_) => "DegenerateEnvironment",
            Error::NormalizabilityLoss { .. } => "NormalizabilityLoss",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::InvertedOscillator { .. } => "InvertedOscillator",
            Error::NotPositiveDefinite(_) => "NotPositiveDefinite",
            Error::ResonantDivergence { .. } => "ResonantDivergence",
            Error::EntangledInitialState(_) => "EntangledInitialState",
            Error::StepUnderflow { .. } => "StepUnderflow",
            Error::TooManySteps(_) => "TooManySteps",
            Error::InsufficientSampling(_) => "InsufficientSampling",
            Error::UnknownPreset(_) => "UnknownPreset",
            Error::InvalidScenario(_) => "InvalidScenario",
            Error::Config { .. } => "Config",
            Error::Io { .. } => "Io",
        }
    }
}
