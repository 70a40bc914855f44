use thiserror::Error;

use crate::minimize::SolveReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("non-finite value at node {index}")]
    NonFinite { index: usize },

    #[error("potential is negative ({value}) at node {index}")]
    NegativePotential { index: usize, value: f64 },

    #[error("field is identically zero (norm {norm:e})")]
    ZeroField { norm: f64 },

    #[error("derivative of the nonlinearity is undefined at t = 0")]
    UndefinedAtZero,

    #[error("bracket search failed: {0}")]
    BracketFailure(String),

    #[error("sign part too small: |w+| = {plus:e}, |w-| = {minus:e}")]
    DegenerateSignPart { plus: f64, minus: f64 },

    #[error("sign collapse: {0}")]
    SignCollapse(String),

    #[error("solver did not converge: {reason}")]
    NonConvergence { reason: String, best: Box<SolveReport> },

    #[error("degenerate initializer: {0}")]
    DegenerateInitializer(String),

    #[error("config parse error at line {line}: {message}")]
    ConfigParse { line: usize, message: String },

    #[error("invalid config key `{key}`: {constraint}")]
    Validation { key: String, constraint: String },

    #[error("mismatched configuration: {0}")]
    MismatchedConfiguration(String),

    #[error("bad field file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag used in the JSON error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::GridMismatch => "grid_mismatch",
            Error::NonFinite { .. } => "non_finite",
            Error::NegativePotential { .. } => "negative_potential",
            Error::ZeroField { .. } => "zero_field",
            Error::UndefinedAtZero => "undefined_at_zero",
            Error::BracketFailure(_) => "bracket_failure",
            Error::DegenerateSignPart { .. } => "degenerate_sign_part",
            Error::SignCollapse(_) => "sign_collapse",
            Error::NonConvergence { .. } => "non_convergence",
            Error::DegenerateInitializer(_) => "degenerate_initializer",
            Error::ConfigParse { .. } => "config_parse",
            Error::Validation { .. } => "validation",
            Error::MismatchedConfiguration(_) => "mismatched_configuration",
            Error::Format(_) => "format",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
