use thiserror::Error;

/// Every failure the library can report.
///
/// Each variant carries a stable machine-readable code (see [`Error::code`]) so
/// front ends can surface failures without parsing messages.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("insufficient smoothness: derivative order {requested} exceeds {available}")]
    InsufficientSmoothness { requested: usize, available: usize },

    #[error("moment condition violated: {0}")]
    MomentConditionViolated(String),

    #[error("integration overflow: {0}")]
    IntegrationOverflow(String),

    #[error("spurious Wronskian zero at lambda = {lambda}")]
    SpuriousWronskianZero { lambda: f64 },

    #[error("eigenvalue search incomplete, refine scan: {found} sign changes but {nodes} nodes")]
    EigenvalueSearchIncomplete { found: usize, nodes: usize },

    #[error("window too small: {0}")]
    WindowTooSmall(String),

    #[error("inconsistent eigenpair at lambda = {lambda}: residue residual {residual:.3e}")]
    InconsistentEigenpair { lambda: f64, residual: f64 },

    #[error("edge behavior not sqrt-type: fit residual {residual:.3e}")]
    EdgeNotSqrtType { residual: f64 },

    #[error("insufficient k_max: tail fit residual {residual:.3e} of tail magnitude")]
    InsufficientKmax { residual: f64 },

    #[error("invalid T on the multiplicity-one band at lambda = {lambda}")]
    InvalidSigma1T { lambda: f64 },

    #[error("GLM operator near-singular at x = {x}: condition {condition:.3e}")]
    NearSingular { x: f64, condition: f64 },

    #[error("order exceeds potential smoothness: order {order}, smoothness {smoothness}")]
    OrderExceedsSmoothness { order: usize, smoothness: usize },

    #[error("Weyl function pole proximity at x = {x}: |phi| = {phi_abs:.3e}")]
    WeylPoleProximity { x: f64, phi_abs: f64 },

    #[error("ladder too short: {usable} usable points")]
    LadderTooShort { usable: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::InsufficientSmoothness { .. } => "insufficient_smoothness",
            Error::MomentConditionViolated(_) => "moment_condition_violated",
            Error::IntegrationOverflow(_) => "integration_overflow",
            Error::SpuriousWronskianZero { .. } => "spurious_wronskian_zero",
            Error::EigenvalueSearchIncomplete { .. } => "eigenvalue_search_incomplete",
            Error::WindowTooSmall(_) => "window_too_small",
            Error::InconsistentEigenpair { .. } => "inconsistent_eigenpair",
            Error::EdgeNotSqrtType { .. } => "edge_not_sqrt_type",
            Error::InsufficientKmax { .. } => "insufficient_kmax",
            Error::InvalidSigma1T { .. } => "invalid_sigma1_t",
            Error::NearSingular { .. } => "glm_near_singular",
            Error::OrderExceedsSmoothness { .. } => "order_exceeds_smoothness",
            Error::WeylPoleProximity { .. } => "weyl_pole_proximity",
            Error::LadderTooShort { .. } => "ladder_too_short",
            Error::Parse(_) => "parse_error",
            Error::InvalidInput(_) => "invalid_input",
            Error::Io(_) => "io_error",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(format!("line {}, column {}: {}", e.line(), e.column(), e))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
