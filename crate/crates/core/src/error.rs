use thiserror::Error;

/// Errors produced by the numeric modules and the CLI front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("sequence has {available} stored values and no generator; index {requested} is unavailable")]
    Extension { requested: usize, available: usize },

    #[error("supremum not localized at t = {t}: terms still increasing after {evaluated} indices")]
    NotLocalized { t: f64, evaluated: usize },

    #[error("derivative order {order} exceeds the exact-derivative budget of {budget}")]
    DerivativeBudget { order: usize, budget: usize },

    #[error("Nyquist guard violated on axis {axis}: |xi| extent {xi_extent} times x step {x_step} exceeds 1/2")]
    Nyquist {
        axis: usize,
        xi_extent: f64,
        x_step: f64,
    },

    #[error("bump function is not normalized: integral = {integral}")]
    BumpNotNormalized { integral: f64 },

    #[error("window pair is numerically orthogonal: |(gamma, psi)| = {0}")]
    OrthogonalWindows(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
