use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix at index {index} is not unitary (residual {residual:.3e})")]
    NonUnitary { index: usize, residual: f64 },

    #[error("expected a {expected}x{expected} matrix, got {rows}x{cols}")]
    Dimension {
        expected: usize,
        rows: usize,
        cols: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cross-ratio denominator {value:.3e} is degenerate")]
    DegenerateDenominator { value: f64 },

    #[error("points {i} and {j} coincide")]
    ZeroFactor { i: usize, j: usize },

    #[error("matrix difference is singular (condition estimate {condition:.3e})")]
    SingularDifference { condition: f64 },

    #[error("phase coincides with the reference phase (|beta| = {beta:.3e})")]
    CoincidentPhase { beta: f64 },

    #[error("point coincides with the projection point (distance {distance:.3e})")]
    CoincidentPoint { distance: f64 },

    #[error("vector is not orthogonal to the reference point (inner product {inner:.3e})")]
    NonOrthogonal { inner: f64 },

    #[error("stereographic image escaped to infinity at t = {t}")]
    PassedThroughProjectionPoint { t: f64 },

    #[error("step size underflow at t = {t} (h = {h:.3e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },

    #[error("integrator failure: {0}")]
    IntegratorFailure(String),

    #[error("time grids do not match")]
    MismatchedGrids,

    #[error("unknown functional `{0}`")]
    UnknownFunctional(String),

    #[error("unknown suite `{0}`")]
    UnknownSuite(String),

    #[error("scenario error at {pointer}: {message}")]
    Scenario { pointer: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn scenario(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Scenario {
            pointer: pointer.into(),
            message: message.into(),
        }
    }
}
