use thiserror::Error;

/// Errors raised by the library and the experiment runner.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point outside model domain: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("quadrature did not converge: orders {order} and {next_order} differ by {difference:e}")]
    QuadratureNotConverged {
        order: usize,
        next_order: usize,
        difference: f64,
    },

    #[error("prior box clips {clipped_mass:e} of the probability mass")]
    PriorTooNarrow { clipped_mass: f64 },

    #[error("model has no probability density: {0}")]
    NoDensity(String),

    #[error("metric is singular or not positive-definite")]
    SingularMetric,

    #[error("finite-difference stencil leaves the domain (coordinate {coordinate})")]
    BoundaryTooClose { coordinate: usize },

    #[error("analytic metric derivatives are not available for this field")]
    AnalyticUnavailable,

    #[error("tangent vectors span a degenerate plane (area {area:e})")]
    DegeneratePlane { area: f64 },

    #[error("trajectory left the domain at tau = {tau}")]
    DomainExit { tau: f64 },

    #[error("step size underflow at tau = {tau} (h = {step:e})")]
    StepUnderflow { tau: f64, step: f64 },

    #[error("step budget exhausted at tau = {tau}")]
    TooManySteps { tau: f64 },

    #[error("curvature evaluation failed at tau = {tau}: {reason}")]
    CurvatureEvaluationFailed { tau: f64, reason: String },

    #[error("sectional curvature must be negative, got {0}")]
    NonNegativeK(f64),

    #[error("fit window holds {samples} samples, need at least {required}")]
    WindowTooShort { samples: usize, required: usize },

    #[error("intensity must be positive on the fit window (tau = {tau})")]
    NonPositiveIntensity { tau: f64 },

    #[error("volume must be positive on the fit window (tau = {tau})")]
    NonPositiveVolume { tau: f64 },

    #[error("grid too coarse: {per_unit:.1} points per unit tau, need {required}")]
    GridTooCoarse { per_unit: f64, required: f64 },

    #[error("cut-off xi*Omega = {product} is inconsistent with the normalised spectrum (sqrt 2)")]
    InconsistentCutoff { product: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config parse error at line {line}, column {column}: {message}")]
    ConfigParse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("scenario `{scenario}` failed: {source}")]
    ScenarioFailed {
        scenario: String,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
