use thiserror::Error;

/// Errors raised across the toolkit.
///
/// The `Display` form is a single line; the CLI prefixes it with [`Error::kind`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("degenerate cell ({i}, {j}): all corner weights are zero")]
    DegenerateCell { i: i32, j: i32 },

    #[error("no rule fired for input {input:?}; hold previous output")]
    NoRuleFired { input: Vec<f64> },

    #[error("non-finite derivative at step {step}")]
    NonFinite { step: usize },

    #[error("pendulum denominator {value} <= 0 at angle {angle}")]
    SingularDynamics { value: f64, angle: f64 },

    #[error("simulation diverged at step {step} (t = {t}): |state| = {norm}")]
    Diverged { step: usize, t: f64, norm: f64 },

    #[error("improper transfer function: numerator degree {num} > denominator degree {den}")]
    ImproperTransferFunction { num: usize, den: usize },

    #[error("matrix `{name}` is not symmetric (max asymmetry {asymmetry})")]
    NotSymmetric { name: &'static str, asymmetry: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("(A, B) not stabilizable: {0}")]
    NotStabilizable(String),

    #[error("Riccati iteration did not converge after {iterations} steps; residual trace {trace:?}")]
    RiccatiNonConvergence { iterations: usize, trace: Vec<f64> },

    #[error("singular linear system while solving {0}")]
    Singular(&'static str),

    #[error("{0}")]
    Config(String),

    #[error("{0}")]
    Io(String),

    #[error("`{path}`: {reason}")]
    Csv { path: String, reason: String },
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }

    /// Short machine-readable category used as the CLI error prefix.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid-parameter",
            Error::Empty(_) => "empty",
            Error::DegenerateCell { .. } => "degenerate-cell",
            Error::NoRuleFired { .. } => "no-rule-fired",
            Error::NonFinite { .. } => "non-finite",
            Error::SingularDynamics { .. } => "singular-dynamics",
            Error::Diverged { .. } => "diverged",
            Error::ImproperTransferFunction { .. } => "improper-tf",
            Error::NotSymmetric { .. } => "not-symmetric",
            Error::Dimension(_) => "dimension",
            Error::NotStabilizable(_) => "not-stabilizable",
            Error::RiccatiNonConvergence { .. } => "riccati",
            Error::Singular(_) => "singular",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Csv { .. } => "csv",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
