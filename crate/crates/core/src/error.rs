use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier '{name}' at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error("matrix family is singular at u = {0:?}")]
    SingularMatrix(Vec<f64>),

    #[error("no inverse map registered for octant pair ({i},{j})")]
    MissingInverseMap { i: usize, j: usize },

    #[error("matrix family is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("invalid matrix family: {0}")]
    InvalidFamily(String),

    #[error("kernel is not admissible: {0}")]
    Inadmissible(String),

    #[error("out-of-domain mass {fraction:.3e} exceeds limit {limit:.3e}: {detail}")]
    OutOfDomain {
        fraction: f64,
        limit: f64,
        detail: String,
    },

    #[error("insufficient decay at grid boundary: ratio {ratio:.3e} > {limit:.3e} ({what})")]
    InsufficientDecay { what: String, ratio: f64, limit: f64 },

    #[error("symbol is not real and non-negative: {0}")]
    NotNonNegative(String),

    #[error("holomorphic function must vanish at 0, got F(0) = {0}")]
    NonZeroAtOrigin(String),

    #[error("function domain does not contain the symbol range: {0}")]
    OutsideFunctionDomain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular point: {0}")]
    Singular(String),

    #[error("unknown preset: {0}")]
    UnknownPreset(String),

    #[error("unknown suite: {0}")]
    UnknownSuite(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short machine-readable category used by the command-line front end.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidGrid(_) | Error::GridMismatch(_) => "grid",
            Error::NonFinite(_) => "non_finite",
            Error::Syntax { .. } | Error::UnknownIdentifier { .. } => "parse",
            Error::Evaluation(_) => "evaluation",
            Error::OutOfRange(_) | Error::InvalidArgument(_) => "argument",
            Error::SingularMatrix(_) | Error::Singular(_) => "singular",
            Error::MissingInverseMap { .. } | Error::InvalidFamily(_) => "family",
            Error::NotPositiveDefinite(_) => "not_positive_definite",
            Error::Inadmissible(_) => "inadmissible",
            Error::OutOfDomain { .. } => "out_of_domain",
            Error::InsufficientDecay { .. } => "decay",
            Error::NotNonNegative(_) => "not_nonnegative",
            Error::NonZeroAtOrigin(_) | Error::OutsideFunctionDomain(_) => "function",
            Error::UnknownPreset(_) => "unknown_preset",
            Error::UnknownSuite(_) => "unknown_suite",
            Error::Config(_) | Error::Json(_) => "config",
            Error::Io(_) | Error::Csv(_) => "io",
        }
    }

    /// Errors caused by malformed user input rather than numerical preconditions.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::UnknownPreset(_)
                | Error::UnknownSuite(_)
                | Error::Config(_)
                | Error::Json(_)
                | Error::Syntax { .. }
                | Error::UnknownIdentifier { .. }
                | Error::Io(_)
                | Error::Csv(_)
        )
    }
}
