use thiserror::Error;

/// Everything that can go wrong in the modelling pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("config: missing required key `{0}`")]
    MissingKey(String),
    #[error("config: invalid value for `{key}`: {reason}")]
    InvalidValue { key: String, reason: String },
    #[error("config line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("zero perturbation")]
    ZeroPerturbation,
    #[error("theta non-positive at node {node} (value {value:e})")]
    NonPositiveTheta { node: usize, value: f64 },
    #[error("CFL violation: Courant number {courant:.4} exceeds stability bound {bound}")]
    Cfl { courant: f64, bound: f64 },
    #[error("non-finite field value at step {step}")]
    NonFinite { step: usize },
    #[error("level {level}: {source}")]
    Level {
        level: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("inner product mismatch: {0}")]
    InnerProductMismatch(String),
    #[error("singular reduced matrix (inadmissible alpha or broken basis)")]
    SingularReduced,
    #[error("empty input: {0}")]
    Empty(String),
    #[error("misuse: {0}")]
    Misuse(String),
    #[error("bad file format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(key: &str, reason: impl Into<String>) -> Self {
        Error::InvalidValue {
            key: key.to_string(),
            reason: reason.into(),
        }
    }

    pub(crate) fn at_level(self, level: usize) -> Self {
        Error::Level {
            level,
            source: Box::new(self),
        }
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Cfl { .. }
            | Error::NonFinite { .. }
            | Error::SingularReduced
            | Error::NonPositiveTheta { .. } => true,
            Error::Level { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
