use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    /// Relative-boundedness conditions on the coupling fail; the light-cone
    /// estimates give no guarantee for such a model.
    #[error("conditions-violated: alpha4 = {alpha4:.6}, alpha5 = {alpha5:.6} (both must be < 1)")]
    ConditionsViolated { alpha4: f64, alpha5: f64 },

    #[error("numerical error at zeta = {re} + {im}i: {what}")]
    NonFinite { re: f64, im: f64, what: String },

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("insufficient samples: {usable} usable, {required} required")]
    InsufficientSamples { usable: usize, required: usize },

    #[error("degenerate design matrix: samples span a single {0} value")]
    DegenerateDesign(&'static str),

    #[error("check failed: {0}")]
    CheckFailed(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("record mismatch: config hash {left} differs from {right}")]
    HashMismatch { left: String, right: String },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Innermost error, skipping context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }
}
