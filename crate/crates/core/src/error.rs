use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dataset has no instances")]
    EmptyDataset,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-finite value at instance {instance}, index {index}")]
    NonFiniteValue { instance: usize, index: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("external oracle timed out after {0:.1}s")]
    OracleTimeout(f64),

    #[error("external oracle protocol error: {0}")]
    OracleProtocol(String),

    #[error("oracle is not differentiable")]
    NotDifferentiable,

    #[error("oracle cannot answer new queries (precomputed predictions only)")]
    OracleRequired,

    #[error("dataset has no class labels")]
    MissingLabels,

    #[error("degenerate linear system (condition estimate {condition:.3e})")]
    DegenerateSystem { condition: f64 },

    #[error("exact Shapley supports at most 20 features, got {0}")]
    TooManyFeatures(usize),

    #[error("patch size {patch} does not fit a {height}x{width} image")]
    PatchTooLarge { patch: usize, height: usize, width: usize },

    #[error("expected {expected} saliency maps, got {got}")]
    CountMismatch { expected: usize, got: usize },

    #[error("cannot rescale {from:?} saliency maps to {to:?}")]
    ShapeUnrescalable { from: (usize, usize), to: (usize, usize) },

    #[error("explainer cannot be re-run on perturbed inputs")]
    ExplainerNotReRunnable,

    #[error("group `{0}` has no instances")]
    GroupSizeZero(String),

    #[error("weights are not normalized (sum {sum})")]
    WeightsNotNormalized { sum: f64 },

    #[error("unknown profile `{0}`")]
    UnknownProfile(String),

    #[error("reference dataset needs at least {needed} instances, got {got}")]
    InsufficientReference { needed: usize, got: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("instance {id}: {source}")]
    Instance {
        id: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("method `{name}`: {source}")]
    Method {
        name: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Broad failure class, used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Data,
    Oracle,
    Internal,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Config => 1,
            ErrorClass::Data => 2,
            ErrorClass::Oracle => 3,
            ErrorClass::Internal => 4,
        }
    }
}

impl Error {
    pub fn io(context: impl Into<String>, source: io::Error) -> Self {
        Error::Io { context: context.into(), source }
    }

    pub fn in_instance(self, id: usize) -> Self {
        match self {
            e @ Error::Instance { .. } => e,
            e => Error::Instance { id, source: Box::new(e) },
        }
    }

    pub fn in_method(self, name: &str) -> Self {
        Error::Method { name: name.to_string(), source: Box::new(self) }
    }

    /// The innermost error, with instance/method annotations removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::Instance { source, .. } | Error::Method { source, .. } => source.root(),
            e => e,
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self.root() {
            Error::InvalidConfig(_)
            | Error::UnknownProfile(_)
            | Error::WeightsNotNormalized { .. }
            | Error::TooManyFeatures(_)
            | Error::PatchTooLarge { .. }
            | Error::ExplainerNotReRunnable
            | Error::Json(_) => ErrorClass::Config,
            Error::EmptyDataset
            | Error::ShapeMismatch(_)
            | Error::NonFiniteValue { .. }
            | Error::DimensionMismatch { .. }
            | Error::MissingLabels
            | Error::CountMismatch { .. }
            | Error::ShapeUnrescalable { .. }
            | Error::GroupSizeZero(_)
            | Error::InsufficientReference { .. }
            | Error::InvalidData(_)
            | Error::Csv(_)
            | Error::Io { .. } => ErrorClass::Data,
            Error::OracleTimeout(_)
            | Error::OracleProtocol(_)
            | Error::NotDifferentiable
            | Error::OracleRequired => ErrorClass::Oracle,
            Error::DegenerateSystem { .. } | Error::Instance { .. } | Error::Method { .. } => {
                ErrorClass::Internal
            }
        }
    }
}
