use thiserror::Error;

/// Errors raised across geometry, space assembly, operators and certification.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("target has zero measure")]
    EmptyTarget,

    #[error("monomial degree {requested} exceeds the quadrature limit {max}")]
    DegreeExceeded { requested: usize, max: usize },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("mesh parse error at line {line}: {message}")]
    MeshParse { line: usize, message: String },

    #[error("basis orthonormalization is ill-conditioned (condition estimate {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("trace forms need a polygon mesh domain")]
    UnsupportedTrace,

    #[error("kind mismatch: {0}")]
    KindMismatch(String),

    #[error("boundary portion is flat: affine functions are not determined by their trace")]
    FlatPortion,

    #[error("functional is not normalized: phi(1) = {value}")]
    NotNormalized { value: f64 },

    #[error("operators live on different spaces or null spaces")]
    SpaceMismatch,

    #[error("numerical kernel has dimension {found}, expected {expected}")]
    DegenerateKernel { expected: usize, found: usize },

    #[error("kernel of the seminorm has dimension {found}, operator null space has {expected}")]
    KernelMismatch { expected: usize, found: usize },

    #[error("missing input for bound formula: {0}")]
    MissingInput(&'static str),

    #[error("boundary portion is not flat")]
    NotFlat,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("linear algebra failure: {0}")]
    Linalg(String),
}

pub type Result<T> = std::result::Result<T, Error>;
