use thiserror::Error;

pub type Result<T, E = FinslerError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum FinslerError {
    #[error("point outside the admissible domain: {0}")]
    Domain(String),

    #[error("jet order {requested} exceeds the supported maximum {max}")]
    Order { requested: usize, max: usize },

    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("fundamental tensor is singular at this point")]
    SingularMetric,

    #[error("fundamental tensor is not positive definite (min eigenvalue {min_eigenvalue:e})")]
    Convexity { min_eigenvalue: f64 },

    #[error("conformal factor must depend on position only, found `{0}`")]
    FiberDependence(String),

    #[error("unknown identifier `{0}`")]
    UnknownId(String),

    #[error("tensor norm {norm:e} is below tolerance; recurrence is undefined")]
    DegenerateTensor { norm: f64 },

    #[error("admissible cone too thin: {accepted} of {tried} candidate points accepted")]
    ConeTooThin { accepted: usize, tried: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
