use thiserror::Error;

/// Errors raised by validated constructors and operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("quaternion is not unit: |q| = {norm}")]
    NonUnitQuaternion { norm: f64 },

    #[error("matrix is not orthogonal: |g^T g - I| = {residual:e}")]
    NotOrthogonal { residual: f64 },

    #[error("matrix is not a rotation: det = {det}")]
    NotSpecialOrthogonal { det: f64 },

    #[error("matrix is not skew-symmetric: |M + M^T| = {residual:e}")]
    NotSkew { residual: f64 },

    #[error("matrix is not symmetric: |M - M^T| = {residual:e}")]
    NotSymmetric { residual: f64 },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("operator violates the first Bianchi identity: defect {defect:e} exceeds {tolerance:e}")]
    BianchiViolation { defect: f64, tolerance: f64 },

    #[error("{which} part is not traceless: trace = {trace:e}")]
    NotTraceless { which: &'static str, trace: f64 },

    #[error("unknown model name {0:?}")]
    UnknownModel(String),

    #[error("model scale must be positive, got {0}")]
    NonPositiveScale(f64),

    #[error("operator lies outside the {cone} cone: margin {margin:e}")]
    OutsideCone { cone: &'static str, margin: f64 },

    #[error("invalid flow parameters: {0}")]
    InvalidFlowParams(String),

    #[error("normalized flow requires positive initial scalar curvature, got {0}")]
    NonPositiveScalar(f64),

    #[error("witness precondition violated: {0}")]
    WitnessPrecondition(String),

    #[error("rotation lift failed: residual {residual:e}")]
    LiftResidual { residual: f64 },

    #[error("basis string mismatch: expected {expected:?}, found {found:?}")]
    BasisMismatch { expected: String, found: String },

    #[error("malformed matrix: {0}")]
    MalformedMatrix(String),

    #[error("malformed JSON: {0}")]
    Json(String),

    #[error("csv: {0}")]
    Csv(String),

    #[error("sample count must be at least 1")]
    NoSamples,
}

pub type Result<T> = std::result::Result<T, Error>;
