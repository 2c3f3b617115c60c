use crate::model::Index;

/// Failures raised by validation, evaluation and the solvers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("GapViolation: lambda[{index}] and lambda[{next}] are {actual:e} apart, below the declared gap {declared:e}")]
    GapViolation {
        index: Index,
        next: Index,
        actual: f64,
        declared: f64,
    },
    #[error("NonMonotone: lambda[{index}] = {value} is not below lambda[{next}] = {next_value}")]
    NonMonotone {
        index: Index,
        next: Index,
        value: f64,
        next_value: f64,
    },
    #[error("NonReal: non-finite value in {field} at index {index}")]
    NonReal { field: &'static str, index: Index },
    #[error("invalid document: {0}")]
    InvalidDocument(String),
    #[error("IndexMismatch: {field} starts at index {offset}, outside the index set {set}")]
    IndexMismatch {
        field: &'static str,
        offset: Index,
        set: &'static str,
    },
    #[error("NonSummable: tail of {field} has exponent {beta}, square summability needs beta > 1/2")]
    NonSummable { field: &'static str, beta: f64 },
    #[error("DegenerateIndex: a[{index}] = b[{index}] = 0")]
    DegenerateIndex { index: Index },
    #[error("PoleHit: evaluation point coincides with the pole lambda[{index}] = {lambda}")]
    PoleHit { index: Index, lambda: f64 },
    #[error("IndexNotInI1: c[{index}] = 0")]
    IndexNotInI1 { index: Index },
    #[error("EpsOutOfRange: eps = {eps} must lie in (0, {limit})")]
    EpsOutOfRange { eps: f64, limit: f64 },
    #[error("ContourThroughSingularity: pole at {position} lies within {distance:e} of the contour")]
    ContourThroughSingularity { position: f64, distance: f64 },
    #[error("CertificationFailed: {0}")]
    CertificationFailed(String),
    #[error("NoConvergence: refinement stalled after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("OrderMismatch: expected zero of order {expected}, shrunk contour counted {found}")]
    OrderMismatch { expected: usize, found: i64 },
    #[error("CountMismatch: expected total multiplicity {expected}, found {found}")]
    CountMismatch { expected: usize, found: usize },
    #[error("WindowExceeded: truncation radius {requested} exceeds the explicit window {available}")]
    WindowExceeded { requested: Index, available: Index },
    #[error("DimensionCap: dimension {dim} exceeds the cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("SolverFailure: {0}")]
    SolverFailure(String),
    #[error("CardinalityMismatch: {computed} computed eigenvalues against {reference} reference values")]
    CardinalityMismatch { computed: usize, reference: usize },
    #[error("BetaOutOfRange: beta = {0} must exceed 1")]
    BetaOutOfRange(f64),
    #[error("ZeroCoefficientObstruction: a[{index}] = 0 but c[{index}] != 0")]
    ZeroCoefficientObstruction { index: Index },
    #[error("derivative of order {0} is not available for this function")]
    UnsupportedDerivative(usize),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Short variant name, used for diagnostics and exit-code mapping.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::GapViolation { .. } => "GapViolation",
            Error::NonMonotone { .. } => "NonMonotone",
            Error::NonReal { .. } => "NonReal",
            Error::InvalidDocument(_) => "InvalidDocument",
            Error::IndexMismatch { .. } => "IndexMismatch",
            Error::NonSummable { .. } => "NonSummable",
            Error::DegenerateIndex { .. } => "DegenerateIndex",
            Error::PoleHit { .. } => "PoleHit",
            Error::IndexNotInI1 { .. } => "IndexNotInI1",
            Error::EpsOutOfRange { .. } => "EpsOutOfRange",
            Error::ContourThroughSingularity { .. } => "ContourThroughSingularity",
            Error::CertificationFailed(_) => "CertificationFailed",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::OrderMismatch { .. } => "OrderMismatch",
            Error::CountMismatch { .. } => "CountMismatch",
            Error::WindowExceeded { .. } => "WindowExceeded",
            Error::DimensionCap { .. } => "DimensionCap",
            Error::SolverFailure(_) => "SolverFailure",
            Error::CardinalityMismatch { .. } => "CardinalityMismatch",
            Error::BetaOutOfRange(_) => "BetaOutOfRange",
            Error::ZeroCoefficientObstruction { .. } => "ZeroCoefficientObstruction",
            Error::UnsupportedDerivative(_) => "UnsupportedDerivative",
            Error::Json(_) => "Json",
        }
    }

    /// Whether the failure stems from malformed or inadmissible input.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::GapViolation { .. }
                | Error::NonMonotone { .. }
                | Error::NonReal { .. }
                | Error::InvalidDocument(_)
                | Error::IndexMismatch { .. }
                | Error::NonSummable { .. }
                | Error::DegenerateIndex { .. }
                | Error::BetaOutOfRange(_)
                | Error::ZeroCoefficientObstruction { .. }
                | Error::Json(_)
        )
    }
}
