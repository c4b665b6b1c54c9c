use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max asymmetry {max_asymmetry:e})")]
    NonHermitianInput { max_asymmetry: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("ambient dimension {ambient} is smaller than numerical rank {rank}")]
    AmbientTooSmall { rank: usize, ambient: usize },

    #[error("Gram matrices differ (max entry deviation {max_deviation:e})")]
    GramMismatch { max_deviation: f64 },

    #[error("input vectors are linearly dependent")]
    DependentInputs,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state pair is linearly dependent (|det| = {det_modulus:e})")]
    LinearlyDependentPair { det_modulus: f64 },

    #[error("invalid probe overlap matrix: {0}")]
    InvalidProbeOverlap(String),

    #[error("efficiency {value} outside [0, 1]")]
    EffOutOfRange { value: f64 },

    #[error("efficiency is infeasible (residual min eigenvalue {min_eigenvalue:e})")]
    InfeasibleEfficiency { min_eigenvalue: f64 },

    #[error("success probability {probability:e} is effectively zero")]
    ZeroSuccessProbability { probability: f64 },

    #[error("invalid gate coefficients: {0}")]
    InvalidGate(String),

    #[error("parse error: {0}")]
    ParseError(String),

    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },
}

impl Error {
    /// Stable name used in structured reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonHermitianInput { .. } => "NonHermitianInput",
            Error::NotPsd { .. } => "NotPsd",
            Error::AmbientTooSmall { .. } => "AmbientTooSmall",
            Error::GramMismatch { .. } => "GramMismatch",
            Error::DependentInputs => "DependentInputs",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::LinearlyDependentPair { .. } => "LinearlyDependentPair",
            Error::InvalidProbeOverlap(_) => "InvalidProbeOverlap",
            Error::EffOutOfRange { .. } => "EffOutOfRange",
            Error::InfeasibleEfficiency { .. } => "InfeasibleEfficiency",
            Error::ZeroSuccessProbability { .. } => "ZeroSuccessProbability",
            Error::InvalidGate(_) => "InvalidGate",
            Error::ParseError(_) => "ParseError",
            Error::NotNormalized { .. } => "NotNormalized",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
