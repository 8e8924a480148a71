use thiserror::Error;

/// Errors raised by basis construction, state preparation and geometry.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("input vector is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("input states are not orthogonal (overlap {0})")]
    NotOrthogonal(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (residual {0})")]
    NotHermitian(f64),

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("incompatibility undefined: the QFIM vanishes identically")]
    UndefinedIncompatibility,

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("outside small-angle regime: {0}")]
    Regime(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unitary is not generated by the basis algebra (orthogonality residual {0})")]
    NotInGroup(f64),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidDimension(_) => "invalid_dimension",
            Error::DimensionCap { .. } => "dimension_cap",
            Error::NotNormalized(_) => "not_normalized",
            Error::NotOrthogonal(_) => "not_orthogonal",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NotHermitian(_) => "not_hermitian",
            Error::InvalidDensity(_) => "invalid_density",
            Error::UndefinedIncompatibility => "undefined_incompatibility",
            Error::InvalidPovm(_) => "invalid_povm",
            Error::Regime(_) => "regime",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::NotInGroup(_) => "not_in_group",
            Error::Numerical(_) => "numerical",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }

    /// Process exit status: 2 for bad input, 3 for the dimension cap, 4 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DimensionCap { .. } => 3,
            Error::UndefinedIncompatibility | Error::NotInGroup(_) | Error::Numerical(_) => 4,
            Error::Io(_) | Error::Csv(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
