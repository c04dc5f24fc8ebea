use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape mismatch at level {level}: expected {expected} components, found {found}")]
    ShapeMismatch {
        level: usize,
        expected: usize,
        found: usize,
    },
    #[error("symbol vanishes on the probed range [{j_min}, {j_max}]")]
    ZeroSymbol { j_min: u64, j_max: u64 },
    #[error("defective (non-diagonalizable) mode at j = {j}")]
    Defective { j: u64 },
    #[error("omega = {re} + {im}i has both parts nonzero; use eigen2")]
    MixedOmega { re: f64, im: f64 },
    #[error("beta^2 j^2 <= gamma_j^2 at j = {j}")]
    SmallJ { j: u64 },
    #[error("decimal digits certify only {certified} partial quotients, {requested} requested")]
    PrecisionExhausted { certified: usize, requested: usize },
    #[error("expansion has {available} convergents on the requested side, {requested} requested")]
    ExhaustedExpansion { available: usize, requested: usize },
    #[error("exact integer eigenvalue at ell = {ell}")]
    IntegerHit { ell: usize },
    #[error("alpha is rational")]
    RationalAlpha,
    #[error("omega = 0: the unperturbed eigenvalues collide")]
    ZeroOmega,
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("eigenvector matrix near singular: det margin {margin:e}")]
    NearSingular { margin: f64 },
    #[error("witness needs at least one pick")]
    EmptyPicks,
    #[error("integer eigenvalue {sigma} at (j, m) = {location:?}")]
    IntegerSigma {
        sigma: f64,
        location: Option<(usize, usize)>,
    },
    #[error("eigenvalue within {distance:e} of an integer; prefactor blows up")]
    ResonanceNear { distance: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("schema error at {pointer}: {message}")]
    Schema { pointer: String, message: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    /// Short machine-readable tag used in reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ShapeMismatch { .. } => "ShapeMismatch",
            Error::ZeroSymbol { .. } => "ZeroSymbol",
            Error::Defective { .. } => "Defective",
            Error::MixedOmega { .. } => "MixedOmega",
            Error::SmallJ { .. } => "SmallJ",
            Error::PrecisionExhausted { .. } => "PrecisionExhausted",
            Error::ExhaustedExpansion { .. } => "ExhaustedExpansion",
            Error::IntegerHit { .. } => "IntegerHit",
            Error::RationalAlpha => "RationalAlpha",
            Error::ZeroOmega => "ZeroOmega",
            Error::ParameterOutOfRange(_) => "ParameterOutOfRange",
            Error::NearSingular { .. } => "NearSingular",
            Error::EmptyPicks => "EmptyPicks",
            Error::IntegerSigma { .. } => "IntegerSigma",
            Error::ResonanceNear { .. } => "ResonanceNear",
            Error::InvalidInput(_) => "InvalidInput",
            Error::Schema { .. } => "Schema",
            Error::Io { .. } => "Io",
        }
    }
}
