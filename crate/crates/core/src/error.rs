use thiserror::Error;

/// Errors produced by the model, symmetry and solver layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("site {site} out of range for chain of length {n}")]
    SiteOutOfRange { site: usize, n: usize },

    #[error("bond {bond} out of range for chain of length {n}")]
    BondOutOfRange { bond: usize, n: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("operator is not unitary (deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("operator is neither unitary nor Hermitian; cannot decompose")]
    NotNormal,

    #[error("eigenphases {0:e} apart are closer than the clustering tolerance")]
    AmbiguousEigenphases(f64),

    #[error("refining operator maps sector(s) {sectors:?} off themselves")]
    SectorMixing { sectors: Vec<String> },

    #[error("block {block} is not invariant: relative leakage {leakage:e}")]
    LeakageDetected { block: String, leakage: f64 },

    #[error("no trace-bearing null vector in block {0}")]
    NoTraceBearingNullVector(String),

    #[error("no positive combination of null vectors (min eigenvalue {min_eig:e})")]
    PositivityFailure { min_eig: f64 },

    #[error("spectrum has no nonzero modes")]
    NoNonzeroModes,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("dimension {dim} exceeds dense cap {cap}")]
    DimensionOverCap { dim: usize, cap: usize },

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("trajectory pathology: {0}")]
    TrajectoryPathology(String),

    #[error("expectation value has significant imaginary part {0:e}")]
    SignificantImaginary(f64),

    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
