use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid spin label {0}: must be a non-negative multiple of 1/2")]
    InvalidSpin(f64),
    #[error("group element invariant violated: {0}")]
    NotSu2(String),
    #[error("quadrature self-test failed: worst Schur residual {residual:.3e} at {detail}")]
    QuadratureSelfTest { residual: f64, detail: String },
    #[error("band {requested} exceeds what the grid integrates exactly ({available})")]
    GridTooCoarse { requested: String, available: String },
    #[error("band mismatch: {0}")]
    BandMismatch(String),
    #[error("spectral mass {lost:.3e} (relative) would be discarded; request truncation explicitly")]
    SilentTruncation { lost: f64 },
    #[error("window partition identity residual {0:.3e} exceeds 1e-8")]
    WindowPartition(f64),
    #[error("moment matrix is rank deficient: rank {rank} of {size} (smallest singular value {sigma_min:.3e})")]
    RankDeficient { rank: usize, size: usize, sigma_min: f64 },
    #[error("spectral radius {radius:.3e} outside the analyticity disk of radius {limit:.3e}")]
    OutsideAnalyticity { radius: f64, limit: f64 },
    #[error("admissible cutoff violates {0}")]
    CutoffViolation(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
