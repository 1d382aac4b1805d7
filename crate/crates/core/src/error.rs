use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("power {power} exceeds the configured bound {max}")]
    PowerBound { power: i64, max: u32 },

    #[error("operator is singular or too ill-conditioned (sigma_min/sigma_max = {ratio:e})")]
    Singular { ratio: f64 },

    #[error("rank deficient: rank {rank} < {expected}")]
    RankDeficient { rank: usize, expected: usize },

    #[error("matrix is not a left inverse (residual {residual:e})")]
    NotLeftInverse { residual: f64 },

    #[error("generator {index} does not have order {order} (residual {residual:e})")]
    NotPeriodic {
        index: usize,
        order: usize,
        residual: f64,
    },

    #[error("frame condition fails: alpha_G = {alpha:e} is below {threshold:e}")]
    NotAFrame { alpha: f64, threshold: f64 },

    #[error("polynomials are not coprime, common factor {factor}")]
    NotCoprime { factor: String },

    #[error("truncation refused: relative tail energy {tail:e} exceeds {limit:e}")]
    TruncationRefused { tail: f64, limit: f64 },

    #[error("representation is not a homomorphism (residual {residual:e})")]
    NotHomomorphic { residual: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
