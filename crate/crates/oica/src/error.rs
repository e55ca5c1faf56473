use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum OicaError {
    /// Covariance does not span the full signal dimension.
    #[error("rank deficient: eigenvalue {value:.6e} below floor {floor:.6e}")]
    RankDeficient { value: f64, floor: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Kurtosis at or below -2; the contrast is undefined there.
    #[error("contrast undefined for kurtosis {alpha} (must exceed -2)")]
    DomainError { alpha: f64 },

    /// A candidate vector vanished after projection onto the complement of
    /// the already extracted components.
    #[error("candidate vector degenerated under projection")]
    DegenerateCandidate,

    /// A candidate row's Newton update vanished before normalization.
    #[error("candidate row {row} degenerated before normalization")]
    DegenerateRow { row: usize },

    #[error("all {candidates} candidates degenerated")]
    AllCandidatesDegenerate { candidates: usize },

    /// The leading rows of the deflation projector do not span the
    /// orthogonal complement.
    #[error("complement basis ill-conditioned: min eigenvalue {value:.6e}")]
    IllConditionedComplement { value: f64 },

    #[error("zero vector has no direction")]
    ZeroVector,

    #[error("no well-conditioned mixing matrix found in {attempts} attempts")]
    MixingGenerationFailed { attempts: usize },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("{path}: {detail}")]
    Format { path: String, detail: String },

    #[error("checksum mismatch for {path}: stored {stored}, computed {computed}")]
    ChecksumMismatch {
        path: String,
        stored: String,
        computed: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, OicaError>;
