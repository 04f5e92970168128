use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong across the pipeline.
///
/// Variants are grouped by origin: EPO1 file decoding, dataset shape and
/// preprocessing, covariance/eigen numerics, and experiment configuration.
#[derive(Debug, Error)]
pub enum Error {
    // --- EPO1 file format ---
    #[error("bad magic: expected \"EPO1\"")]
    BadMagic,
    #[error("unsupported EPO1 version {0} (expected 1)")]
    UnsupportedVersion(u32),
    #[error("truncated EPO1 payload: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("trailing bytes after EPO1 payload")]
    TrailingBytes,
    #[error("label byte {0} is not 0 or 1")]
    BadLabel(u8),
    #[error("non-finite sample in epoch {epoch}")]
    NonFiniteSample { epoch: usize },
    #[error("sample rate must be positive and finite, got {0}")]
    BadSampleRate(f64),

    // --- dataset shape and preprocessing ---
    #[error("dataset has no epochs")]
    EmptyDataset,
    #[error("epoch {epoch} has shape {got_channels}x{got_samples}, expected {channels}x{samples}")]
    InconsistentShape {
        epoch: usize,
        got_channels: usize,
        got_samples: usize,
        channels: usize,
        samples: usize,
    },
    #[error("epoch needs at least 2 channels, got {0}")]
    TooFewChannels(usize),
    #[error("invalid window [{t_start}, {t_end}] s for an epoch of {duration} s")]
    InvalidWindow {
        t_start: f64,
        t_end: f64,
        duration: f64,
    },
    #[error("FIR tap count {0} must be odd")]
    EvenTaps(usize),
    #[error("FIR tap count {0} must be at least 3")]
    TooFewTaps(usize),
    #[error("invalid band [{lo}, {hi}] Hz for sample rate {fs} Hz")]
    InvalidBand { lo: f64, hi: f64, fs: f64 },
    #[error("epoch of {samples} samples is too short for a {taps}-tap filter")]
    EpochTooShort { samples: usize, taps: usize },
    #[error("invalid synthesis parameters: {0}")]
    BadSynthParams(String),
    #[error("could not draw a mixing matrix with condition number <= {kappa} in {attempts} attempts")]
    MixingRejected { kappa: f64, attempts: usize },

    // --- covariance / linear algebra ---
    #[error("class {0} has no epochs")]
    MissingClass(u8),
    #[error("matrix dimensions {rows_a}x{cols_a} and {rows_b}x{cols_b} do not match")]
    DimensionMismatch {
        rows_a: usize,
        cols_a: usize,
        rows_b: usize,
        cols_b: usize,
    },
    #[error("matrix is not symmetric within tolerance")]
    NotSymmetric,
    #[error("matrix has non-finite entries")]
    NonFiniteMatrix,
    #[error("negative regularization parameter {0}")]
    NegativeLambda(f64),
    #[error("eigendecomposition did not converge")]
    EigFailed,
    #[error("covariance is singular or near-singular; consider regularize()")]
    SingularCovariance,
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    // --- filter banks and classifiers ---
    #[error("filter count {c_prime} must be even and between 2 and {channels}")]
    InvalidCPrime { c_prime: usize, channels: usize },
    #[error("degenerate filter: zero projected variance")]
    DegenerateFilter,
    #[error("subspace dimension {k} must be between 1 and {channels}")]
    InvalidSubspaceDim { k: usize, channels: usize },

    // --- experiments ---
    #[error("too few trials: {0}")]
    TooFewTrials(String),
    #[error("invalid experiment configuration: {0}")]
    BadConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Coarse error category used by the CLI to pick an exit code.
    pub fn category(&self) -> ErrorCategory {
        use Error::*;
        match self {
            BadConfig(_) | NegativeLambda(_) | InvalidCPrime { .. } | InvalidSubspaceDim { .. }
            | BadSynthParams(_) | Json(_) => ErrorCategory::Config,
            BadMagic | UnsupportedVersion(_) | Truncated { .. } | TrailingBytes | BadLabel(_)
            | NonFiniteSample { .. } | BadSampleRate(_) | EmptyDataset
            | InconsistentShape { .. } | TooFewChannels(_) | InvalidWindow { .. }
            | EvenTaps(_) | TooFewTaps(_) | InvalidBand { .. } | EpochTooShort { .. }
            | MissingClass(_) | TooFewTrials(_) | Io(_) => ErrorCategory::Data,
            EigFailed | SingularCovariance | NotPositiveDefinite | DegenerateFilter
            | NotSymmetric | NonFiniteMatrix | DimensionMismatch { .. } | MixingRejected { .. } => {
                ErrorCategory::Numerical
            }
        }
    }
}

/// Exit-code buckets for the CLI: config errors, data errors, numerical failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Data,
    Numerical,
}
