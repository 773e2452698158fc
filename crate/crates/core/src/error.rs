use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what} not found: {}", path.display())]
    MissingInput { what: &'static str, path: PathBuf },

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("ISM supports empty shoeboxes only (scene has {0} interior boxes)")]
    IsmRequiresEmptyShoebox(usize),

    #[error("duration {duration_s} s is shorter than the direct-path delay {delay_s} s")]
    DurationTooShort { duration_s: f64, delay_s: f64 },

    #[error("index {index} out of range for {what} (len {len})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("sample-rate mismatch: {0} Hz vs {1} Hz")]
    SampleRateMismatch(f64, f64),

    #[error("cutoff {cutoff_hz} Hz is not below Nyquist ({nyquist_hz} Hz)")]
    CutoffAboveNyquist { cutoff_hz: f64, nyquist_hz: f64 },

    #[error(
        "window/hop pair does not satisfy the overlap-add condition (fft {fft_size}, hop {hop})"
    )]
    NonCola { fft_size: usize, hop: usize },

    #[error("sample rate {0} Hz is too low for the octave filterbank (need >= {1} Hz)")]
    SampleRateTooLow(f64, f64),

    #[error("voxel size {dx} m is too coarse (must be <= {max} m)")]
    VoxelTooCoarse { dx: f64, max: f64 },

    #[error("Courant number {0} outside (0, 1/sqrt(3)]")]
    CourantViolation(f64),

    #[error("{what} at {position} lies in a solid cell")]
    PositionInSolid { what: String, position: String },

    #[error("receiver grid is empty: {0}")]
    EmptyGrid(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("insufficient entries: condition has {available}, need more than {required}")]
    InsufficientEntries { available: usize, required: usize },

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("value out of range in {location}: {message}")]
    OutOfRange { location: String, message: String },

    #[error("manifest entry {index}: true_distance differs from geometry by {delta:.3e} m")]
    DistanceMismatch { index: usize, delta: f64 },

    #[error("duplicate key {0}")]
    DuplicateKey(String),

    #[error("unknown key {0}")]
    UnknownKey(String),

    #[error("fewer than 2 matched pairs ({matched} matched)")]
    TooFewPairs { matched: usize },

    #[error("undefined correlation: {0} has zero variance")]
    ZeroVariance(&'static str),

    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("WAV error on {path}: {source}")]
    Wav {
        path: PathBuf,
        #[source]
        source: hound::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Process exit code: 2 missing input, 3 empty or degenerate data, 4 numerical
    /// failure, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::MissingInput { .. } => 2,
            Error::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => 2,
            Error::Degenerate(_)
            | Error::EmptyGrid(_)
            | Error::InsufficientEntries { .. }
            | Error::TooFewPairs { .. }
            | Error::ZeroVariance(_) => 3,
            Error::Numerical(_) => 4,
            _ => 1,
        }
    }

    /// Short machine-readable error kind, e.g. `corpus_not_found`.
    pub fn kind(&self) -> String {
        match self {
            Error::MissingInput { what, .. } => format!("{}_not_found", what.replace(' ', "_")),
            Error::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => {
                "input_not_found".into()
            }
            Error::InvalidArgument(_) => "invalid_argument".into(),
            Error::InvalidScene(_)
            | Error::IsmRequiresEmptyShoebox(_)
            | Error::PositionInSolid { .. } => "invalid_scene".into(),
            Error::Degenerate(_) => "degenerate_input".into(),
            Error::EmptyGrid(_) => "empty_grid".into(),
            Error::InsufficientEntries { .. } => "insufficient_entries".into(),
            Error::TooFewPairs { .. } => "too_few_pairs".into(),
            Error::ZeroVariance(_) => "zero_variance".into(),
            Error::Numerical(_) => "numerical_failure".into(),
            Error::Parse { .. } => "parse_error".into(),
            Error::OutOfRange { .. } => "out_of_range".into(),
            Error::UnknownKey(_) => "unknown_key".into(),
            Error::DuplicateKey(_) => "duplicate_key".into(),
            Error::Io { .. } | Error::Wav { .. } => "io_error".into(),
            _ => "error".into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.to_string(),
        }
    }
}
