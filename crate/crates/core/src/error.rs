use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failures while decoding a binary PGM stream.
#[derive(Debug, Error)]
pub enum PgmError {
    #[error("bad magic number: expected \"P5\"")]
    BadMagic,
    #[error("malformed PGM header: invalid or missing {0}")]
    MalformedHeader(&'static str),
    #[error("unsupported maxval {0} (only 255 is supported)")]
    UnsupportedMaxval(u64),
    #[error("truncated payload: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid image dimensions {width}x{height}")]
    InvalidDimensions { width: usize, height: usize },
    #[error("pixel buffer has {found} values, expected {expected}")]
    PixelCount { expected: usize, found: usize },
    #[error("intensity {value} at index {index} is outside [0, 255]")]
    IntensityOutOfRange { index: usize, value: f64 },
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("invalid noise parameters: {0}")]
    NoiseParams(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("duplicate interpolation center at ({row}, {col})")]
    DuplicateCenter { row: usize, col: usize },
    #[error("interpolation system has no centers")]
    EmptySystem,
    #[error("interpolation solve failed after maximum ridge regularization")]
    SolveFailed,
    #[error("pixel ({row}, {col}) is unrestorable: no clean pixel within reach")]
    Unrestorable { row: usize, col: usize },
    #[error("image {height}x{width} is smaller than the {window}x{window} SSIM window")]
    ImageTooSmall { width: usize, height: usize, window: usize },
    #[error("invalid benchmark spec: {0}")]
    BenchSpec(String),
    #[error("{path}: {source}")]
    Pgm {
        path: String,
        #[source]
        source: PgmError,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// Returns true for errors caused by numerics or unrestorable input, as
    /// opposed to bad arguments or I/O.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::SolveFailed | Error::Unrestorable { .. })
    }
}
