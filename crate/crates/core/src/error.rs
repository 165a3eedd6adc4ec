use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    // Tensor construction and shape checks.
    #[error("invalid shape {0:?}: extents must be >= 1 and at most 4 axes")]
    InvalidShape(Vec<usize>),
    #[error("data length {data} does not match shape {shape:?}")]
    DataLength { shape: Vec<usize>, data: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("zero extent requested")]
    ZeroExtent,

    // MBT decoding.
    #[error("bad magic: expected \"MBT1\", found {0:?}")]
    BadMagic([u8; 4]),
    #[error("unsupported MBT version {0}")]
    UnsupportedVersion(u8),
    #[error("unsupported MBT dtype {0}")]
    UnsupportedDtype(u8),
    #[error("malformed MBT header: {0}")]
    BadHeader(String),
    #[error("truncated payload: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("{0} trailing bytes after payload")]
    TrailingBytes(usize),

    // PGM decoding.
    #[error("not a binary PGM: {0}")]
    BadPgm(String),
    #[error("PGM size mismatch: header declares {expected} pixels, found {found}")]
    PgmSize { expected: usize, found: usize },

    #[error("invalid range: lo ({lo}) must be below hi ({hi})")]
    InvalidRange { lo: f64, hi: f64 },

    // Scan schedules.
    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),
    #[error("rotation requires a square grid, got {h}x{w}")]
    NonSquareRotation { h: usize, w: usize },
    #[error("Hilbert order {0} out of range 1..=8")]
    HilbertOrder(u32),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    // Metric preconditions.
    #[error("metric precondition failed: {0}")]
    MetricPrecondition(String),

    #[error("{path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub(crate) fn json(path: impl AsRef<std::path::Path>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
