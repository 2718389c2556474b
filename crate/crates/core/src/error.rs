use thiserror::Error;

/// Errors raised by the codec, the stream format and the compressed-domain operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("non-finite input value at index {index}")]
    NonFinite { index: usize },

    #[error("quantization bin overflows 63-bit range")]
    QuantOverflow,

    #[error("block outlier {value} does not fit in a signed 32-bit integer")]
    OutlierOverflow { value: i64 },

    #[error("bad magic number")]
    BadMagic,

    #[error("unsupported stream version {found} (expected {expected})")]
    VersionMismatch { found: u16, expected: u16 },

    #[error("stream truncated: needed {needed} bytes, have {available}")]
    TruncatedStream { needed: usize, available: usize },

    #[error("stream geometry mismatch: {0}")]
    GeometryMismatch(String),

    #[error("operand parameters differ: {0}")]
    ParamsMismatch(String),

    #[error("SSIM undefined: both operands have zero value range")]
    DegenerateSsim,
}

impl Error {
    /// Stable machine-readable identifier, used by the CLI on stderr.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParams(_) => "InvalidParams",
            Error::NonFinite { .. } => "NonFinite",
            Error::QuantOverflow => "QuantOverflow",
            Error::OutlierOverflow { .. } => "OutlierOverflow",
            Error::BadMagic => "BadMagic",
            Error::VersionMismatch { .. } => "VersionMismatch",
            Error::TruncatedStream { .. } => "TruncatedStream",
            Error::GeometryMismatch(_) => "GeometryMismatch",
            Error::ParamsMismatch(_) => "ParamsMismatch",
            Error::DegenerateSsim => "DegenerateSsim",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
