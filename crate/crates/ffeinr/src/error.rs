use std::io;

#[derive(Debug, thiserror::Error)]
pub enum FfError {
    #[error(transparent)]
    Core(#[from] ffeinr_core::Error),
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("format error: {0}")]
    Format(String),
    #[error("truncated data: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("checksum mismatch in section {section}: stored {stored:#010x}, computed {computed:#010x}")]
    Checksum { section: u32, stored: u32, computed: u32 },
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("png encoding failed: {0}")]
    Png(#[from] png::EncodingError),
}

impl FfError {
    pub fn format(msg: impl Into<String>) -> Self {
        Self::Format(msg.into())
    }

    /// Whether the error stems from bad user input rather than a runtime fault.
    pub fn is_argument(&self) -> bool {
        matches!(self, Self::Core(ffeinr_core::Error::Argument(_)) | Self::Config { .. })
    }
}

pub type Result<T, E = FfError> = std::result::Result<T, E>;
