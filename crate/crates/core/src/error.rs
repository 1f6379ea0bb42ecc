use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {}", path.display())]
    MissingFile { path: PathBuf },

    #[error("unsupported PNG {}: {detail}", path.display())]
    UnsupportedFormat { path: PathBuf, detail: String },

    #[error("failed to decode {}: {detail}", path.display())]
    Decode { path: PathBuf, detail: String },

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),

    #[error("dimension mismatch: {left_h}x{left_w} vs {right_h}x{right_w}")]
    DimensionMismatch {
        left_h: usize,
        left_w: usize,
        right_h: usize,
        right_w: usize,
    },

    #[error("sample out of range [0,1] at index {index}: {value}")]
    SampleOutOfRange { index: usize, value: f32 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("window {top},{left} {h}x{w} does not fit inside {height}x{width}")]
    OutOfBounds {
        top: usize,
        left: usize,
        h: usize,
        w: usize,
        height: usize,
        width: usize,
    },

    #[error("frame index {index} outside the synthesizable range {lo}..={hi}")]
    IndexOutOfRange { index: usize, lo: usize, hi: usize },

    #[error("clip of {len} frames is shorter than the required {required}")]
    ClipTooShort { len: usize, required: usize },

    #[error("cannot place {requested} non-overlapping windows of {clip_len} frames in a video of {available} frames")]
    InsufficientFrames {
        requested: usize,
        clip_len: usize,
        available: usize,
    },

    #[error("frame counts differ: {left} vs {right}")]
    FrameCountMismatch { left: usize, right: usize },

    #[error("jpeg: {0}")]
    Jpeg(String),

    #[error("manifest: {0}")]
    Manifest(String),

    #[error("json error on {}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable tag used in structured CLI errors.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::MissingFile { .. } => "missing_file",
            Error::UnsupportedFormat { .. } => "unsupported_format",
            Error::Decode { .. } => "decode",
            Error::Io { .. } => "io",
            Error::InvalidDimensions(_) => "invalid_dimensions",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::SampleOutOfRange { .. } => "sample_out_of_range",
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::OutOfBounds { .. } => "out_of_bounds",
            Error::IndexOutOfRange { .. } => "index_out_of_range",
            Error::ClipTooShort { .. } => "clip_too_short",
            Error::InsufficientFrames { .. } => "insufficient_frames",
            Error::FrameCountMismatch { .. } => "frame_count_mismatch",
            Error::Jpeg(_) => "jpeg",
            Error::Manifest(_) => "manifest",
            Error::Json { .. } => "json",
        }
    }
}
