use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("face at line {line} has no UV assignment")]
    MissingUv { line: usize },
    #[error("mesh has no faces")]
    EmptyMesh,
    #[error("resolution {width}x{height} is below the minimum of {min}")]
    ResolutionTooSmall { width: u32, height: u32, min: u32 },
    #[error("mismatched resolutions: expected {expected:?}, found {found:?}")]
    MismatchedResolutions {
        expected: (u32, u32),
        found: (u32, u32),
    },
    #[error("value {0} is outside the cosine domain [-1, 1]")]
    Domain(f64),
    #[error("no neighbors supplied")]
    NoNeighbors,
    #[error("texel cloud has no painted seed points")]
    NoPaintedSeed,
    #[error("{0} cloud points are still unpainted")]
    UnpaintedPoints(usize),
    #[error("seam mask covers every cloud point; nothing to smooth from")]
    NoNonSeamPoints,
    #[error("upscaler mismatch: {0}")]
    UpscalerMismatch(String),
    #[error("unknown color field `{0}`")]
    UnknownField(String),
    #[error("invalid camera: {0}")]
    InvalidCamera(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("view set is inconsistent: {0}")]
    InvalidViewSet(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub(crate) fn write_json<T: serde::Serialize>(path: &std::path::Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        source: e,
    })?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
