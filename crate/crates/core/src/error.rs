use std::path::PathBuf;

/// Errors produced by the panorama pipeline and its file formats.
#[derive(thiserror::Error, Debug)]
pub enum Error {
    #[error("rotation is not orthonormal with det +1 (max deviation {deviation:e})")]
    InvalidRotation { deviation: f64 },
    #[error("invalid camera intrinsics: {0}")]
    InvalidIntrinsics(String),
    #[error("invalid panorama geometry {width}x{height}: width must be 2*height, both even and positive")]
    InvalidPanoGeometry { width: u32, height: u32 },
    #[error("point is behind the camera (z = {z})")]
    PointBehindCamera { z: f64 },
    #[error("depth must be positive, got {0}")]
    NonPositiveDepth(f64),
    #[error("zero-length vector has no spherical direction")]
    ZeroVector,
    #[error("pixel ({u}, {v}) is outside the {width}x{height} panorama")]
    PixelOutOfRange { u: f64, v: f64, width: u32, height: u32 },
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("sparse depth map has no valid samples")]
    NoValidSamples,
    #[error("invalid densify parameters: {0}")]
    InvalidParams(String),
    #[error("frame convention mismatch: expected {expected}, found {found}")]
    ConventionMismatch { expected: String, found: String },
    #[error("overlap has no exclusive pixels for {0}; fallback seeding required")]
    DegenerateOverlap(&'static str),
    #[error("seam graph needs at least one source and one sink pixel")]
    MissingTerminals,
    #[error("pixel ({x}, {y}) is not valid in both images")]
    InvalidSeamPixel { x: u32, y: u32 },
    #[error("cannot build {levels} pyramid levels on a {width}x{height} image")]
    TooManyLevels { levels: usize, width: u32, height: u32 },
    #[error("invalid depth at pano pixel ({u}, {v})")]
    InvalidDepthAt { u: f64, v: f64 },
    #[error("no neighboring stations available to fill the nadir band")]
    NoNeighbors,
    #[error("station bundle is invalid: {0}")]
    InvalidBundle(String),
    #[error("depth {0} m exceeds the 16-bit millimeter range")]
    DepthOutOfRange(f64),
    #[error("{path}:{line}: {message}")]
    Malformed { path: PathBuf, line: usize, message: String },
    #[error("failed to parse {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{context}: {message}")]
    Invariant { context: String, message: String },
    #[error("degenerate scene: {0}")]
    DegenerateScene(String),
    #[error("image error for {path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error("io error for {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
