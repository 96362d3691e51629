use std::path::PathBuf;

use thiserror::Error;

use crate::frame::PixelPos;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid must be at least 1x1, got {width}x{height}")]
    EmptyGrid { width: usize, height: usize },

    #[error("grid data has {len} cells, expected {width}x{height}")]
    GridData { width: usize, height: usize, len: usize },

    #[error("{what}: size {got_w}x{got_h} does not match {want_w}x{want_h}")]
    DimensionMismatch {
        what: String,
        want_w: usize,
        want_h: usize,
        got_w: usize,
        got_h: usize,
    },

    #[error("a sequence needs at least 2 frames, got {0}")]
    TooFewFrames(usize),

    #[error("no frames given")]
    NoFrames,

    #[error("no .pgm or .png frames found in {0}")]
    EmptyInput(PathBuf),

    #[error("cannot decode image {}", path.display())]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("cannot access {}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{what} has {got} entries, expected {expected}")]
    LengthMismatch {
        what: String,
        expected: usize,
        got: usize,
    },

    #[error("position {pos} lies outside the {width}x{height} frame")]
    OutOfBounds {
        pos: PixelPos,
        width: usize,
        height: usize,
    },

    #[error("replication breakpoints must satisfy left < peak < right, got ({left}, {peak}, {right})")]
    Breakpoints { left: u8, peak: u8, right: u8 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("histogram is empty")]
    EmptyHistogram,

    #[error(
        "no skin component of at least {min_area} pixels in the last frame; \
         pass a manual seed with --seed row,col"
    )]
    NoSeedComponent { min_area: usize },

    #[error("instance has {paths} constrained paths, oracle limit is {limit}")]
    InstanceTooLarge { paths: u128, limit: u128 },

    #[error("invalid scene: {0}")]
    Scene(String),

    #[error("invalid JSON in {}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}
