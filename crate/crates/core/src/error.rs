use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("PLY parse error at line {line}: {message}")]
    PlyHeader { line: usize, message: String },

    #[error("PLY body error: {message}")]
    PlyBody { message: String },

    #[error("PLY body truncated: expected {expected} bytes, found {actual}")]
    PlyTruncated { expected: usize, actual: usize },

    #[error("PGM parse error: {0}")]
    PgmParse(String),

    #[error("mask '{0}' contains no leaf pixels")]
    EmptyMask(String),

    #[error("point cloud has no grid metadata; organized cloud required")]
    MissingGrid,

    #[error("grid {cloud_w}x{cloud_h} does not match mask {mask_w}x{mask_h}")]
    GridMismatch {
        cloud_w: u32,
        cloud_h: u32,
        mask_w: u32,
        mask_h: u32,
    },

    #[error("too few points: need at least {needed}, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("all {0} RANSAC iterations drew degenerate (collinear) samples")]
    DegenerateSamples(usize),

    #[error("best RANSAC model has {best} inliers, below minimum {min}")]
    BelowMinInliers { best: usize, min: usize },

    #[error("fewer than 3 distinct projected points")]
    DegenerateProjection,

    #[error("leaf id mismatch: '{a}' vs '{b}'")]
    LeafIdMismatch { a: String, b: String },

    #[error("method mismatch: expected {expected}, got {got}")]
    MethodMismatch { expected: String, got: String },

    #[error("sequence length mismatch: {a} vs {b}")]
    LengthMismatch { a: usize, b: usize },

    #[error("empty input sequence")]
    EmptyInput,

    #[error("ground truth is constant; R^2 is undefined")]
    ConstantTruth,

    #[error("only {got} leaf ids match between measurements and ground truth; need at least 2")]
    TooFewMatches { got: usize },

    #[error("manifest error: {0}")]
    Manifest(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    #[error("csv error: {0}")]
    Csv(String),

    #[error("calibration failed: {0}")]
    Calibration(String),
}
