use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid raster: {0}")]
    InvalidRaster(String),

    #[error("png decode failed: {0}")]
    Decode(String),

    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),

    #[error("png encode failed: {0}")]
    Encode(String),

    #[error("label count {0} does not fit a 16-bit label image")]
    TooManyLabels(u32),

    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("placement infeasible: placed {placed} of {requested} centers within the attempt budget")]
    PlacementInfeasible { placed: usize, requested: usize },

    #[error("degenerate histogram: image has fewer than two distinct levels")]
    DegenerateHistogram,

    #[error("mask has no background pixels")]
    NoBackground,

    #[error("perplexity {perplexity} is infeasible for {points} points")]
    PerplexityInfeasible { perplexity: f64, points: usize },

    #[error("need at least {needed} vectors, got {got}")]
    TooFewVectors { needed: usize, got: usize },

    #[error("image {width}x{height} is smaller than patch size {size}")]
    PatchTooLarge { width: usize, height: usize, size: usize },

    #[error("unknown template `{0}`")]
    UnknownTemplate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
