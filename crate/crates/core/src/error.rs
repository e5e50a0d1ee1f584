use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("degenerate point cloud: {0}")]
    DegenerateCloud(&'static str),
    #[error("subdivision level {0} out of range 0..=4")]
    LevelOutOfRange(u32),
    #[error("view normal is not unit length (norm {0})")]
    NonUnitNormal(f64),
    #[error("canvas {width}x{height} too small, projection needs at least {required_width}x{required_height}")]
    CanvasTooSmall {
        width: usize,
        height: usize,
        required_width: usize,
        required_height: usize,
    },
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("image {width}x{height} too small, need at least {min}x{min}")]
    ImageTooSmall { width: usize, height: usize, min: usize },
    #[error("need more than {k} points for {k}-nearest-neighbour normals, cloud has {n}")]
    TooFewPointsForNormals { k: usize, n: usize },
    #[error("octree level {0} out of range 1..=10")]
    OctreeLevelOutOfRange(u32),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{0}")]
    Statistics(String),
    #[error("stimulus {stimulus} keeps {remaining} valid score(s) after outlier rejection, need at least 2")]
    InsufficientScores { stimulus: String, remaining: usize },
    #[error("unmatched stimuli: {}", .0.join(", "))]
    UnmatchedStimuli(Vec<String>),
}
