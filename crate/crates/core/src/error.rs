use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("inadmissible domain: {0}")]
    InadmissibleSpec(String),
    #[error("polynomial degree {degree} exceeds the configured cap {cap}")]
    DegreeCapExceeded { degree: u32, cap: u32 },
    #[error("substitution cascade diverged: {0}")]
    CascadeDiverged(String),
    #[error("grid too coarse: relative area change {ratio:.3e} under refinement")]
    GridTooCoarse { ratio: f64 },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("grid under-resolved: {0}")]
    GridUnderResolved(String),
    #[error("point is not interior to the domain")]
    PointNotInterior,
    #[error("point too close to the boundary (distance {distance:.3e}, need {required:.3e})")]
    PointTooCloseToBoundary { distance: f64, required: f64 },
    #[error("slice needs at least {required} samples, got {got}")]
    TooFewSamples { got: usize, required: usize },
    #[error("function is not slice-extendible: relative negative energy {energy:.3e}")]
    NotSliceExtendible { energy: f64 },
    #[error("function has no evaluable representation off the grid")]
    NotEvaluable,
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Process exit code: 2 for invalid input, 3 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::CascadeDiverged(_)
            | Error::GridTooCoarse { .. }
            | Error::GridUnderResolved(_)
            | Error::NotSliceExtendible { .. } => 3,
            _ => 2,
        }
    }
}
