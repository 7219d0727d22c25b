use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid diffusion parameters: {0}")]
    InvalidParams(String),

    #[error("geometry is not lattice-aligned: {0}")]
    NotLatticeAligned(String),

    #[error("unsupported case: {0}")]
    Unsupported(String),

    #[error("invalid theta: {0}")]
    InvalidTheta(String),

    #[error("interval {t} outside 1..={n_intervals}")]
    IntervalOutOfRange { t: u32, n_intervals: u32 },

    #[error("invalid condition binding: {0}")]
    InvalidBinding(String),

    #[error("no trials exited at the congruent boundary for {0}")]
    NoCongruentTrials(String),

    #[error("normalization failed: {0}")]
    Normalization(String),

    #[error("length mismatch: {predicted} predicted vs {observed} observed")]
    LengthMismatch { predicted: usize, observed: usize },

    #[error("batch contains no trials")]
    EmptyBatch,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("no feasible grid point ({rejected} rejected by constraints, {failed} failed)")]
    EmptyFeasibleGrid { rejected: usize, failed: usize },

    #[error("unknown study id `{0}`")]
    UnknownStudy(String),
}
