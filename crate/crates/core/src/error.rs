use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("invalid point set: {0}")]
    InvalidPoints(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("non-finite gradient")]
    NonFiniteGradient,
    #[error("non-finite state at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("maximum number of steps ({0}) exceeded")]
    MaxStepsExceeded(usize),
    #[error("step size {h:e} below minimum at t = {t}")]
    StepUnderflow { t: f64, h: f64 },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("linear solve failed: {0}")]
    LinearSolveFailure(String),
    #[error("degenerate field (max == min)")]
    DegenerateField,
    #[error("time {0} is not on the reference grid")]
    TimeNotOnGrid(f64),
    #[error("observation times misaligned: {0}")]
    TimeMisalignment(String),
    #[error("reference state has zero norm")]
    ZeroReference,
}
