use std::path::PathBuf;

/// Errors of the pipeline crate: core numerics, files and formats.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] graphpde_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Short machine-readable code for the error line printed by the CLI.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Core(e) => match e {
                graphpde_core::Error::NonFiniteGradient => "non_finite_gradient",
                graphpde_core::Error::NonFiniteState { .. } => "non_finite_state",
                graphpde_core::Error::MaxStepsExceeded(_) => "max_steps_exceeded",
                graphpde_core::Error::StepUnderflow { .. } => "step_underflow",
                graphpde_core::Error::ShapeMismatch(_) => "shape_mismatch",
                graphpde_core::Error::LinearSolveFailure(_) => "linear_solve_failure",
                graphpde_core::Error::TimeNotOnGrid(_) => "time_not_on_grid",
                graphpde_core::Error::InvalidConfig(_) => "invalid_config",
                _ => "numerics",
            },
            Error::Io { .. } => "io",
            Error::Format { .. } => "format",
            Error::Invalid(_) => "invalid_input",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
