use terrace_core::Error;
use thiserror::Error as ThisError;

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 config error, 3 solver bracket or convergence error, 4 runtime
    /// instability, 1 anything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) => match e {
                Error::InvalidArgument(_)
                | Error::VectorShootingUnsupported
                | Error::InitialDataExceedsDomain
                | Error::WindowExceedsDomain
                | Error::EmptyWindow
                | Error::Constraint(_)
                | Error::Format(_)
                | Error::NoMinima
                | Error::DegenerateCriticalPoint { .. }
                | Error::NoEscapeDistance
                | Error::NotCoercive => 2,
                Error::BracketDoesNotIsolate
                | Error::NonMonotoneShooting(_)
                | Error::NeverEscapes
                | Error::TooFewSamples { .. }
                | Error::NotStableAtInfinity
                | Error::TerraceNotFormed(_)
                | Error::TerraceInvariant(_) => 3,
                Error::Instability { .. } => 4,
                Error::Observer { .. } | Error::Io(_) => 1,
            },
            CliError::Io(_) | CliError::Json(_) => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
