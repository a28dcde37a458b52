use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no minima")]
    NoMinima,
    #[error("degenerate critical point at {location:?} (Hessian eigenvalue {eigenvalue:e})")]
    DegenerateCriticalPoint { location: Vec<f64>, eigenvalue: f64 },
    #[error("no admissible escape distance above 1e-8")]
    NoEscapeDistance,
    #[error("potential not coercive on given box")]
    NotCoercive,
    #[error("vector shooting unsupported; use front_residual on externally supplied profiles")]
    VectorShootingUnsupported,
    #[error("bracket does not isolate a bistable speed")]
    BracketDoesNotIsolate,
    #[error("shooting classifier is not monotone inside the bracket at c = {0}")]
    NonMonotoneShooting(f64),
    #[error("profile never escapes d_esc")]
    NeverEscapes,
    #[error("initial data exceeds domain")]
    InitialDataExceedsDomain,
    #[error("blow-up or instability detected at t = {time}, node {node}")]
    Instability { time: f64, node: usize },
    #[error("observer failed at t = {time}: {message}")]
    Observer { time: f64, message: String },
    #[error("window exceeds domain")]
    WindowExceedsDomain,
    #[error("window is empty")]
    EmptyWindow,
    #[error("too few samples: need {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("solution not stable at infinity on the grid")]
    NotStableAtInfinity,
    #[error("terrace not yet formed; extend t_b ({0})")]
    TerraceNotFormed(String),
    #[error("terrace invariant violated: {0}")]
    TerraceInvariant(String),
    #[error("constraint violated: {0}")]
    Constraint(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}
