use thiserror::Error;

/// Failure taxonomy shared by every solver layer.
///
/// `Config` maps to CLI exit code 3, the contraction/ball failures to exit
/// code 2; everything else is an ordinary hard error.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// Initial data violates the admissibility margin against the plateau
    /// coefficient (the `|v0 - b| <= eps0` check).
    #[error("initial data too rough: {0}")]
    DataTooRough(String),

    /// A solution horizon for which the smallness conditions demonstrably
    /// fail (positivity floor lost, ball radius exceeded before iterating).
    #[error("horizon too large: {0}")]
    HorizonTooLarge(String),

    /// The inner derivative-coupling iteration stopped contracting.
    #[error("inner iteration stalled: {0}")]
    InnerStall(String),

    /// The outer fixed-point map stopped contracting.
    #[error("no contraction: {0}")]
    NoContraction(String),

    /// An iterate left the working ball.
    #[error("iterate left the working ball: {0}")]
    BallExit(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code the CLI should report for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Json(_) => 3,
            Error::NoContraction(_) | Error::BallExit(_) | Error::InnerStall(_) => 2,
            _ => 1,
        }
    }
}
