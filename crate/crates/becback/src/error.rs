//! Crate-wide error type.  Variants split into input validation (CLI exit
//! code 1) and numerical failures (exit code 2).

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter {field}: {reason}")]
    InvalidParam { field: &'static str, reason: String },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular kernel: z = 0 with epsilon = 0 is not regularized")]
    Singularity,

    #[error("config error: {0}")]
    Config(String),

    #[error("no signal: {0}")]
    NoSignal(String),

    #[error("undefined shot noise: mean photon number is zero")]
    UndefinedNoise,

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("format error: {0}")]
    Format(String),

    #[error(
        "quadrature did not converge: achieved error {achieved:.3e}, requested {requested:.3e}"
    )]
    QuadratureNonConvergence { achieved: f64, requested: f64 },

    #[error(
        "resolution error: real-space and k-space routes disagree by {mismatch:.3e} relative \
         (tolerance {tolerance:.1e}); {advice}"
    )]
    Resolution {
        mismatch: f64,
        tolerance: f64,
        advice: String,
    },

    #[error(
        "stability guard violated: dt = {dt:.3e} s exceeds the safe step; use dt <= {suggested:.3e} s"
    )]
    StabilityGuard { dt: f64, suggested: f64 },

    #[error("internal consistency: {0}")]
    InternalConsistency(String),
}

impl Error {
    /// CLI exit code: 1 for rejected input, 2 for a numerical failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::InvalidParam { .. }
            | Error::GridMismatch(_)
            | Error::Domain(_)
            | Error::Singularity
            | Error::Config(_)
            | Error::NoSignal(_)
            | Error::UndefinedNoise
            | Error::Io(_)
            | Error::Format(_) => 1,
            Error::QuadratureNonConvergence { .. }
            | Error::Resolution { .. }
            | Error::StabilityGuard { .. }
            | Error::InternalConsistency(_) => 2,
        }
    }
}
