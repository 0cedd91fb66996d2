use thiserror::Error;

/// Errors surfaced by the PNF game library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("no root: {0}")]
    NoRoot(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("no convergence after {sweeps} sweeps (residual {residual:.3e})")]
    NoConvergence { sweeps: usize, residual: f64 },

    #[error(
        "infeasible degree parity: a {d}-regular friend graph on {n} nodes needs n*d even \
         (handshake sum {n}*{d} is odd)"
    )]
    ParityInfeasible { n: usize, d: usize },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
