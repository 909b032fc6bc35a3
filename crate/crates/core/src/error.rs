use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by the solvers, the harness and the file writers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular periodic tridiagonal system (sub={sub}, main={main}, super={sup})")]
    Singular { sub: f64, main: f64, sup: f64 },

    #[error("Poisson compatibility violated: sum_i (rho_i - 1) dx = {integral:e}, expected 0")]
    PoissonIncompatible { integral: f64 },

    #[error("grid mismatch: {0} nodes vs {1} nodes")]
    GridMismatch(usize, usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),

    #[error("run with dt={dt:e} failed: {source}")]
    Study {
        dt: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
