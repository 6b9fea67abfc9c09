use thiserror::Error;

use crate::field::DiagRecord;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid kernel config: {0}")]
    KernelConfig(String),

    #[error(
        "theta quadrature did not converge at {nodes} nodes \
         (last estimate {last:e}, previous {previous:e})"
    )]
    QuadratureFailure {
        nodes: usize,
        last: f64,
        previous: f64,
    },

    #[error("kernel evaluated at coincident points without regularization (r={r}, z={z})")]
    CoincidentPoints { r: f64, z: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid particle field: {0}")]
    InvalidField(String),

    #[error("operation requires an odd-symmetric field")]
    NotOdd,

    #[error(
        "particle {index} crossed the symmetry plane (z={z:e}) during a step of dt={dt}; \
         try a smaller dt"
    )]
    SymmetryViolation { index: usize, z: f64, dt: f64 },

    #[error("particle at (r={r}, z={z}) lies outside the raster grid")]
    OutOfGrid { r: f64, z: f64 },

    #[error("coarse shift scan minimum sits at bracket endpoint {tau} (bracket [{lo}, {hi}])")]
    BracketMiss { tau: f64, lo: f64, hi: f64 },

    #[error("multiplier bisection failed: {0}")]
    Bisection(String),

    #[error("run aborted at t={t} after {} records: {source}", records.len())]
    Aborted {
        t: f64,
        records: Vec<DiagRecord>,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
