use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("Hermite degree {degree} exceeds the supported maximum {max}")]
    UnsupportedDegree { degree: usize, max: usize },

    #[error("functional is not finite at quadrature node x = {node}")]
    Evaluation { node: f64 },

    #[error("Hermite rank undetermined: |C_j| <= {tolerance:e} for 1 <= j <= {degree}; try a larger truncation degree")]
    RankUndetermined { degree: usize, tolerance: f64 },

    #[error("circulant embedding failed: most negative eigenvalue {min_eigenvalue:e} (max {max_eigenvalue:e}) at padding factor {padding}")]
    EmbeddingFailure {
        min_eigenvalue: f64,
        max_eigenvalue: f64,
        padding: usize,
    },

    #[error("multiplier is singular at zero frequency for beta = {beta}")]
    SingularMultiplier { beta: f64 },

    #[error("spectral density asymptote is singular at rho = 0")]
    SpectralSingularity,

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("window {window} at radius {radius} exceeds the grid")]
    Coverage { window: String, radius: f64 },

    #[error("quadrature did not converge: successive refinements differ by {difference:e}")]
    Quadrature { difference: f64 },

    #[error("inadmissible parameters ({mode} mode): {violated}")]
    Inadmissible { mode: String, violated: String },

    #[error("requested precision not reached: estimate {estimate} with relative standard error {relative_stderr:.4} after {samples} samples")]
    PrecisionNotReached {
        estimate: f64,
        stderr: f64,
        relative_stderr: f64,
        samples: usize,
    },

    #[error("Hermite rank {0} is not supported by the limit sampler (only 1 and 2)")]
    UnsupportedRank(usize),

    #[error("integrability scan inconclusive: tail fit R^2 = {r_squared:.4}, fitted power {fitted_power:.4}")]
    InconclusiveScan { r_squared: f64, fitted_power: f64 },

    #[error("insufficient design: {0}")]
    InsufficientDesign(String),

    #[error("memory budget of {budget_mb} MB exceeded at radius {radius} (needs about {needed_mb} MB)")]
    MemoryBudget {
        radius: f64,
        needed_mb: u64,
        budget_mb: u64,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
