use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("chart domain violated: |t| = {t} must be below pi/4 - {margin:e}")]
    ChartDomain { t: f64, margin: f64 },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("requested {requested} modes but the grid carries only {capacity}")]
    ModeCapacity { requested: usize, capacity: usize },

    #[error("balancing did not converge after {iterations} iterations (residual {residual:e}, |a| = {norm})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        norm: f64,
    },

    #[error("all samples coincide; no balancing transformation exists")]
    DegenerateMass,

    #[error("map is not balanced: |center of mass| = {residual:e} exceeds {tol:e}")]
    Unbalanced { residual: f64, tol: f64 },

    #[error("no feasible r found: r = {r:e} already yields minimum eigenvalue {min:e}")]
    EmptyFeasibleSet { r: f64, min: f64 },

    #[error("malformed input: {0}")]
    Input(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
