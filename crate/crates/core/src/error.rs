use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid vehicle parameters: {0}")]
    InvalidParams(String),

    #[error("invalid input signal: {0}")]
    InvalidSignal(String),

    #[error("integration diverged at t = {time} s (vehicle state is not finite)")]
    IntegrationDiverged { time: f64 },

    /// The measurement band and the prediction do not intersect. Only possible
    /// when the noise or disturbance model is violated.
    #[error("measurement incompatible with prediction in the {component} component")]
    IncompatibleMeasurement { component: &'static str },

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("initial condition is infeasible: the verifier answered no")]
    InfeasibleInitialCondition,

    #[error("supervisor blocked at step {step}: no safe input signal could be produced")]
    Blocked { step: usize },

    #[error("permutation cap of {cap} sequences exceeded")]
    PermutationCapExceeded { cap: u64 },

    #[error("brute-force oracle guard: {controlled} controlled vehicles exceeds the limit of {limit}")]
    OracleTooLarge { controlled: usize, limit: usize },

    #[error("scenario {path}:{line}: {message}")]
    Scenario {
        path: String,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
