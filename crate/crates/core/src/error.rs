use thiserror::Error;

/// Errors raised by the cost models, solvers and simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of a formula.
    #[error("domain error in {op}: {reason}")]
    Domain { op: &'static str, reason: String },

    /// A task or assignment references a server that does not exist.
    #[error("unknown server {server} referenced by task {task}")]
    UnknownServer { task: usize, server: usize },

    /// A task references a device that does not exist.
    #[error("unknown device {device} referenced by task {task}")]
    UnknownDevice { task: usize, device: usize },

    /// A green trace does not cover the requested slot.
    #[error("slot {slot} is outside the green trace of length {len}")]
    SlotOutOfRange { slot: usize, len: usize },

    /// Solver or grid configuration is unusable.
    #[error("configuration error: {0}")]
    Config(String),

    /// A scenario failed validation before simulation.
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    /// The brute-force oracle refuses instances beyond its size cap.
    #[error("instance too large for exhaustive search: {cardinality} joint profiles (N={devices}, M={servers})")]
    OracleTooLarge {
        cardinality: u128,
        devices: usize,
        servers: usize,
    },
}

impl Error {
    pub(crate) fn domain(op: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            op,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
