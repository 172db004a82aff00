//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Scenario content violates an invariant (named field in the message).
    #[error("scenario validation failed: {0}")]
    Validation(String),

    /// Profile table is missing the entry for an (application, configuration) pair.
    #[error("missing profile entry for application `{app}` and configuration `{config}`")]
    MissingProfile { app: String, config: String },

    /// Scenario file uses a schema version this build does not understand.
    #[error("unsupported schema_version {found} (supported: {supported})")]
    SchemaVersion { found: u32, supported: u32 },

    /// Scenario file could not be parsed.
    #[error("failed to parse scenario: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Division by a zero compute rate.
    #[error("compute rate must be positive or unbounded, got zero")]
    ZeroRate,

    /// Bitstring length does not match the problem's qubit count.
    #[error("bitstring length {got} does not match qubit count {expected}")]
    BitstringLength { got: usize, expected: usize },

    /// Statevector simulation refused: graph exceeds the qubit budget.
    /// Callers should switch to the classical max-cut fallback.
    #[error("{qubits} qubits exceed the statevector budget of {budget}; use the classical max-cut fallback")]
    QubitBudget { qubits: usize, budget: usize },

    /// No bipartition satisfies the vertex-class constraints.
    #[error("no valid bipartition exists for this graph")]
    PartitionFailure,

    /// Induced subgraph requested over an empty vertex set.
    #[error("vertex subset must be non-empty")]
    EmptySubset,

    /// Exhaustive search would exceed the configured enumeration budget.
    #[error("exhaustive search space {space:.3e} exceeds budget {budget:.3e}")]
    OracleBudget { space: f64, budget: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
