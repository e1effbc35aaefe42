use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("a register needs at least one qubit")]
    ZeroQubits,
    #[error("qubit {qubit} out of range for {n} qubits")]
    QubitOutOfRange { qubit: usize, n: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("control bit `{0}` has no assigned value")]
    UnresolvedControl(String),
    #[error("gates overlap on qubit {qubit} in layer {layer}")]
    LayerOverlap { layer: usize, qubit: usize },
    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("unknown edge id {0}")]
    UnknownEdge(usize),
    #[error("unknown vertex id {0}")]
    UnknownVertex(usize),
    #[error("no edge set has the requested boundary: {0}")]
    Infeasible(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("forced outcome contradicts a deterministic measurement on qubit {0}")]
    ImpossibleOutcome(usize),
    #[error("generators do not define a stabilizer state: {0}")]
    NotAStabilizerState(String),
}

pub type Result<T> = std::result::Result<T, Error>;
