//! Error types shared across the crate.

use thiserror::Error;

/// Errors raised by state manipulation and sampling primitives.
#[derive(Debug, Error)]
pub enum SimError {
    #[error("qubit index {index} out of range for a {n_qubits}-qubit state")]
    QubitOutOfRange { index: usize, n_qubits: usize },
    #[error("duplicate qubit index {0} in operation")]
    DuplicateQubit(usize),
    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    NonUnitary { deviation: f64 },
    #[error("amplitude vector length {0} does not match the qubit count")]
    BadAmplitudeLength(usize),
    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),
    #[error("density matrix is not a valid state: {0}")]
    InvalidDensity(String),
    #[error("probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("the set of kept qubits must be nonempty and smaller than the register")]
    BadKeepSet,
    #[error("shots must be at least 1")]
    ZeroShots,
    #[error("invalid noise model: {0}")]
    InvalidNoise(String),
}

/// Errors raised while building, transforming, or parsing circuits.
#[derive(Debug, Error)]
pub enum CircuitError {
    #[error("ry_angle requires 0 <= x <= y with y > 0, got ({x}, {y})")]
    InvalidAngleFraction { x: u64, y: u64 },
    #[error("Dicke weight {weight} out of range for {m} qubits")]
    DickeWeightOutOfRange { weight: usize, m: usize },
    #[error("telecloning requires at least 2 clones, got {0}")]
    TooFewClones(usize),
    #[error("ancilla-free telecloning is only defined for 2 or 3 clones, got {0}")]
    UnsupportedCloneCount(usize),
    #[error("clbit index {index} out of range ({n_clbits} classical bits)")]
    ClbitOutOfRange { index: usize, n_clbits: usize },
    #[error("conditional gate reads clbit {0} before any measurement writes it")]
    ConditionalBeforeMeasure(usize),
    #[error("conditional gates must be single-qubit and uncontrolled")]
    BadConditionalGate,
    #[error("cannot decompose gate: {0}")]
    Undecomposable(String),
    #[error("circuits with classically conditioned gates cannot be exported in the qasm dialect")]
    FeedforwardNotExportable,
    #[error("gate has no textual representation in this dialect: {0}")]
    Unexportable(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unknown circuit family id {0:?}")]
    UnknownFamily(String),
    #[error("unknown connectivity {0:?} (expected lnn or full)")]
    UnknownConnectivity(String),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Errors raised by the tomography and mitigation pipeline.
#[derive(Debug, Error)]
pub enum TomographyError {
    #[error("optimal fidelity requires M >= N >= 1, got N={n}, M={m}")]
    InvalidCloneNumbers { n: u64, m: u64 },
    #[error("basis histogram for {0} has zero total counts")]
    ZeroCounts(char),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("calibration needs one histogram per preparation: expected {expected}, got {got}")]
    WrongPreparationCount { expected: usize, got: usize },
    #[error("calibration histograms must share one shot total (saw {a} and {b})")]
    UnequalShots { a: u64, b: u64 },
    #[error("calibration histogram for preparation {0} is empty")]
    EmptyPreparation(usize),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Errors raised by the experiment harness and result emission.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Tomography(#[from] TomographyError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
