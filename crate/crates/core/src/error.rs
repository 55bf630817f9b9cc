use alloc::string::String;
use alloc::vec::Vec;

/// Errors raised by the circuit, simulation and learning layers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("qubit index {index} out of range for a {width}-qubit circuit")]
    QubitOutOfRange { index: usize, width: usize },
    #[error("duplicate qubit {0} in multi-qubit gate")]
    DuplicateQubit(usize),
    #[error("gate {gate} expects {expected} qubit(s), got {got}")]
    Arity { gate: &'static str, expected: usize, got: usize },
    #[error("gate {0} requires an angle")]
    MissingAngle(&'static str),
    #[error("gate {0} does not take an angle")]
    UnexpectedAngle(&'static str),
    #[error("delay instruction requires a duration")]
    MissingDuration,
    #[error("unbound symbol `{0}`")]
    UnboundSymbol(String),
    #[error("non-finite parameter value")]
    NonFinite,
    #[error("circuit width mismatch: {left} vs {right}")]
    WidthMismatch { left: usize, right: usize },
    #[error("circuit width {width} exceeds limit {limit}")]
    TooWide { width: usize, limit: usize },
    #[error("a circuit needs at least one qubit")]
    EmptyRegister,
    #[error("observable length {got} does not match {expected} qubits")]
    ObservableLength { expected: usize, got: usize },
    #[error("invalid probability {0}")]
    InvalidProbability(f64),
    #[error("confusion matrix row does not sum to one")]
    ConfusionRow,
    #[error("singular readout calibration on qubit {0}")]
    SingularCalibration(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("optimization level {0} out of range 0..=3")]
    OptimizationLevel(u8),
    #[error("resilience level {0} out of range 0..=1")]
    ResilienceLevel(u8),
    #[error("coupling graph is disconnected")]
    DisconnectedCoupling,
    #[error("parameter `{0}` is used by more than one gate")]
    ParameterReuse(String),
    #[error("parameter `{0}` drives a gate without a shift rule")]
    NoShiftRule(String),
    #[error("labels must be -1 or +1, found {0}")]
    InvalidLabel(f64),
    #[error("class {0} has no training samples")]
    MissingClass(usize),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("model has not been trained")]
    Untrained,
    #[error("loss became NaN at iteration {iteration}")]
    NanLoss { iteration: usize, trace: Vec<f64> },
    #[error("empty data set")]
    EmptyData,
}

pub type Result<T> = core::result::Result<T, Error>;
