use thiserror::Error;

/// Errors raised while building theories, states and the quantities derived from them.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ThermoError {
    #[error("inverse temperature must be positive and finite, got {0}")]
    NonPositiveBeta(f64),

    #[error("the entropy theory takes no inverse temperature or intensive variables")]
    IntensivesInEntropyTheory,

    #[error("missing parameter `{0}`")]
    MissingParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in `{0}`")]
    NonFinite(String),

    #[error("probability vector has negative entry {value} at index {index}")]
    NegativeProbability { index: usize, value: f64 },

    #[error("probability vector sums to {0}, not 1")]
    NotNormalized(f64),

    #[error("operator labels differ: {left:?} vs {right:?}")]
    LabelMismatch { left: Vec<String>, right: Vec<String> },

    #[error("states are not defined under the same theory context: {0}")]
    ContextMismatch(String),

    #[error("problem too large: {what} = {size} exceeds the cap {cap}")]
    TooLarge { what: &'static str, size: usize, cap: usize },

    #[error("x = {x} lies outside the curve domain [0, {width}]")]
    OutOfDomain { x: f64, width: f64 },

    #[error("Lorenz curves have different widths: {0} vs {1}")]
    WidthMismatch(f64, f64),

    #[error("epsilon = {0} is outside the admissible range")]
    EpsilonOutOfRange(f64),

    #[error("operation needs an energy-representation theory (beta); use the entropy-theory variant")]
    EntropyRepresentation,

    #[error("operation is defined for the entropy theory only")]
    EnergyRepresentation,

    #[error("target state is an equilibrium state; its relative entropy is {0}")]
    TargetIsEquilibrium(f64),

    #[error("linear program solver failed: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, ThermoError>;
