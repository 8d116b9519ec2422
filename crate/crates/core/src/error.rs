use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid coordinate {0}: corners must be finite and nonnegative")]
    InvalidCoordinate(f64),
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("{corners} corners exceed the inclusion-exclusion cap of {cap} in dimension {dim}")]
    TooManyCorners { corners: usize, cap: usize, dim: usize },
    #[error("scaling components must be finite and strictly positive, got {0}")]
    NonPositiveScale(f64),
    #[error("invalid measure: {0}")]
    InvalidMeasure(&'static str),
    #[error("empty set list")]
    EmptyInput,
    #[error("duplicate set in subsemilattice")]
    DuplicateSet,
    #[error("set list is not closed under intersection")]
    NotIntersectionClosed,
    #[error("numbering is not a permutation consistent with the strong past")]
    InvalidNumbering,
    #[error("mesh must be finite and positive, got {0}")]
    InvalidMesh(f64),
    #[error("interpolation stalled: clock did not increase between parameters {from} and {to}")]
    InterpolationStall { from: f64, to: f64 },
    #[error("anchors are not strictly increasing at position {0}")]
    NonIncreasingAnchors(usize),
    #[error("flow is not strictly increasing at step {0}")]
    NonIncreasingFlow(usize),
    #[error("clock is not strictly increasing at knot {0}")]
    NonMonotoneClock(usize),
    #[error("clock value {value} outside [{min}, {max}]")]
    OutOfRange { value: f64, min: f64, max: f64 },
    #[error("retime step {step} exceeds clock range {range}")]
    StepTooLarge { step: f64, range: f64 },
    #[error("retime step {0} is finer than the path resolution")]
    ResolutionTooCoarse(f64),
    #[error("invalid process parameter: {0}")]
    InvalidModel(&'static str),
    #[error("grid size must be at least 1")]
    InvalidGrid,
    #[error("set exceeds the field domain [0, {0}]")]
    OutsideDomain(f64),
    #[error("{0} exclusions exceed the inclusion-exclusion cap of 12")]
    TooManyExclusions(usize),
    #[error("need at least {needed} increments, got {got}")]
    TooFewIncrements { needed: usize, got: usize },
    #[error("flows do not share start and end sets")]
    EndpointMismatch,
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}
