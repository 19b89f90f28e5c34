//! Error types for every layer.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("measure has no points")]
    Empty,
    #[error("{points} points but {weights} weights")]
    WeightCount { points: usize, weights: usize },
    #[error("point {index} has dimension {found}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("point {index} has a non-finite coordinate")]
    NonFiniteCoordinate { index: usize },
    #[error("weight {index} is negative or non-finite ({value})")]
    InvalidWeight { index: usize, value: f64 },
    #[error("weights sum to {total}, expected 1")]
    NotNormalized { total: f64 },
    #[error("points {first} and {second} coincide")]
    DuplicatePoint { first: usize, second: usize },
    #[error("{points} points but {labels} labels")]
    LabelCount { points: usize, labels: usize },
    #[error("label {label} has no members")]
    EmptyLabelGroup { label: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CostError {
    #[error("explicit matrix is {rows}x{cols}, problem is {n}x{m}")]
    Shape {
        rows: usize,
        cols: usize,
        n: usize,
        m: usize,
    },
    #[error("cost entry ({i}, {j}) is {value}; costs must be finite and non-negative")]
    InvalidEntry { i: usize, j: usize, value: f64 },
    #[error("invalid exponent: {0}")]
    InvalidExponent(String),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("cost is not given in closed form")]
    NotClosedForm,
    #[error("point dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("unbalanced masses: source {source_total}, target {target_total}")]
    Unbalanced {
        source_total: f64,
        target_total: f64,
    },
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error("iteration limit {0} reached")]
    IterationLimit(usize),
    #[error("exact mode unsupported: {0}")]
    ExactUnsupported(String),
    #[error("pair is not optimal: dual value {dual} vs optimum {optimum}")]
    InfeasibleOptimum { dual: f64, optimum: f64 },
    #[error("linear program failed: {0}")]
    Lp(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DualityError {
    #[error("value {index} is NaN or +inf")]
    InvalidValue { index: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("pair violates f + g <= c at ({i}, {j}) by {violation}")]
    InfeasiblePair { i: usize, j: usize, violation: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecomposeError {
    #[error("measure carries no labels")]
    MissingLabels,
    #[error("epsilon must be positive and finite, got {0}")]
    InvalidEpsilon(f64),
    #[error("restriction discards mass {0}")]
    MassLoss(f64),
    #[error("component {0} has zero mass")]
    ZeroMassComponent(usize),
    #[error("index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Cost(#[from] CostError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UniquenessError {
    #[error("{count} components exceed the enumeration cap {cap}")]
    TooManyComponents { count: usize, cap: usize },
    #[error("offset cycle through components {first} and {second} is off by {discrepancy}")]
    InconsistentCycle {
        first: usize,
        second: usize,
        discrepancy: f64,
    },
    #[error("source and target measures differ")]
    NotSelfCoupled,
    #[error("cost is not symmetric with zero diagonal")]
    NotSymmetric,
    #[error("expected exactly two source components, found {0}")]
    NotTwoComponents(usize),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Decompose(#[from] DecomposeError),
    #[error(transparent)]
    Duality(#[from] DualityError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegularityError {
    #[error("cost profile is not nondecreasing")]
    ProfileNotMonotone,
    #[error("support points do not form a regular grid")]
    NotAGrid,
    #[error("schedule has {0} radii, at least 3 required")]
    ScheduleTooShort(usize),
    #[error("radii must be strictly increasing and positive")]
    InvalidSchedule,
    #[error("direction must be a unit vector")]
    InvalidDirection,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Umbrella error for callers that mix layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Duality(#[from] DualityError),
    #[error(transparent)]
    Decompose(#[from] DecomposeError),
    #[error(transparent)]
    Uniqueness(#[from] UniquenessError),
    #[error(transparent)]
    Regularity(#[from] RegularityError),
}
