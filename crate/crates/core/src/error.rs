use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("point has {got} coordinates, polynomial has {expected} variables")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("variable index {index} out of range for {num_vars} variables")]
    IndexOutOfRange { index: usize, num_vars: usize },
    #[error("empty variable product for argument {0}")]
    EmptyProduct(usize),
    #[error("zero polynomial: every value is a root")]
    ZeroPolynomial,
    #[error("degree {0} exceeds 2")]
    DegreeTooHigh(usize),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FamilyError {
    #[error("family has no terms")]
    Empty,
    #[error("term {index} uses {term_vars} variables but the family declares {num_vars}")]
    TooManyVariables { index: usize, term_vars: usize, num_vars: usize },
    #[error("function {index} of F[{level}] has a nonzero constant term in its last variable")]
    NonzeroConstantTerm { level: usize, index: usize },
    #[error("F[{level}] must contain polynomials in {level} variables, got {got}")]
    WrongArity { level: usize, got: usize },
    #[error("expected {expected} function sets, got {got}")]
    WrongLevelCount { expected: usize, got: usize },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("preset `{0}` requires a parameter k")]
    MissingParameter(String),
    #[error("invalid parameter for preset `{name}`: {msg}")]
    BadParameter { name: String, msg: String },
    #[error("reduction vector u must be non-empty")]
    EmptyReductionVector,
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("malformed family file: {0}")]
    Format(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ColoringError {
    #[error("coloring must cover at least one integer")]
    EmptyRange,
    #[error("color count must be at least 1")]
    NoColors,
    #[error("position {position} has color {color}, outside 1..={r}")]
    ColorOutOfRange { position: usize, color: u32, r: u32 },
    #[error("expected {expected} colors, found {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("malformed coloring: {0}")]
    Format(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("family enumeration box is incomplete; results would only be box-relative")]
    IncompleteBox,
    #[error("resource limit reached after {nodes} nodes ({reason})")]
    ResourceLimit { nodes: u64, reason: String },
    #[error("invalid search parameters: {0}")]
    InvalidParameters(String),
    #[error("certificate failed independent verification: {0}")]
    VerificationFailed(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructionError {
    #[error("construction invariant violated: {0}")]
    InvariantViolated(String),
    #[error("invalid construction parameters: {0}")]
    InvalidParameters(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("coefficient vector needs at least two entries")]
    TooFewCoefficients,
    #[error("coefficient {0} is zero")]
    ZeroCoefficient(usize),
    #[error("coefficients sum to {0}, expected 0")]
    NonzeroSum(i64),
    #[error("degenerate coefficient vector: neither quadratic yields a usable root")]
    Degenerate,
    #[error("value does not fit in 64 bits: {0}")]
    Overflow(String),
    #[error("modulus b must be at least 2, got {0}")]
    BadModulus(i64),
    #[error("base must be at least 2, got {0}")]
    BadBase(u64),
    #[error("lifted domain is empty (N = {n}, base = {base})")]
    DomainTooSmall { n: usize, base: u64 },
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error(transparent)]
    Coloring(#[from] ColoringError),
}
