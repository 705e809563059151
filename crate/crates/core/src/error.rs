use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime (or exceeds the prime cap)")]
    NonPrime(u32),
    #[error("I*J is nonzero: generator pair ({i:?}, {j:?}) multiplies to {product:?}")]
    IJNonzero {
        i: Vec<u32>,
        j: Vec<u32>,
        product: Vec<u32>,
    },
    #[error("ring is not local: {0}")]
    NotLocal(String),
    #[error("map is not a surjective ring homomorphism: {0}")]
    NotSurjective(String),
    #[error("fiber product maps have different targets")]
    TargetMismatch,
    #[error("rings have different characteristic primes ({0} vs {1})")]
    CharMismatch(u32, u32),
    #[error("multiplication table is not associative: {0}")]
    NotAssociative(String),
    #[error("unit law fails: {0}")]
    NotUnital(String),
    #[error("bad dimensions: {0}")]
    BadDimensions(String),
    #[error("invalid multiplication table: {0}")]
    InvalidTable(String),
    #[error("ring is too large for exhaustive treatment: {0}")]
    RingTooLarge(String),
    #[error("matrix does not reduce to zero at the middle level")]
    NotInKernel,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("level mismatch: expected {expected}, found {found}")]
    LevelMismatch { expected: String, found: String },
    #[error("coordinates in degree {0} are not a cocycle")]
    NotACocycle(i32),
    #[error("pre-differential does not square to zero")]
    NotADifferential,
    #[error("problem is obstructed")]
    Obstructed,
    #[error("graded map is not a cochain map")]
    NotCochainMap,
    #[error("graded map is not a homotopy between the given maps")]
    NotAHomotopy,
    #[error("graded lifts are incompatible: {0}")]
    IncompatibleGradedLifts(String),
    #[error("maps are not inverse to each other modulo the kernel")]
    NotInverse,
    #[error("data is not a homotopy equivalence: {0}")]
    NotHomotopyEquivalence(String),
    #[error("H^-1 guard undecidable: enumeration of {0} elements exceeds the cap")]
    GuardUndecidable(u128),
    #[error("internal obstruction in crude lifting stage {stage}: {detail}")]
    InternalObstruction { stage: String, detail: String },
    #[error("enumeration of {size} candidates exceeds the cap {cap}")]
    CapExceeded { size: u128, cap: u128 },
    #[error("check failed: {0}")]
    CheckFailed(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("schema mismatch: expected {expected}, found {found}")]
    SchemaMismatch { expected: String, found: String },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
