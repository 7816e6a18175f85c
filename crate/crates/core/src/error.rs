use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("tuple contains duplicate offsets")]
    DuplicateOffsets,
    #[error("subset size {m} exceeds tuple size {k}")]
    SubsetTooLarge { m: usize, k: usize },
    #[error("no admissible {k}-tuple found within [0, {h_cap}]")]
    TupleNotFound { k: usize, h_cap: u64 },
    #[error("every residue class mod {p} is covered: no valid residue exists")]
    NoValidResidue { p: u64 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("window [{lo}, {hi}) of length {len} exceeds budget {budget}; try [{lo}, {suggested_hi}) first")]
    WindowTooLarge {
        lo: u64,
        hi: u64,
        len: u64,
        budget: u64,
        suggested_hi: u64,
    },
    #[error("basis is linearly dependent (denominator form not positive definite); reduce the basis")]
    DegenerateBasis,
    #[error("degenerate F: a required integral is zero")]
    DegenerateF,
    #[error("prime {p} out of range: {reason}")]
    PrimeOutOfRange { p: u64, reason: String },
    #[error("coordinate index {j} out of range 1..={k}")]
    CoordOutOfRange { j: usize, k: usize },
    #[error("{count} subsets exceed the enumeration guard of {guard}")]
    TooManySubsets { count: u128, guard: u128 },
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
