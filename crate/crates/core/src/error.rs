use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: expected one of {}", expected.join(", "))]
    Syntax {
        offset: usize,
        expected: Vec<&'static str>,
    },

    /// A certified decision (floor, χ, phase) could not be made even at the
    /// top of the precision ladder.
    #[error("precision exhausted at n = {n} ({node}) after reaching {bits} bits")]
    PrecisionExhausted { n: u64, node: String, bits: u32 },

    #[error("not of the form beta*floor(alpha1*floor(alpha2*p(x))): {0}")]
    NotTheoremShape(String),

    #[error("progression out of range: {0}")]
    OutOfRange(String),

    #[error("input too large for the naive oracle: {size} > {limit}")]
    TooLarge { size: usize, limit: usize },

    #[error("value outside [0, 1): {0}")]
    OutOfDomain(f64),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    /// An integer relation `sum n_j gamma_j in Z` was detected (or could not
    /// be excluded at maximum precision).
    #[error("rational relation with witness {witness:?}")]
    RationalRelation { witness: Vec<i64> },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("malformed sequence file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
