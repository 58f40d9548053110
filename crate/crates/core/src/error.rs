use thiserror::Error;

/// Errors raised by the laboratory operations.
///
/// Variants map onto the two failure classes the command line distinguishes:
/// malformed or out-of-range input, and everything else.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid space: {}", .0.join("; "))]
    InvalidSpace(Vec<String>),

    #[error("empty set has no neighborhood")]
    EmptySet,

    #[error("mask length {got} does not match space size {expected}")]
    MaskLength { expected: usize, got: usize },

    #[error("instance too large for exact enumeration; use alpha_lower_bound ({points} points, cap {cap})")]
    TooLargeForExact { points: usize, cap: usize },

    #[error("{what} exceeds the configured cap ({size} > {cap}){hint}")]
    OverCap {
        what: &'static str,
        size: u128,
        cap: u128,
        hint: &'static str,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("underdetermined fit: {usable} usable points")]
    UnderdeterminedFit { usable: usize },

    #[error("fit produced a non-positive decay rate c2 = {c2}")]
    NonPositiveDecay { c2: f64 },

    #[error("marginal mismatch: {0}")]
    MarginalMismatch(String),

    #[error("not a bijection: {0}")]
    NotBijective(String),

    #[error("permutation {index} is not an isometry: d({i},{j}) = {before} but d(g{i},g{j}) = {after}")]
    NotIsometric {
        index: usize,
        i: usize,
        j: usize,
        before: f64,
        after: f64,
    },

    #[error("invalid cover: {0}")]
    InvalidCover(String),

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("transport solver did not converge after {0} pivots")]
    SolverStalled(usize),

    #[error("malformed document: {0}")]
    Document(String),
}

impl Error {
    /// True when the error stems from caller input rather than an internal fault.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::SolverStalled(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
