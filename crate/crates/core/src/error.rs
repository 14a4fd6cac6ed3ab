use core::fmt;

/// Errors raised by the core algorithms.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// `next_below` was asked for a value in an empty range.
    ZeroBound,
    /// Chaotic-iteration state width outside `1..=64`.
    InvalidStateWidth(u32),
    DuplicateSymbol(char),
    AlphabetTooSmall(usize),
    AlphabetTooLarge(usize),
    /// A key is not a bijection on its index range.
    InvalidPermutation,
    KeySizeMismatch { expected: usize, found: usize },
    /// Transposition period must be at least 1.
    InvalidPeriod(usize),
    /// A swap proposal needs at least two positions to exchange.
    KeySpaceTooSmall(usize),
    /// Smoothing delta must be finite and non-negative.
    InvalidSmoothing(f64),
    /// Building a model from no bigrams and no smoothing leaves nothing to normalize.
    EmptyModel,
    /// The model contains zero-probability bigrams, so log-scores are not finite.
    ModelNotSmoothed,
    ModelAlphabetMismatch { model: usize, alphabet: usize },
    EmptyCiphertext,
    InvalidScaling(f64),
    LengthMismatch { left: usize, right: usize },
    InvalidThreshold(f64),
    ZeroRuns,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ZeroBound => write!(f, "bound must be at least 1"),
            Error::InvalidStateWidth(n) => {
                write!(f, "chaotic-iteration state width {n} is outside 1..=64")
            }
            Error::DuplicateSymbol(c) => write!(f, "duplicate alphabet symbol {c:?}"),
            Error::AlphabetTooSmall(n) => write!(f, "alphabet has {n} symbols, need at least 2"),
            Error::AlphabetTooLarge(n) => write!(f, "alphabet has {n} symbols, at most 256 supported"),
            Error::InvalidPermutation => write!(f, "key is not a permutation"),
            Error::KeySizeMismatch { expected, found } => {
                write!(f, "key covers {found} symbols, expected {expected}")
            }
            Error::InvalidPeriod(k) => write!(f, "transposition period {k} must be positive"),
            Error::KeySpaceTooSmall(n) => {
                write!(f, "key of size {n} has no distinct pair to swap")
            }
            Error::InvalidSmoothing(d) => write!(f, "smoothing delta {d} must be finite and >= 0"),
            Error::EmptyModel => write!(f, "corpus has no bigrams and smoothing is zero"),
            Error::ModelNotSmoothed => {
                write!(f, "model has zero-probability bigrams; use a positive smoothing delta")
            }
            Error::ModelAlphabetMismatch { model, alphabet } => write!(
                f,
                "model was built for {model} symbols but the alphabet has {alphabet}"
            ),
            Error::EmptyCiphertext => write!(f, "ciphertext is empty after normalization"),
            Error::InvalidScaling(p) => write!(f, "scaling exponent {p} must be finite and > 0"),
            Error::LengthMismatch { left, right } => {
                write!(f, "texts have different lengths ({left} vs {right})")
            }
            Error::InvalidThreshold(t) => write!(f, "success threshold {t} is outside [0, 1]"),
            Error::ZeroRuns => write!(f, "an experiment needs at least one run"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
