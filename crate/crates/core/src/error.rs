use std::path::PathBuf;

/// Errors produced by this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// The sample contains no observations for one of the two classes.
    #[error("sample has no {0} observations")]
    MissingClass(&'static str),

    /// A counts or scores file could not be parsed. `line` is 1-based and
    /// counts the header.
    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    /// The exact oracle enumerates `2^(k-1)` partitions and refuses inputs
    /// beyond `max_k` categories.
    #[error("oracle supports at most k = {max_k} categories, got k = {k}")]
    OracleLimit { k: usize, max_k: usize },

    /// The ANOVA variance estimator needs at least two observations per class.
    #[error("variance estimation needs at least 2 observations per class (absent N = {n}, present M = {m})")]
    DegenerateSample { n: u64, m: u64 },

    /// A numeric argument is outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
