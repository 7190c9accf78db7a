use thiserror::Error;

/// Errors raised by the solvers and constructors.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Caller supplied something outside the operation's domain.
    #[error("invalid input: {0}")]
    Input(String),

    #[error("no Steiner triple system of order {0} (order must be 1 or 3 mod 6 and at least 3)")]
    UnsupportedOrder(usize),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A pipeline stage could not complete on this instance.
    #[error("stage {stage} failed: {reason}")]
    StageFailure { stage: &'static str, reason: String },

    /// Internal bookkeeping disagreed with itself. Always a bug.
    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("absorbing family construction failed after {attempts} attempts: {reason}")]
    Construction { attempts: usize, reason: String },

    #[error("no unused absorber accepts leftover chunk {chunk:?}")]
    Absorption { chunk: [usize; 4] },

    #[error("search budget exhausted after {nodes} nodes")]
    BudgetExhausted { nodes: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
