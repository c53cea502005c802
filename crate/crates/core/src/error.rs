use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Malformed arguments: out-of-range vertices, size mismatches, bad tuples.
    #[error("input error: {0}")]
    Input(String),

    /// The arguments are well formed but violate an operation's precondition.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// A materialization or closure would exceed the configured cap.
    #[error("resource limit: {what} needs {required} but the cap is {cap}")]
    Resource {
        what: String,
        required: u128,
        cap: usize,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Two independent procedures disagreed. Never expected; indicates a bug.
    #[error("internal consistency error: {0}")]
    Consistency(String),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }
}

/// Fails with [`Error::Resource`] when `required` exceeds `cap`.
pub(crate) fn check_cap(what: &str, required: u128, cap: usize) -> Result<()> {
    if required > cap as u128 {
        Err(Error::Resource {
            what: what.to_string(),
            required,
            cap,
        })
    } else {
        Ok(())
    }
}

/// `base^exp` saturating at `u128::MAX`.
pub(crate) fn sat_pow(base: usize, exp: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base as u128);
        if acc == u128::MAX {
            break;
        }
    }
    acc
}
