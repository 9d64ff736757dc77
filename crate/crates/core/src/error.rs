use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed numeric input (NaN entries, shape mismatch, out-of-range parameters).
    #[error("invalid input: {0}")]
    Input(String),

    /// The instance cannot be handled (zero smoothness constant, unbounded oracle, ...).
    #[error("degenerate instance: {0}")]
    Degenerate(String),

    /// An operation was called before the state it needs exists.
    #[error("invalid state: {0}")]
    State(String),

    /// A caller broke a documented precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Invalid configuration; `key` names the offending setting.
    #[error("config error in `{key}`: {msg}")]
    Config { key: String, msg: String },

    /// An oracle failed inside a run.
    #[error("oracle failure at iteration {iter}: {source}")]
    Oracle {
        iter: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn config(key: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            msg: msg.into(),
        }
    }

    pub(crate) fn at_iter(self, iter: usize) -> Self {
        match self {
            e @ Error::Oracle { .. } => e,
            e => Error::Oracle {
                iter,
                source: Box::new(e),
            },
        }
    }

    /// True for errors that stem from user configuration rather than a failing run.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config { .. } | Error::Unsupported(_))
    }
}
