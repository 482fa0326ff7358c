use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("blocklength mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid blocklength {0} (supported: 1..={max})", max = crate::codeword::MAX_BLOCKLENGTH)]
    InvalidBlocklength(usize),

    #[error("value does not fit in {len} bits")]
    Overflow { len: usize },

    #[error("invalid bit character {found:?} at position {position}")]
    InvalidBit { position: usize, found: char },

    #[error("codeword group is empty")]
    EmptyGroup,

    #[error("minimum distance must be at least 1")]
    ZeroDistance,

    #[error("level {level} is out of range 1..={levels}")]
    LevelOutOfRange { level: usize, levels: usize },

    #[error("message index {index} is out of range for a group of {size}")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config{}: {message}", if *line > 0 { format!(" line {line}") } else { String::new() })]
    Config { line: usize, message: String },

    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn config(line: usize, message: impl Into<String>) -> Self {
        Error::Config {
            line,
            message: message.into(),
        }
    }
}
