use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid alphabets: {0}")]
    Alphabet(String),

    #[error("{kind} index {index} out of range (alphabet size {size})")]
    SymbolOutOfRange {
        kind: &'static str,
        index: usize,
        size: usize,
    },

    #[error("reward value {0} is not in the reward alphabet")]
    UnknownReward(f64),

    #[error("node {0} is not a leaf")]
    NotALeaf(usize),

    #[error("node {0} has no {1} permit")]
    NoPermit(usize, &'static str),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
