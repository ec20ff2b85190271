use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("node index {index} out of range for n={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("outcome tree has {leaves} leaves, limit is {limit}")]
    TreeTooLarge { leaves: f64, limit: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
