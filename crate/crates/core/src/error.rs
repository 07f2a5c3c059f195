use thiserror::Error;

use crate::partition::PieceId;

/// Errors raised by the engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Inconsistent construction data (mismatched domains, bad permutation, ...).
    #[error("structural error: {0}")]
    Structural(String),

    /// A point was handed to a map or function outside its declared domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid numeric argument (non-positive tolerance, p <= 0, duplicate nodes, ...).
    #[error("argument error: {0}")]
    Argument(String),

    /// The point is not covered by any image of the partition.
    #[error("point unlocatable: {0}")]
    Unlocatable(String),

    /// A map evaluation hit a pole or produced a non-finite value.
    #[error("singular evaluation: {0}")]
    Singular(String),

    #[error("not contractive: piece {piece} has Lipschitz bound {sup}")]
    NotContractive { piece: PieceId, sup: f64 },

    #[error("depth exceeded: partial value {partial}, remaining error bound {bound}")]
    DepthExceeded { partial: f64, bound: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
