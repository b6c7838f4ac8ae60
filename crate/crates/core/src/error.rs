use thiserror::Error;

use crate::C64;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("invalid representation: {0}")]
    InvalidRep(String),

    #[error("pole of {function} at {at}")]
    Pole { function: &'static str, at: C64 },

    #[error("transfer matrix pole: 2s+m+j = 1 at m={m}, j={j}, component k={k}")]
    MatrixPole { m: usize, j: usize, k: usize },

    #[error("pole at the shifted point s + {shift}/2 (2s+m+j = 1 at m={m}, j={j}, component k={k})")]
    ShiftedPole { shift: usize, m: usize, j: usize, k: usize },

    #[error("word {word} is not hyperbolic (|trace| = {trace})")]
    NotHyperbolic { word: String, trace: f64 },

    #[error("outside the valid regime: {0}")]
    Regime(String),

    #[error("bracket failure: {0}")]
    Bracket(String),

    #[error("contour failure: {0}")]
    Contour(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),
}

/// Coarse error classes, used by the command line to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Parameter,
    Numerical,
    Resource,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Domain(_) | Error::InvalidRep(_) => ErrorKind::Parameter,
            Error::Resource(_) => ErrorKind::Resource,
            _ => ErrorKind::Numerical,
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
