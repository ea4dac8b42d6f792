use alloc::string::String;
use core::fmt;

use thiserror::Error;

/// The structural property a validation check found violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Invariant {
    FiniteEntries,
    Hermiticity,
    Positivity,
    Trace,
    Normalization,
    Orthonormality,
    Unitarity,
    Completeness,
    Weights,
    Reconstruction,
    BlockDiagonal,
}

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Invariant::FiniteEntries => "finite entries",
            Invariant::Hermiticity => "hermiticity",
            Invariant::Positivity => "positivity",
            Invariant::Trace => "trace",
            Invariant::Normalization => "normalization",
            Invariant::Orthonormality => "orthonormality",
            Invariant::Unitarity => "unitarity",
            Invariant::Completeness => "completeness",
            Invariant::Weights => "weights",
            Invariant::Reconstruction => "reconstruction",
            Invariant::BlockDiagonal => "block-diagonal memory",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("{invariant} check failed (value {value:e})")]
    Validation { invariant: Invariant, value: f64 },

    #[error("memory dimension {memory} is below the state rank {rank}")]
    Capacity { rank: usize, memory: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("{0} requires a decomposition into pure members")]
    MixedMembers(&'static str),
}

impl Error {
    pub(crate) fn validation(invariant: Invariant, value: f64) -> Self {
        Error::Validation { invariant, value }
    }

    /// The violated invariant, for validation failures.
    pub fn invariant(&self) -> Option<Invariant> {
        match self {
            Error::Validation { invariant, .. } => Some(*invariant),
            _ => None,
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
