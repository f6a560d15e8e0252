// Copyright 2026 The povmsim Developers
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("invariant `{invariant}` violated by {deviation:.3e}")]
    Invariant { invariant: &'static str, deviation: f64 },

    #[error("precondition not met: {0}")]
    Precondition(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("two-qubit decomposition residual {residual:.3e} exceeds tolerance")]
    Decomposition { residual: f64 },

    #[error("malformed document: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invariant(invariant: &'static str, deviation: f64) -> Self {
        Error::Invariant { invariant, deviation }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
