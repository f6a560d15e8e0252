// Copyright 2026 The povmsim Developers
// SPDX-License-Identifier: Apache-2.0

//! Numerical tolerances shared across modules.
//!
//! The base tolerances for Hermiticity, positivity, projectors and completeness
//! are scaled by the Hilbert-space dimension before use (see [`scaled`]).

pub const HERMITIAN: f64 = 1e-9;
pub const PSD: f64 = 1e-9;
pub const PROJECTOR: f64 = 1e-9;
pub const COMPLETENESS: f64 = 1e-9;
pub const NORM: f64 = 1e-12;
pub const IO: f64 = 1e-12;
/// Overlaps with modulus below this are treated as orthogonal.
pub const ORTHOGONAL: f64 = 1e-9;
pub const UNAMBIGUOUS: f64 = 1e-9;
/// Linear independence threshold, relative to the largest singular value.
pub const LINEAR_INDEPENDENCE: f64 = 1e-10;
pub const DECOMPOSITION: f64 = 1e-8;

#[inline]
pub fn scaled(tau: f64, dim: usize) -> f64 {
    tau * dim.max(1) as f64
}
