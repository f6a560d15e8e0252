// Copyright 2026 The povmsim Developers
// SPDX-License-Identifier: Apache-2.0

//! Simulation of generalized quantum measurements by projective measurements,
//! classical randomness and postselection, with Naimark dilations, unambiguous
//! state discrimination, measurement tomography and a small noisy two-qubit
//! device model for comparing the two realizations.

pub mod cli;
pub mod device;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod linalg;
pub mod naimark;
pub mod povm;
pub mod rng;
pub mod simulation;
pub mod state;
pub mod tol;
pub mod tomography;
pub mod usd;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, C64};
pub use povm::{BlochVector, Effect, Povm, ProjectiveMeasurement};
pub use state::QuantumState;
