// Copyright 2026 The povmsim Developers
// SPDX-License-Identifier: Apache-2.0

//! A one- and two-qubit noisy device model and the scheme comparison built on
//! it.

pub mod circuit;
pub mod compare;
pub mod decompose;
pub mod simulator;

pub use circuit::{Circuit, Gate};
pub use compare::{
    compare_schemes, compile_naimark_circuit, compile_postselection_circuit, proportional_shot_allocation, Comparison,
    ComparisonConfig, Randomization,
};
pub use decompose::{decompose_two_qubit, Connectivity};
pub use simulator::{run_shots, NoiseModel};
