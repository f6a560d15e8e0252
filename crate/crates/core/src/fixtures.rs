// Copyright 2026 The povmsim Developers
// SPDX-License-Identifier: Apache-2.0

//! Qubit measurements shipped with the crate, in the JSON exchange format.
//!
//! `random4` is the random four-outcome POVM with its rank-one vectors
//! re-orthonormalized, so that it passes validation at full tolerance. The
//! three-digit published version is kept as `random4_rounded` and is only
//! used as a plain operator list, together with the reconstructed effects.

use crate::error::{Error, Result};
use crate::io;
use crate::linalg::ComplexMatrix;
use crate::povm::Povm;

const TETRAHEDRAL: &str = include_str!("../fixtures/tetrahedral.json");
const TRINE: &str = include_str!("../fixtures/trine.json");
const RANDOM4: &str = include_str!("../fixtures/random4.json");
const RANDOM4_ROUNDED: &str = include_str!("../fixtures/random4_rounded.json");

const TETRA_POSTSEL: &str = include_str!("../fixtures/tetrahedral_postselection_reconstruction.json");
const TETRA_NAIMARK: &str = include_str!("../fixtures/tetrahedral_naimark_reconstruction.json");
const TRINE_POSTSEL: &str = include_str!("../fixtures/trine_postselection_reconstruction.json");
const TRINE_NAIMARK: &str = include_str!("../fixtures/trine_naimark_reconstruction.json");
const RANDOM4_POSTSEL: &str = include_str!("../fixtures/random4_postselection_reconstruction.json");
const RANDOM4_NAIMARK: &str = include_str!("../fixtures/random4_naimark_reconstruction.json");

/// Names accepted by [`by_name`].
pub const POVM_NAMES: [&str; 4] = ["tetrahedral", "trine", "random4", "trivial"];

pub fn tetrahedral() -> Povm {
    io::povm_from_json(TETRAHEDRAL).expect("tetrahedral fixture is valid")
}

pub fn trine() -> Povm {
    io::povm_from_json(TRINE).expect("trine fixture is valid")
}

pub fn random4() -> Povm {
    io::povm_from_json(RANDOM4).expect("random4 fixture is valid")
}

/// The three published qubit fixtures.
pub fn all_povms() -> Vec<(&'static str, Povm)> {
    vec![("tetrahedral", tetrahedral()), ("trine", trine()), ("random4", random4())]
}

pub fn by_name(name: &str) -> Result<Povm> {
    match name {
        "tetrahedral" => Ok(tetrahedral()),
        "trine" => Ok(trine()),
        "random4" => Ok(random4()),
        "trivial" => Ok(Povm::trivial(2)),
        _ => Err(Error::InvalidArgument(format!("unknown fixture `{name}`; available: {}", POVM_NAMES.join(", ")))),
    }
}

/// Published target and reconstructed effects for one row of the comparison
/// table.
#[derive(Debug, Clone)]
pub struct ReconstructionRow {
    pub name: &'static str,
    pub ideal: Vec<ComplexMatrix>,
    pub naimark: Vec<ComplexMatrix>,
    pub postselection: Vec<ComplexMatrix>,
    /// Published distances `(naimark, postselection)`.
    pub reported: (f64, f64),
}

pub fn reconstruction_rows() -> Vec<ReconstructionRow> {
    let load = |s: &str| io::effects_from_json(s).expect("fixture is well formed");
    vec![
        ReconstructionRow {
            name: "Tetrahedral",
            ideal: load(TETRAHEDRAL),
            naimark: load(TETRA_NAIMARK),
            postselection: load(TETRA_POSTSEL),
            reported: (0.117, 0.023),
        },
        ReconstructionRow {
            name: "Trine",
            ideal: load(TRINE),
            naimark: load(TRINE_NAIMARK),
            postselection: load(TRINE_POSTSEL),
            reported: (0.141, 0.022),
        },
        ReconstructionRow {
            name: "Random 4-effect",
            ideal: load(RANDOM4_ROUNDED),
            naimark: load(RANDOM4_NAIMARK),
            postselection: load(RANDOM4_POSTSEL),
            reported: (0.168, 0.031),
        },
    ]
}
