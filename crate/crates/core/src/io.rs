// Copyright 2026 The povmsim Developers
// SPDX-License-Identifier: Apache-2.0

//! JSON measurement-exchange format.
//!
//! Complex numbers are two-element arrays `[re, im]`; matrices are lists of
//! rows. Documents:
//!
//! ```text
//! POVM      {"dim": d, "effects": [[[[re, im], ..], ..], ..], "labels": [..]}
//! state     {"dim": d, "vector": [[re, im], ..]}     (or "matrix": [...])
//! ensemble  {"states": [state, ..], "probs": [..]}
//! matrix    {"dim": d, "matrix": [[[re, im], ..], ..]}
//! ```
//!
//! A POVM document may carry `"kind": "effects"`, marking a plain list of
//! operators (for instance a tomographic reconstruction) that is loaded
//! without the POVM invariants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::povm::Povm;
use crate::state::QuantumState;
use crate::usd::Ensemble;

type JsonComplex = [f64; 2];
type JsonMatrix = Vec<Vec<JsonComplex>>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PovmDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    pub dim: usize,
    pub effects: Vec<JsonMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateDoc {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector: Option<Vec<JsonComplex>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<JsonMatrix>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleDoc {
    pub states: Vec<StateDoc>,
    pub probs: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixDoc {
    pub dim: usize,
    pub matrix: JsonMatrix,
}

fn to_json_complex(z: C64) -> JsonComplex {
    [z.re, z.im]
}

fn to_json_matrix(m: &ComplexMatrix) -> JsonMatrix {
    (0..m.dim()).map(|r| (0..m.dim()).map(|c| to_json_complex(m.get(r, c))).collect()).collect()
}

fn from_json_matrix(dim: usize, rows: &JsonMatrix) -> Result<ComplexMatrix> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(Error::Format(format!("expected a {dim}x{dim} matrix")));
    }
    let entries: Vec<C64> = rows.iter().flatten().map(|&[re, im]| C64::new(re, im)).collect();
    ComplexMatrix::from_row_major(dim, &entries)
}

impl PovmDoc {
    pub fn from_povm(povm: &Povm) -> Self {
        PovmDoc {
            name: None,
            kind: None,
            dim: povm.dim(),
            effects: povm.effects().iter().map(to_json_matrix).collect(),
            labels: Some(povm.labels().to_vec()),
        }
    }

    pub fn from_effects(effects: &[ComplexMatrix]) -> Self {
        PovmDoc {
            name: None,
            kind: Some("effects".into()),
            dim: effects.first().map(ComplexMatrix::dim).unwrap_or(0),
            effects: effects.iter().map(to_json_matrix).collect(),
            labels: None,
        }
    }

    /// Operators without any measurement invariants checked.
    pub fn effects(&self) -> Result<Vec<ComplexMatrix>> {
        if self.effects.is_empty() {
            return Err(Error::Format("document has no effects".into()));
        }
        self.effects.iter().map(|m| from_json_matrix(self.dim, m)).collect()
    }

    pub fn to_povm(&self) -> Result<Povm> {
        let effects = self.effects()?;
        match &self.labels {
            Some(labels) => Povm::with_labels(effects, labels.clone()),
            None => Povm::new(effects),
        }
    }
}

impl StateDoc {
    pub fn from_state(state: &QuantumState) -> Self {
        match state {
            QuantumState::Pure(v) => {
                StateDoc { dim: v.len(), vector: Some(v.iter().copied().map(to_json_complex).collect()), matrix: None }
            }
            QuantumState::Mixed(m) => StateDoc { dim: m.dim(), vector: None, matrix: Some(to_json_matrix(m)) },
        }
    }

    pub fn to_state(&self) -> Result<QuantumState> {
        match (&self.vector, &self.matrix) {
            (Some(v), None) => {
                if v.len() != self.dim {
                    return Err(Error::Format(format!("vector has {} entries, dim is {}", v.len(), self.dim)));
                }
                QuantumState::pure(v.iter().map(|&[re, im]| C64::new(re, im)).collect())
            }
            (None, Some(m)) => QuantumState::density(from_json_matrix(self.dim, m)?),
            _ => Err(Error::Format("state needs exactly one of `vector` or `matrix`".into())),
        }
    }
}

pub fn povm_to_json(povm: &Povm) -> Result<String> {
    Ok(serde_json::to_string_pretty(&PovmDoc::from_povm(povm))?)
}

pub fn povm_from_json(text: &str) -> Result<Povm> {
    let doc: PovmDoc = serde_json::from_str(text)?;
    doc.to_povm()
}

/// Loads any POVM-shaped document as a raw operator list.
pub fn effects_from_json(text: &str) -> Result<Vec<ComplexMatrix>> {
    let doc: PovmDoc = serde_json::from_str(text)?;
    doc.effects()
}

pub fn effects_to_json(effects: &[ComplexMatrix]) -> Result<String> {
    Ok(serde_json::to_string_pretty(&PovmDoc::from_effects(effects))?)
}

pub fn state_to_json(state: &QuantumState) -> Result<String> {
    Ok(serde_json::to_string_pretty(&StateDoc::from_state(state))?)
}

pub fn state_from_json(text: &str) -> Result<QuantumState> {
    let doc: StateDoc = serde_json::from_str(text)?;
    doc.to_state()
}

pub fn ensemble_to_json(ensemble: &Ensemble) -> Result<String> {
    let doc = EnsembleDoc {
        states: ensemble.states().iter().map(|v| StateDoc::from_state(&QuantumState::Pure(v.clone()))).collect(),
        probs: ensemble.probs().to_vec(),
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

pub fn ensemble_from_json(text: &str) -> Result<Ensemble> {
    let doc: EnsembleDoc = serde_json::from_str(text)?;
    let states = doc
        .states
        .iter()
        .map(|s| match s.to_state()? {
            QuantumState::Pure(v) => Ok(v),
            QuantumState::Mixed(_) => Err(Error::Format("ensemble states must be pure".into())),
        })
        .collect::<Result<Vec<_>>>()?;
    Ensemble::new(states, doc.probs)
}

pub fn matrix_to_json(m: &ComplexMatrix) -> Result<String> {
    Ok(serde_json::to_string_pretty(&MatrixDoc { dim: m.dim(), matrix: to_json_matrix(m) })?)
}

pub fn matrix_from_json(text: &str) -> Result<ComplexMatrix> {
    let doc: MatrixDoc = serde_json::from_str(text)?;
    from_json_matrix(doc.dim, &doc.matrix)
}
