// Copyright 2026 The povmsim Developers
// SPDX-License-Identifier: Apache-2.0

//! One- and two-qubit circuits. Qubit 0 is the most significant bit of a
//! basis index.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{pauli, ComplexMatrix, C64};
use crate::tol;

#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    Su2 { qubit: usize, matrix: ComplexMatrix },
    Cnot { control: usize, target: usize },
    H { qubit: usize },
}

impl Gate {
    pub fn su2(qubit: usize, matrix: ComplexMatrix) -> Gate {
        Gate::Su2 { qubit, matrix }
    }

    pub fn x(qubit: usize) -> Gate {
        Gate::Su2 { qubit, matrix: pauli::x() }
    }

    pub fn cnot(control: usize, target: usize) -> Gate {
        Gate::Cnot { control, target }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::Su2 { qubit, .. } | Gate::H { qubit } => vec![*qubit],
            Gate::Cnot { control, target } => vec![*control, *target],
        }
    }

    /// The gate as an operator on the whole register.
    pub fn operator(&self, qubits: usize) -> ComplexMatrix {
        match self {
            Gate::Su2 { qubit, matrix } => on_qubit(matrix, *qubit, qubits),
            Gate::H { qubit } => on_qubit(&hadamard(), *qubit, qubits),
            Gate::Cnot { control, target } => {
                let dim = 1 << qubits;
                let mut entries = vec![C64::new(0.0, 0.0); dim * dim];
                for col in 0..dim {
                    let cbit = col >> (qubits - 1 - control) & 1;
                    let row = if cbit == 1 { col ^ (1 << (qubits - 1 - target)) } else { col };
                    entries[row * dim + col] = C64::new(1.0, 0.0);
                }
                ComplexMatrix::from_row_major(dim, &entries).expect("permutation matrix")
            }
        }
    }
}

/// Embeds a single-qubit operator acting on `qubit`.
pub fn on_qubit(m: &ComplexMatrix, qubit: usize, qubits: usize) -> ComplexMatrix {
    let id = ComplexMatrix::identity(2);
    let mut out = if qubit == 0 { m.clone() } else { id.clone() };
    for q in 1..qubits {
        out = out.kron(if q == qubit { m } else { &id });
    }
    out
}

pub fn hadamard() -> ComplexMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_row_major(2, &[C64::new(h, 0.0), C64::new(h, 0.0), C64::new(h, 0.0), C64::new(-h, 0.0)])
        .expect("finite")
}

/// `exp(-i t Z / 2)`.
pub fn rz(t: f64) -> ComplexMatrix {
    let z = C64::new(0.0, 0.0);
    ComplexMatrix::from_row_major(2, &[C64::from_polar(1.0, -t / 2.0), z, z, C64::from_polar(1.0, t / 2.0)])
        .expect("finite")
}

/// `exp(-i t Y / 2)`.
pub fn ry(t: f64) -> ComplexMatrix {
    let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
    ComplexMatrix::from_row_major(2, &[C64::new(c, 0.0), C64::new(-s, 0.0), C64::new(s, 0.0), C64::new(c, 0.0)])
        .expect("finite")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    qubits: usize,
    gates: Vec<Gate>,
    measured: Vec<usize>,
}

impl Circuit {
    pub fn new(qubits: usize, gates: Vec<Gate>, measured: Vec<usize>) -> Result<Self> {
        if !(1..=2).contains(&qubits) {
            return Err(Error::InvalidArgument(format!("{qubits} qubits; only 1 or 2 are supported")));
        }
        for g in &gates {
            let qs = g.qubits();
            if qs.iter().any(|&q| q >= qubits) {
                return Err(Error::InvalidArgument(format!("gate {g:?} addresses a missing qubit")));
            }
            match g {
                Gate::Cnot { control, target } if control == target => {
                    return Err(Error::InvalidArgument("CNOT control equals target".into()));
                }
                Gate::Su2 { matrix, .. } => {
                    if matrix.dim() != 2 {
                        return Err(Error::DimensionMismatch { expected: 2, found: matrix.dim() });
                    }
                    let dev = matrix.unitarity_deviation();
                    if dev > tol::COMPLETENESS {
                        return Err(Error::invariant("single-qubit gate is unitary", dev));
                    }
                }
                _ => {}
            }
        }
        if measured.is_empty() || measured.iter().any(|&q| q >= qubits) {
            return Err(Error::InvalidArgument("measured qubits out of range".into()));
        }
        Ok(Circuit { qubits, gates, measured })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn measured(&self) -> &[usize] {
        &self.measured
    }

    pub fn cnot_count(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, Gate::Cnot { .. })).count()
    }

    /// Product of all gates, first gate rightmost.
    pub fn unitary(&self) -> ComplexMatrix {
        self.gates.iter().fold(ComplexMatrix::identity(self.dim()), |acc, g| &g.operator(self.qubits) * &acc)
    }

    /// Same circuit with extra gates appended before measurement.
    pub fn then(&self, extra: impl IntoIterator<Item = Gate>) -> Result<Circuit> {
        let mut gates = self.gates.clone();
        gates.extend(extra);
        Circuit::new(self.qubits, gates, self.measured.clone())
    }

    pub fn summary(&self) -> CircuitSummary {
        CircuitSummary {
            qubits: self.qubits,
            gates: self.gates.len(),
            cnots: self.cnot_count(),
            hadamards: self.gates.iter().filter(|g| matches!(g, Gate::H { .. })).count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CircuitSummary {
    pub qubits: usize,
    pub gates: usize,
    pub cnots: usize,
    pub hadamards: usize,
}
