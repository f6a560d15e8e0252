// Copyright 2026 The povmsim Developers
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::FRAC_1_SQRT_2;

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, C64, ONE, ZERO};
use crate::rng;
use crate::tol;

/// A quantum state, either as a pure unit vector or a density operator.
#[derive(Debug, Clone, PartialEq)]
pub enum QuantumState {
    Pure(Vec<C64>),
    Mixed(ComplexMatrix),
}

impl QuantumState {
    pub fn pure(vector: Vec<C64>) -> Result<Self> {
        if vector.is_empty() {
            return Err(Error::InvalidArgument("state dimension must be at least 1".into()));
        }
        if vector.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let dev = (linalg::norm(&vector) - 1.0).abs();
        if dev > tol::NORM {
            return Err(Error::invariant("unit norm", dev));
        }
        Ok(QuantumState::Pure(vector))
    }

    /// Normalizes `vector` before wrapping it.
    pub fn pure_normalized(vector: &[C64]) -> Result<Self> {
        let n = linalg::norm(vector);
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::InvalidArgument("cannot normalize a zero vector".into()));
        }
        Self::pure(linalg::normalized(vector))
    }

    pub fn density(matrix: ComplexMatrix) -> Result<Self> {
        let d = matrix.dim();
        let herm = matrix.hermitian_deviation();
        if herm > tol::scaled(tol::HERMITIAN, d) {
            return Err(Error::invariant("hermitian", herm));
        }
        let tr = (matrix.trace() - ONE).norm();
        if tr > tol::scaled(tol::COMPLETENESS, d) {
            return Err(Error::invariant("unit trace", tr));
        }
        let min = linalg::min_eigenvalue(&matrix)?;
        if min < -tol::scaled(tol::PSD, d) {
            return Err(Error::invariant("positive semidefinite", -min));
        }
        Ok(QuantumState::Mixed(matrix))
    }

    /// Computational basis state `|k>`.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = vec![ZERO; dim];
        v[k] = ONE;
        QuantumState::Pure(v)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        QuantumState::Mixed(ComplexMatrix::identity(dim).scale(1.0 / dim as f64))
    }

    pub fn dim(&self) -> usize {
        match self {
            QuantumState::Pure(v) => v.len(),
            QuantumState::Mixed(m) => m.dim(),
        }
    }

    pub fn density_matrix(&self) -> ComplexMatrix {
        match self {
            QuantumState::Pure(v) => ComplexMatrix::outer(v),
            QuantumState::Mixed(m) => m.clone(),
        }
    }

    pub fn as_pure(&self) -> Option<&[C64]> {
        match self {
            QuantumState::Pure(v) => Some(v),
            QuantumState::Mixed(_) => None,
        }
    }

    /// `tr(rho * op)`, real part.
    pub fn expectation(&self, op: &ComplexMatrix) -> f64 {
        match self {
            QuantumState::Pure(v) => op.expectation(v).re,
            QuantumState::Mixed(m) => m.trace_product(op).re,
        }
    }

    /// Bloch vector `(x, y, z)` of a qubit state.
    pub fn bloch_vector(&self) -> Result<[f64; 3]> {
        if self.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: self.dim() });
        }
        let rho = self.density_matrix();
        let r01 = rho.get(0, 1);
        Ok([2.0 * r01.re, -2.0 * r01.im, (rho.get(0, 0) - rho.get(1, 1)).re])
    }
}

/// A Haar-random pure state: a normalized complex Gaussian vector.
pub fn haar_random_pure_state(dim: usize, seed: u64) -> Result<QuantumState> {
    let mut r = rng::from_seed(seed);
    haar_random_vector(dim, &mut r).map(QuantumState::Pure)
}

pub fn haar_random_vector<R: rand::Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Vec<C64>> {
    if dim == 0 {
        return Err(Error::InvalidArgument("state dimension must be at least 1".into()));
    }
    loop {
        let v: Vec<C64> = (0..dim)
            .map(|_| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                C64::new(re, im)
            })
            .collect();
        let n = linalg::norm(&v);
        if n > 1e-300 {
            return Ok(v.iter().map(|z| z / n).collect());
        }
    }
}

/// Six probe states used to compare statistics against the Born rule.
///
/// For qubits these are the eigenstates of the Pauli matrices. In higher
/// dimension: `|0>`, `|1>`, the real and imaginary superpositions of them, the
/// uniform superposition and one fixed pseudo-random state.
pub fn probe_states(dim: usize) -> Vec<QuantumState> {
    if dim == 1 {
        return vec![QuantumState::basis(1, 0)];
    }
    let h = FRAC_1_SQRT_2;
    let two = |a: C64, b: C64| {
        let mut v = vec![ZERO; dim];
        v[0] = a;
        v[1] = b;
        QuantumState::Pure(v)
    };
    let mut probes = vec![
        two(ONE, ZERO),
        two(ZERO, ONE),
        two(C64::new(h, 0.0), C64::new(h, 0.0)),
        two(C64::new(h, 0.0), C64::new(0.0, h)),
    ];
    if dim == 2 {
        probes.push(two(C64::new(h, 0.0), C64::new(-h, 0.0)));
        probes.push(two(C64::new(h, 0.0), C64::new(0.0, -h)));
    } else {
        let u = 1.0 / (dim as f64).sqrt();
        probes.push(QuantumState::Pure(vec![C64::new(u, 0.0); dim]));
        probes.push(haar_random_pure_state(dim, 0x5eed).expect("dim >= 1"));
    }
    probes
}
