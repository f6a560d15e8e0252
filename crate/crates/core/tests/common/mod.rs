// Copyright 2026 The povmsim Developers
// SPDX-License-Identifier: Apache-2.0

//! Reference computations written directly against nalgebra, independent of
//! the library's own linear algebra.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use povmsim::{ComplexMatrix, QuantumState};

pub type Dm = DMatrix<Complex64>;

pub fn dense(m: &ComplexMatrix) -> Dm {
    let d = m.dim();
    DMatrix::from_fn(d, d, |r, c| m.get(r, c))
}

pub fn density(state: &QuantumState) -> Dm {
    match state {
        QuantumState::Pure(v) => {
            let d = v.len();
            DMatrix::from_fn(d, d, |r, c| v[r] * v[c].conj())
        }
        QuantumState::Mixed(m) => dense(m),
    }
}

/// `tr(M rho)` by explicit summation.
pub fn born(effect: &ComplexMatrix, state: &QuantumState) -> f64 {
    let (m, rho) = (dense(effect), density(state));
    let d = m.nrows();
    let mut t = Complex64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            t += m[(i, j)] * rho[(j, i)];
        }
    }
    t.re
}

pub fn spectral_norm(m: &Dm) -> f64 {
    m.clone().singular_values().iter().cloned().fold(0.0, f64::max)
}

/// Operational distance by enumerating every outcome subset, the shorter
/// list padded with zeros.
pub fn operational_distance_oracle(a: &[ComplexMatrix], b: &[ComplexMatrix]) -> f64 {
    let d = a[0].dim();
    let k = a.len().max(b.len());
    let zero = DMatrix::zeros(d, d);
    let diffs: Vec<Dm> = (0..k)
        .map(|i| a.get(i).map(dense).unwrap_or(zero.clone()) - b.get(i).map(dense).unwrap_or(zero.clone()))
        .collect();
    let mut best = 0.0f64;
    for mask in 0u32..(1 << k) {
        let mut s = zero.clone();
        for (i, m) in diffs.iter().enumerate() {
            if mask >> i & 1 == 1 {
                s += m;
            }
        }
        best = best.max(spectral_norm(&s));
    }
    best
}

/// `(q M_1, ..., q M_n, (1 - q) 1)`.
pub fn mq_oracle(effects: &[ComplexMatrix], q: f64) -> Vec<Dm> {
    let d = effects[0].dim();
    let mut out: Vec<Dm> = effects.iter().map(|e| dense(e) * Complex64::new(q, 0.0)).collect();
    out.push(DMatrix::identity(d, d) * Complex64::new(1.0 - q, 0.0));
    out
}

pub fn max_entry_diff(a: &Dm, b: &Dm) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Five binomial standard deviations of a frequency estimated from `n`
/// trials, floored for degenerate probabilities.
pub fn five_sigma(p: f64, n: u64) -> f64 {
    5.0 * (p * (1.0 - p) / n as f64).sqrt() + 1e-12
}
