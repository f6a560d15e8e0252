// Copyright 2026 The povmsim Developers
// SPDX-License-Identifier: Apache-2.0

//! Naimark dilation of rank-one POVMs.
//!
//! A rank-one POVM `M_i = a_i |psi_i><psi_i|` defines the isometry
//! `V = sum_i sqrt(a_i) |i><psi_i|`. Completing `V` to a unitary `U` on a
//! larger space and measuring in the computational basis reproduces the POVM.
//!
//! In qubit-register mode the extended space has dimension `2^m >= n` and the
//! system occupies the most significant qubits: system index `j` sits at
//! position `j * (d_ext / d)`, i.e. the ancilla qubits start in `|0>`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64, ZERO};
use crate::povm::Povm;
use crate::state::QuantumState;
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DilationMode {
    /// Extended dimension equals the number of outcomes.
    Abstract,
    /// Extended dimension is the smallest power of two covering the outcomes.
    QubitRegister,
}

#[derive(Debug, Clone)]
pub struct NaimarkDilation {
    source: Povm,
    mode: DilationMode,
    unitary: ComplexMatrix,
    embedding: Vec<usize>,
    isometry_residual: f64,
    unitarity_residual: f64,
}

pub fn naimark_dilation(povm: &Povm, mode: DilationMode) -> Result<NaimarkDilation> {
    let parts = povm.rank_one_parts()?;
    let (d, n) = (povm.dim(), povm.outcomes());
    if n < d {
        return Err(Error::Precondition(format!("{n} outcomes cannot dilate a dimension-{d} system")));
    }
    let d_ext = match mode {
        DilationMode::Abstract => n,
        DilationMode::QubitRegister => {
            if !d.is_power_of_two() {
                return Err(Error::Precondition(format!("dimension {d} is not a qubit register")));
            }
            n.next_power_of_two()
        }
    };
    let embedding: Vec<usize> = match mode {
        DilationMode::Abstract => (0..d).collect(),
        DilationMode::QubitRegister => (0..d).map(|j| j * (d_ext / d)).collect(),
    };

    let mut u = DMatrix::<C64>::zeros(d_ext, d_ext);
    for (j, &col) in embedding.iter().enumerate() {
        for (i, (a, psi)) in parts.iter().enumerate() {
            u[(i, col)] = psi[j].conj() * a.sqrt();
        }
    }
    let isometry_residual = {
        let v = DMatrix::from_fn(d_ext, d, |r, c| u[(r, embedding[c])]);
        (v.adjoint() * &v - DMatrix::identity(d, d)).iter().map(|z| z.norm()).fold(0.0, f64::max)
    };
    if isometry_residual > tol::scaled(tol::COMPLETENESS, d) {
        return Err(Error::invariant("isometry is orthonormal", isometry_residual));
    }

    let mut free: Vec<usize> = (0..d_ext).filter(|c| !embedding.contains(c)).collect();
    // unused outcomes map to themselves where possible
    for k in n..d_ext {
        let slot = free.iter().position(|&c| c == k).unwrap_or(0);
        let col = free.remove(slot);
        u[(k, col)] = C64::new(1.0, 0.0);
    }
    let mut filled: Vec<usize> = (0..d_ext).filter(|c| !free.contains(c)).collect();
    for k in 0..d_ext {
        if free.is_empty() {
            break;
        }
        let mut v = DVector::<C64>::zeros(d_ext);
        v[k] = C64::new(1.0, 0.0);
        for _ in 0..2 {
            for &c in &filled {
                let col = u.column(c);
                let proj = col.dotc(&v);
                v -= col * proj;
            }
        }
        let norm = v.norm();
        if norm > 1e-6 {
            let col = free.remove(0);
            u.set_column(col, &(v / C64::new(norm, 0.0)));
            filled.push(col);
        }
    }
    let unitary = ComplexMatrix::from_dmatrix(u)?;
    let unitarity_residual = unitary.unitarity_deviation();
    if unitarity_residual > tol::scaled(tol::COMPLETENESS, d_ext) {
        return Err(Error::invariant("completion is unitary", unitarity_residual));
    }
    Ok(NaimarkDilation { source: povm.clone(), mode, unitary, embedding, isometry_residual, unitarity_residual })
}

impl NaimarkDilation {
    pub fn source(&self) -> &Povm {
        &self.source
    }

    pub fn mode(&self) -> DilationMode {
        self.mode
    }

    pub fn unitary(&self) -> &ComplexMatrix {
        &self.unitary
    }

    /// Position of each system basis vector in the extended space.
    pub fn embedding(&self) -> &[usize] {
        &self.embedding
    }

    pub fn extended_dim(&self) -> usize {
        self.unitary.dim()
    }

    /// Largest entry of `V^dagger V - 1`.
    pub fn isometry_residual(&self) -> f64 {
        self.isometry_residual
    }

    /// Largest entry of `U^dagger U - 1`.
    pub fn unitarity_residual(&self) -> f64 {
        self.unitarity_residual
    }

    /// Embeds a system state into the extended space.
    pub fn embed(&self, state: &QuantumState) -> Result<QuantumState> {
        let d = self.source.dim();
        if state.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: state.dim() });
        }
        let d_ext = self.extended_dim();
        Ok(match state {
            QuantumState::Pure(v) => {
                let mut w = vec![ZERO; d_ext];
                for (j, &pos) in self.embedding.iter().enumerate() {
                    w[pos] = v[j];
                }
                QuantumState::Pure(w)
            }
            QuantumState::Mixed(m) => {
                let mut entries = vec![ZERO; d_ext * d_ext];
                for (a, &pa) in self.embedding.iter().enumerate() {
                    for (b, &pb) in self.embedding.iter().enumerate() {
                        entries[pa * d_ext + pb] = m.get(a, b);
                    }
                }
                QuantumState::Mixed(ComplexMatrix::from_row_major(d_ext, &entries)?)
            }
        })
    }

    pub fn to_json(&self) -> Result<String> {
        crate::io::matrix_to_json(&self.unitary)
    }
}

/// Exact computational-basis distribution of `U (embedded state) U^dagger`
/// over all `d_ext` outcomes.
pub fn dilated_statistics(dilation: &NaimarkDilation, state: &QuantumState) -> Result<Vec<f64>> {
    let ext = dilation.embed(state)?;
    let u = &dilation.unitary;
    let probs: Vec<f64> = match &ext {
        QuantumState::Pure(v) => u.apply(v).iter().map(|z| z.norm_sqr()).collect(),
        QuantumState::Mixed(m) => (&(u * m) * &u.adjoint()).real_diagonal().iter().map(|p| p.max(0.0)).collect(),
    };
    Ok(probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::povm::{born_probabilities, random_rank_one_povm};
    use crate::state::probe_states;

    fn assert_matches_born(dil: &NaimarkDilation, states: &[QuantumState]) {
        let n = dil.source().outcomes();
        for s in states {
            let got = dilated_statistics(dil, s).unwrap();
            let want = born_probabilities(s, dil.source()).unwrap();
            for i in 0..n {
                assert!((got[i] - want[i]).abs() < 1e-9, "{got:?} vs {want:?}");
            }
            for p in &got[n..] {
                assert!(p.abs() < 1e-9);
            }
        }
    }

    #[test]
    fn basis_measurement_is_already_projective() {
        let dil = naimark_dilation(&Povm::computational_basis(2), DilationMode::Abstract).unwrap();
        for r in 0..2 {
            for c in 0..2 {
                let z = dil.unitary().get(r, c).norm();
                assert!((z - if r == c { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
        for k in 0..2 {
            let p = dilated_statistics(&dil, &QuantumState::basis(2, k)).unwrap();
            assert!((p[k] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn trine_in_two_qubits_pads_with_identity() {
        let dil = naimark_dilation(&fixtures::trine(), DilationMode::QubitRegister).unwrap();
        assert_eq!(dil.extended_dim(), 4);
        assert_eq!(dil.embedding(), &[0, 2]);
        assert!((dil.unitary().get(3, 3).norm() - 1.0).abs() < 1e-12);
        assert_matches_born(&dil, &probe_states(2));
    }

    #[test]
    fn tetrahedral_statistics() {
        let dil = naimark_dilation(&fixtures::tetrahedral(), DilationMode::QubitRegister).unwrap();
        let p = dilated_statistics(&dil, &QuantumState::basis(2, 0)).unwrap();
        let want = [0.5, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0];
        for (a, b) in p.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_matches_born(&dil, &probe_states(2));
        let mixed = QuantumState::maximally_mixed(2);
        assert_matches_born(&dil, &[mixed]);
    }

    #[test]
    fn fixtures_in_both_modes() {
        for (_, m) in fixtures::all_povms() {
            for mode in [DilationMode::Abstract, DilationMode::QubitRegister] {
                let dil = naimark_dilation(&m, mode).unwrap();
                assert!(dil.isometry_residual() < 1e-9);
                assert!(dil.unitarity_residual() < 1e-9);
                assert_matches_born(&dil, &probe_states(2));
            }
        }
    }

    #[test]
    fn random_rank_one_povms() {
        for d in [2usize, 3] {
            for seed in 0..20 {
                let m = random_rank_one_povm(d, d + 1 + (seed as usize % 3), seed).unwrap();
                let dil = naimark_dilation(&m, DilationMode::Abstract).unwrap();
                assert!(dil.unitarity_residual() < 1e-9);
                assert_matches_born(&dil, &probe_states(d));
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(naimark_dilation(&Povm::trivial(2), DilationMode::Abstract).is_err());
        let m = random_rank_one_povm(3, 4, 1).unwrap();
        assert!(naimark_dilation(&m, DilationMode::QubitRegister).is_err());
        let dil = naimark_dilation(&fixtures::trine(), DilationMode::Abstract).unwrap();
        assert!(dilated_statistics(&dil, &QuantumState::basis(3, 0)).is_err());
    }

    #[test]
    fn unitary_exports_as_json() {
        let dil = naimark_dilation(&fixtures::trine(), DilationMode::QubitRegister).unwrap();
        let back = crate::io::matrix_from_json(&dil.to_json().unwrap()).unwrap();
        assert!(back.max_abs_diff(dil.unitary()) < 1e-15);
    }
}
