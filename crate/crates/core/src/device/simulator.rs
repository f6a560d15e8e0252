// Copyright 2026 The povmsim Developers
// SPDX-License-Identifier: Apache-2.0

//! Density-matrix execution with depolarizing gate noise and biased readout.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand_distr::Binomial;
use serde::{Deserialize, Serialize};

use super::circuit::{on_qubit, Circuit, Gate};
use crate::error::{Error, Result};
use crate::linalg::{pauli, ComplexMatrix};
use crate::rng;
use crate::simulation::{sample_chunked, ShotRecord};
use crate::state::QuantumState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Two-qubit depolarizing probability after each CNOT.
    pub cnot_depolarizing: f64,
    /// Single-qubit depolarizing probability after each one-qubit gate.
    pub su2_depolarizing: f64,
    /// Probability that a true `1` is read as `0`.
    pub readout_bias: f64,
}

impl NoiseModel {
    pub const PRESETS: [&'static str; 2] = ["ibmx4-like", "noiseless"];

    pub fn new(cnot_depolarizing: f64, su2_depolarizing: f64, readout_bias: f64) -> Result<Self> {
        for (name, p) in [("cnot", cnot_depolarizing), ("su2", su2_depolarizing), ("readout_bias", readout_bias)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!("noise parameter {name} = {p} outside [0, 1]")));
            }
        }
        Ok(NoiseModel { cnot_depolarizing, su2_depolarizing, readout_bias })
    }

    pub fn noiseless() -> Self {
        NoiseModel { cnot_depolarizing: 0.0, su2_depolarizing: 0.0, readout_bias: 0.0 }
    }

    /// Two-qubit-gate dominated noise with a small readout bias.
    pub fn ibmx4_like() -> Self {
        NoiseModel { cnot_depolarizing: 0.05, su2_depolarizing: 0.001, readout_bias: 0.02 }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "ibmx4-like" => Ok(NoiseModel::ibmx4_like()),
            "noiseless" => Ok(NoiseModel::noiseless()),
            _ => Err(Error::InvalidArgument(format!(
                "unknown noise preset `{name}`; available: {}",
                NoiseModel::PRESETS.join(", ")
            ))),
        }
    }
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel::ibmx4_like()
    }
}

/// `rho -> (1 - p) rho + p tr_S(rho) (x) 1/2^k` on the qubits `targets`,
/// realized as a Pauli twirl.
pub fn depolarize(rho: &ComplexMatrix, p: f64, targets: &[usize], qubits: usize) -> ComplexMatrix {
    if p == 0.0 {
        return rho.clone();
    }
    let singles = [ComplexMatrix::identity(2), pauli::x(), pauli::y(), pauli::z()];
    let mut paulis = vec![ComplexMatrix::identity(1 << qubits)];
    for &q in targets {
        paulis = paulis.iter().flat_map(|acc| singles.iter().map(move |s| acc * &on_qubit(s, q, qubits))).collect();
    }
    let count = paulis.len() as f64;
    let twirled = paulis.iter().fold(ComplexMatrix::zeros(rho.dim()), |acc, pm| &acc + &(&(pm * rho) * pm));
    &rho.scale(1.0 - p) + &twirled.scale(p / count)
}

/// State after all gates and their noise.
pub fn evolve(circuit: &Circuit, state: &QuantumState, noise: &NoiseModel) -> Result<ComplexMatrix> {
    if state.dim() != circuit.dim() {
        return Err(Error::DimensionMismatch { expected: circuit.dim(), found: state.dim() });
    }
    let n = circuit.qubits();
    let mut rho = state.density_matrix();
    for g in circuit.gates() {
        let u = g.operator(n);
        rho = &(&u * &rho) * &u.adjoint();
        let p = match g {
            Gate::Cnot { .. } => noise.cnot_depolarizing,
            Gate::Su2 { .. } | Gate::H { .. } => noise.su2_depolarizing,
        };
        rho = depolarize(&rho, p, &g.qubits(), n);
    }
    Ok(rho)
}

/// Readout distribution over the measured qubits. The first measured qubit is
/// the most significant bit of an outcome.
pub fn outcome_distribution(circuit: &Circuit, state: &QuantumState, noise: &NoiseModel) -> Result<Vec<f64>> {
    let rho = evolve(circuit, state, noise)?;
    let n = circuit.qubits();
    let m = circuit.measured().len();
    let mut probs = vec![0.0; 1 << m];
    for (basis, p) in rho.real_diagonal().into_iter().enumerate() {
        let mut out = 0;
        for &q in circuit.measured() {
            out = out << 1 | (basis >> (n - 1 - q) & 1);
        }
        probs[out] += p.max(0.0);
    }
    let b = noise.readout_bias;
    if b > 0.0 {
        for bit in 0..m {
            let mask = 1 << bit;
            let mut next = probs.clone();
            for (x, &p) in probs.iter().enumerate() {
                if x & mask != 0 {
                    next[x] -= b * p;
                    next[x & !mask] += b * p;
                }
            }
            probs = next;
        }
    }
    let total: f64 = probs.iter().sum();
    Ok(probs.iter().map(|p| (p / total).max(0.0)).collect())
}

/// Per-shot outcomes sampled from [`outcome_distribution`].
pub fn run_shots(
    circuit: &Circuit,
    state: &QuantumState,
    noise: &NoiseModel,
    shots: u64,
    seed: u64,
) -> Result<ShotRecord> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    let probs = outcome_distribution(circuit, state, noise)?;
    let picker = WeightedIndex::new(&probs).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let outcomes = sample_chunked(shots, seed, |r| picker.sample(r) as u32);
    Ok(ShotRecord { seed, outcome_count: probs.len(), fail_outcome: None, outcomes })
}

/// Multinomial counts from [`outcome_distribution`], drawn as a chain of
/// conditional binomials.
pub fn run_counts(
    circuit: &Circuit,
    state: &QuantumState,
    noise: &NoiseModel,
    shots: u64,
    seed: u64,
) -> Result<Vec<u64>> {
    let probs = outcome_distribution(circuit, state, noise)?;
    multinomial(&probs, shots, seed)
}

pub fn multinomial(probs: &[f64], shots: u64, seed: u64) -> Result<Vec<u64>> {
    let mut r = rng::from_seed(seed);
    let mut left = shots;
    let mut mass = 1.0;
    let mut counts = Vec::with_capacity(probs.len());
    for (k, &p) in probs.iter().enumerate() {
        if k + 1 == probs.len() {
            counts.push(left);
            break;
        }
        let c = if left == 0 || mass <= 0.0 {
            0
        } else {
            let q = (p / mass).clamp(0.0, 1.0);
            Binomial::new(left, q).map_err(|e| Error::InvalidArgument(e.to_string()))?.sample(&mut r)
        };
        counts.push(c);
        left -= c;
        mass -= p;
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::circuit::hadamard;

    fn one_qubit(gates: Vec<Gate>) -> Circuit {
        Circuit::new(1, gates, vec![0]).unwrap()
    }

    #[test]
    fn depolarizing_channel() {
        let rho = QuantumState::basis(4, 1).density_matrix();
        for p in [0.0, 0.3, 1.0] {
            let out = depolarize(&rho, p, &[0, 1], 2);
            assert!((out.trace().re - 1.0).abs() < 1e-12);
            let want = &rho.scale(1.0 - p) + &ComplexMatrix::identity(4).scale(p / 4.0);
            assert!(out.max_abs_diff(&want) < 1e-12);
        }
        // single qubit of two: |01> -> (1-p)|01><01| + p 1/2 (x) |1><1|
        let out = depolarize(&rho, 1.0, &[0], 2);
        assert!(out.max_abs_diff(&ComplexMatrix::from_real_diagonal(&[0.0, 0.5, 0.0, 0.5])) < 1e-12);
    }

    #[test]
    fn full_bias_reads_zero() {
        let c = one_qubit(vec![Gate::x(0)]);
        let noise = NoiseModel::new(0.0, 0.0, 1.0).unwrap();
        let rec = run_shots(&c, &QuantumState::basis(2, 0), &noise, 1000, 1).unwrap();
        assert!(rec.outcomes.iter().all(|&o| o == 0));
    }

    #[test]
    fn full_cnot_noise_gives_uniform_outcomes() {
        let c = Circuit::new(2, vec![Gate::H { qubit: 0 }, Gate::cnot(0, 1)], vec![0, 1]).unwrap();
        let noise = NoiseModel::new(1.0, 0.0, 0.0).unwrap();
        let shots = 100_000;
        let rec = run_shots(&c, &QuantumState::basis(4, 0), &noise, shots, 3).unwrap();
        let sigma = (0.25 * 0.75 / shots as f64).sqrt();
        for c in rec.counts() {
            assert!((c as f64 / shots as f64 - 0.25).abs() < 5.0 * sigma);
        }
    }

    #[test]
    fn noiseless_hadamard() {
        let c = one_qubit(vec![Gate::H { qubit: 0 }]);
        let p = outcome_distribution(&c, &QuantumState::basis(2, 0), &NoiseModel::noiseless()).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-12);
        let c = one_qubit(vec![Gate::su2(0, hadamard())]);
        let plus = QuantumState::pure_normalized(&[1.0.into(), 1.0.into()]).unwrap();
        let p = outcome_distribution(&c, &plus, &NoiseModel::noiseless()).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bias_shifts_mass_to_zero() {
        let c = Circuit::new(2, vec![Gate::x(0), Gate::x(1)], vec![0, 1]).unwrap();
        let noise = NoiseModel::new(0.0, 0.0, 0.1).unwrap();
        let p = outcome_distribution(&c, &QuantumState::basis(4, 0), &noise).unwrap();
        let want = [0.01, 0.09, 0.09, 0.81];
        for (a, b) in p.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let c = one_qubit(vec![Gate::H { qubit: 0 }]);
        let s = QuantumState::basis(2, 0);
        let noise = NoiseModel::ibmx4_like();
        assert_eq!(run_shots(&c, &s, &noise, 5000, 9).unwrap(), run_shots(&c, &s, &noise, 5000, 9).unwrap());
        assert_eq!(run_counts(&c, &s, &noise, 5000, 9).unwrap(), run_counts(&c, &s, &noise, 5000, 9).unwrap());
        assert_eq!(run_counts(&c, &s, &noise, 5000, 9).unwrap().iter().sum::<u64>(), 5000);
    }

    #[test]
    fn presets() {
        assert_eq!(NoiseModel::preset("noiseless").unwrap(), NoiseModel::noiseless());
        assert!(NoiseModel::preset("x").is_err());
        assert!(NoiseModel::new(1.5, 0.0, 0.0).is_err());
    }
}
