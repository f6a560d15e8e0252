// Copyright 2026 The povmsim Developers
// SPDX-License-Identifier: Apache-2.0

//! End-to-end comparison of the postselection scheme with the Naimark
//! dilation on a simulated noisy qubit device.
//!
//! Both pipelines run the four tomography probes with x-gate readout
//! mitigation, reconstruct the measurement by linear inversion and report its
//! operational distance to the target.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::circuit::{Circuit, Gate};
use super::decompose::{decompose_two_qubit, Connectivity};
use super::simulator::{multinomial, run_counts, NoiseModel};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::naimark::{naimark_dilation, DilationMode, NaimarkDilation};
use crate::povm::Povm;
use crate::rng::derive_seed;
use crate::simulation::{postselection_scheme, PostselectionScheme};
use crate::state::QuantumState;
use crate::tomography::{
    bias_mitigated_statistics, operational_distance, reconstruct_povm, MitigationMode, ProbeSet, Reconstruction,
    TomographyRecord,
};

/// Largest number of shots in one job on the reference device.
pub const SHOT_CAP: u64 = 8192;

/// `N_j = round(cap * alpha_j / max_j alpha_j)`. Frequencies built from these
/// blocks are normalized by `sum_j N_j`.
pub fn proportional_shot_allocation(weights: &[f64], cap: u64) -> Result<Vec<u64>> {
    if weights.is_empty() {
        return Err(Error::InvalidArgument("no weights to allocate".into()));
    }
    if cap == 0 {
        return Err(Error::InvalidArgument("shot cap must be at least 1".into()));
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
        return Err(Error::InvalidArgument(format!("weight {w} is not positive")));
    }
    let max = weights.iter().cloned().fold(0.0, f64::max);
    Ok(weights.iter().map(|w| (cap as f64 * w / max).round() as u64).collect())
}

/// `W` with `W |psi> = |0>`, followed by a readout of the qubit. Outcome `0`
/// is the `|psi><psi|` result.
pub fn compile_postselection_circuit(vector: &[C64]) -> Result<Circuit> {
    let [a, b] = vector else {
        return Err(Error::DimensionMismatch { expected: 2, found: vector.len() });
    };
    let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
    if (norm - 1.0).abs() > crate::tol::NORM {
        return Err(Error::invariant("state is a unit vector", (norm - 1.0).abs()));
    }
    let w = ComplexMatrix::from_row_major(2, &[a.conj(), b.conj(), -*b, *a])?;
    let gates = if w.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-15 { vec![] } else { vec![Gate::su2(0, w)] };
    Circuit::new(1, gates, vec![0])
}

/// Gate-level version of a two-qubit dilation unitary.
pub fn compile_naimark_circuit(dilation: &NaimarkDilation, connectivity: Connectivity) -> Result<Circuit> {
    if dilation.source().dim() != 2 || dilation.extended_dim() != 4 {
        return Err(Error::Precondition("Naimark circuits are compiled for qubit POVMs with 3 or 4 outcomes".into()));
    }
    Ok(decompose_two_qubit(dilation.unitary(), connectivity)?.circuit)
}

/// How the classical component choice is realized.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Randomization {
    /// Fixed shot blocks per component, sized by `proportional_shot_allocation`.
    #[default]
    Block,
    /// Every shot draws its component afresh.
    PerShot,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonConfig {
    pub noise: NoiseModel,
    /// Shots for the heaviest component of the postselection scheme.
    pub shot_cap: u64,
    pub seed: u64,
    pub randomization: Randomization,
    pub connectivity: Connectivity,
}

impl Default for ComparisonConfig {
    fn default() -> Self {
        ComparisonConfig {
            noise: NoiseModel::default(),
            shot_cap: SHOT_CAP,
            seed: 0,
            randomization: Randomization::Block,
            connectivity: Connectivity::OneWay,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SchemeRun {
    /// Mitigated probe statistics.
    pub record: TomographyRecord,
    pub reconstruction: Reconstruction,
    /// Operational distance to the target.
    pub distance: f64,
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub postselection: SchemeRun,
    pub naimark: SchemeRun,
    /// Accepted fraction of postselection runs, averaged over probes.
    pub postselection_fraction: f64,
    /// Click probability of the Naimark outcomes beyond the target's on the
    /// maximally mixed state.
    pub residual_mass: f64,
    pub naimark_cnots: usize,
}

const POSTSELECTION_STREAM: u64 = 0;
const NAIMARK_STREAM: u64 = 1;

/// Mitigated statistics of the postselection scheme on the probes, with the
/// failure outcome last.
pub fn postselection_tomography(povm: &Povm, config: &ComparisonConfig) -> Result<TomographyRecord> {
    require_qubit(povm)?;
    let scheme = postselection_scheme(povm)?;
    let d = povm.dim() as f64;
    let alphas: Vec<f64> = scheme.components().iter().map(|c| c.weight * d).collect();
    let blocks = proportional_shot_allocation(&alphas, config.shot_cap)?;
    let circuits =
        scheme.components().iter().map(|c| compile_postselection_circuit(&c.vector)).collect::<Result<Vec<_>>>()?;
    let probes = ProbeSet::states();
    let tables: Vec<Vec<u64>> = (0..8)
        .into_par_iter()
        .map(|job| {
            let (probe, flip) = (job / 2, job % 2 == 1);
            postselection_counts(&scheme, &circuits, &blocks, &probes[probe], flip, config, job as u64)
        })
        .collect::<Result<_>>()?;
    let fail = Some(povm.outcomes());
    let variant = |flip: usize| {
        let counts = std::array::from_fn(|p| tables[2 * p + flip].clone());
        TomographyRecord::from_counts(counts, fail)
    };
    let identity: Vec<usize> = (0..=povm.outcomes()).collect();
    bias_mitigated_statistics(
        MitigationMode::Postselection,
        &[(variant(0)?, identity.clone()), (variant(1)?, identity)],
    )
}

fn postselection_counts(
    scheme: &PostselectionScheme,
    circuits: &[Circuit],
    blocks: &[u64],
    probe: &QuantumState,
    flip: bool,
    config: &ComparisonConfig,
    job: u64,
) -> Result<Vec<u64>> {
    let n = scheme.target().outcomes();
    let total: u64 = blocks.iter().sum();
    let per_component = match config.randomization {
        Randomization::Block => blocks.to_vec(),
        Randomization::PerShot => {
            let weights: Vec<f64> = scheme.components().iter().map(|c| c.weight).collect();
            multinomial(&weights, total, derive_seed(config.seed, &[POSTSELECTION_STREAM, job, u64::MAX]))?
        }
    };
    let mut counts = vec![0u64; n + 1];
    for (k, (c, circuit)) in scheme.components().iter().zip(circuits).enumerate() {
        let shots = per_component[k];
        if shots == 0 {
            continue;
        }
        let circuit = if flip { circuit.then([Gate::x(0)])? } else { circuit.clone() };
        let seed = derive_seed(config.seed, &[POSTSELECTION_STREAM, job, k as u64]);
        let raw = run_counts(&circuit, probe, &config.noise, shots, seed)?;
        // the flipped variant reports the |psi> result as 1
        let (plus, minus) = if flip { (raw[1], raw[0]) } else { (raw[0], raw[1]) };
        counts[c.plus_outcome] += plus;
        counts[n] += minus;
    }
    Ok(counts)
}

/// Mitigated four-outcome statistics of the compiled Naimark circuit.
pub fn naimark_tomography(povm: &Povm, config: &ComparisonConfig) -> Result<(TomographyRecord, Circuit)> {
    require_qubit(povm)?;
    let padded = pad_to_four(povm)?;
    let dilation = naimark_dilation(&padded, DilationMode::QubitRegister)?;
    let circuit = compile_naimark_circuit(&dilation, config.connectivity)?;
    let scheme = postselection_scheme(povm)?;
    let alphas: Vec<f64> = scheme.components().iter().map(|c| c.weight * 2.0).collect();
    let blocks = proportional_shot_allocation(&alphas, config.shot_cap)?;
    // same total budget as the two postselection variants
    let shots = ((2 * blocks.iter().sum::<u64>()) as f64 / 4.0).round().max(1.0) as u64;
    let probes = ProbeSet::states();
    let tables: Vec<Vec<u64>> = (0..16)
        .into_par_iter()
        .map(|job| {
            let (probe, mask) = (job / 4, job % 4);
            let mut flips = Vec::new();
            if mask & 2 != 0 {
                flips.push(Gate::x(0));
            }
            if mask & 1 != 0 {
                flips.push(Gate::x(1));
            }
            let c = circuit.then(flips)?;
            let input = dilation.embed(&probes[probe])?;
            let seed = derive_seed(config.seed, &[NAIMARK_STREAM, job as u64]);
            run_counts(&c, &input, &config.noise, shots, seed)
        })
        .collect::<Result<_>>()?;
    let variants = (0..4)
        .map(|mask| {
            let counts = std::array::from_fn(|p| tables[4 * p + mask].clone());
            let relabel: Vec<usize> = (0..4).map(|raw| raw ^ mask).collect();
            Ok((TomographyRecord::from_counts(counts, None)?, relabel))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((bias_mitigated_statistics(MitigationMode::Naimark, &variants)?, circuit))
}

fn require_qubit(povm: &Povm) -> Result<()> {
    if povm.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: povm.dim() });
    }
    if povm.outcomes() > 4 {
        return Err(Error::Precondition("a two-qubit register dilates at most 4 outcomes".into()));
    }
    Ok(())
}

/// Appends zero effects so the dilation fills a two-qubit register.
fn pad_to_four(povm: &Povm) -> Result<Povm> {
    if povm.outcomes() >= 3 {
        return Ok(povm.clone());
    }
    let mut effects = povm.effects().to_vec();
    let mut labels = povm.labels().to_vec();
    while effects.len() < 4 {
        effects.push(ComplexMatrix::zeros(2));
        labels.push(format!("pad{}", effects.len()));
    }
    Povm::with_labels(effects, labels)
}

/// Runs both pipelines and compares each reconstruction with `povm`.
pub fn compare_schemes(povm: &Povm, config: &ComparisonConfig) -> Result<Comparison> {
    let ps_record = postselection_tomography(povm, config)?;
    let ps_rec = reconstruct_povm(&ps_record)?;
    let ps_distance = operational_distance(povm.effects(), &ps_rec.effects)?;

    let (nm_record, circuit) = naimark_tomography(povm, config)?;
    let nm_rec = reconstruct_povm(&nm_record)?;
    let nm_distance = operational_distance(povm.effects(), &nm_rec.effects)?;
    let residual_mass = nm_rec.effects[povm.outcomes()..].iter().fold(0.0, |acc, e| acc + e.trace().re / 2.0);

    Ok(Comparison {
        postselection_fraction: ps_record.success_fraction(),
        postselection: SchemeRun { record: ps_record, reconstruction: ps_rec, distance: ps_distance },
        naimark: SchemeRun { record: nm_record, reconstruction: nm_rec, distance: nm_distance },
        residual_mass,
        naimark_cnots: circuit.cnot_count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::simulator::outcome_distribution;
    use crate::fixtures;
    use crate::naimark::dilated_statistics;
    use crate::state::probe_states;

    fn noiseless(shot_cap: u64, seed: u64) -> ComparisonConfig {
        ComparisonConfig { noise: NoiseModel::noiseless(), shot_cap, seed, ..Default::default() }
    }

    #[test]
    fn allocation_examples() {
        assert_eq!(proportional_shot_allocation(&[0.5; 4], 8192).unwrap(), vec![8192; 4]);
        assert_eq!(proportional_shot_allocation(&[1.0, 0.5], 8192).unwrap(), vec![8192, 4096]);
        assert_eq!(proportional_shot_allocation(&[0.7, 0.2, 0.3, 0.8], 8192).unwrap(), vec![7168, 2048, 3072, 8192]);
        assert!(proportional_shot_allocation(&[], 10).is_err());
        assert!(proportional_shot_allocation(&[1.0, 0.0], 10).is_err());
    }

    #[test]
    fn postselection_circuits() {
        let zero = compile_postselection_circuit(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]).unwrap();
        assert!(zero.gates().is_empty());
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = [C64::new(h, 0.0), C64::new(h, 0.0)];
        let c = compile_postselection_circuit(&plus).unwrap();
        let p = outcome_distribution(&c, &QuantumState::Pure(plus.to_vec()), &NoiseModel::noiseless()).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-12);

        let scheme = postselection_scheme(&fixtures::tetrahedral()).unwrap();
        let comp = &scheme.components()[1];
        let c = compile_postselection_circuit(&comp.vector).unwrap();
        for s in probe_states(2) {
            let p = outcome_distribution(&c, &s, &NoiseModel::noiseless()).unwrap();
            let want = s.expectation(&ComplexMatrix::outer(&comp.vector));
            assert!((p[0] - want).abs() < 1e-12);
        }
        assert!(compile_postselection_circuit(&[C64::new(1.0, 0.0)]).is_err());
    }

    #[test]
    fn naimark_circuits_reproduce_dilation() {
        for (_, m) in fixtures::all_povms() {
            let dil = naimark_dilation(&m, DilationMode::QubitRegister).unwrap();
            for conn in [Connectivity::Full, Connectivity::OneWay] {
                let c = compile_naimark_circuit(&dil, conn).unwrap();
                assert!(c.cnot_count() <= 3);
                for s in probe_states(2) {
                    let got = outcome_distribution(&c, &dil.embed(&s).unwrap(), &NoiseModel::noiseless()).unwrap();
                    let want = dilated_statistics(&dil, &s).unwrap();
                    for (a, b) in got.iter().zip(&want) {
                        assert!((a - b).abs() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn noiseless_pipelines_are_accurate() {
        let cmp = compare_schemes(&fixtures::tetrahedral(), &noiseless(1 << 16, 5)).unwrap();
        assert!(cmp.postselection.distance < 0.01, "{}", cmp.postselection.distance);
        assert!(cmp.naimark.distance < 0.01, "{}", cmp.naimark.distance);
        let shots = 8.0 * 4.0 * (1 << 16) as f64;
        assert!((cmp.postselection_fraction - 0.5).abs() < 5.0 * (0.25 / shots).sqrt());
    }

    #[test]
    fn noiseless_distance_shrinks_with_shots() {
        let m = fixtures::trine();
        let avg = |cap: u64| {
            (0..4).map(|s| compare_schemes(&m, &noiseless(cap, s)).unwrap().postselection.distance).sum::<f64>() / 4.0
        };
        let (small, large) = (avg(1 << 10), avg(1 << 14));
        let ratio = small / large;
        // four times the square root of sixteen
        assert!(ratio > 4.0 / 3.0 && ratio < 4.0 * 3.0, "{small} {large}");
    }

    #[test]
    fn noisy_ordering_and_residual_effect() {
        let config = ComparisonConfig { seed: 11, ..Default::default() };
        let cmp = compare_schemes(&fixtures::trine(), &config).unwrap();
        assert!(cmp.postselection.distance < cmp.naimark.distance);
        assert_eq!(cmp.postselection.reconstruction.effects.len(), 3);
        assert_eq!(cmp.naimark.reconstruction.effects.len(), 4);
        assert!(cmp.residual_mass > 0.0);
    }

    #[test]
    fn comparison_is_deterministic() {
        let config = ComparisonConfig { shot_cap: 2000, seed: 3, ..Default::default() };
        let a = compare_schemes(&fixtures::random4(), &config).unwrap();
        let b = compare_schemes(&fixtures::random4(), &config).unwrap();
        assert_eq!(a.postselection.distance, b.postselection.distance);
        assert_eq!(a.naimark.record, b.naimark.record);
    }

    #[test]
    fn block_and_per_shot_randomization_agree() {
        let m = fixtures::random4();
        let base =
            ComparisonConfig { noise: NoiseModel::ibmx4_like(), shot_cap: 1 << 15, seed: 21, ..Default::default() };
        let block = postselection_tomography(&m, &base).unwrap();
        let per_shot =
            postselection_tomography(&m, &ComparisonConfig { randomization: Randomization::PerShot, ..base }).unwrap();
        for p in 0..4 {
            let shots = block.shots()[p] as f64;
            for (a, b) in block.freqs()[p].iter().zip(&per_shot.freqs()[p]) {
                let sigma = (a.max(1e-3) * (1.0 - a).max(1e-3) / shots).sqrt();
                assert!((a - b).abs() < 5.0 * sigma * 2f64.sqrt(), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn mitigation_symmetrizes_readout_bias() {
        // averaging the plain and flipped runs turns a one-sided bias b into a
        // symmetric flip with probability b/2, which leaves the accepted
        // fraction at one half
        let m = fixtures::trine();
        let b = 0.1;
        let config = ComparisonConfig {
            noise: NoiseModel::new(0.0, 0.0, b).unwrap(),
            shot_cap: 1 << 16,
            seed: 8,
            ..Default::default()
        };
        let rec = postselection_tomography(&m, &config).unwrap();
        let probes = ProbeSet::states();
        for (p, probe) in probes.iter().enumerate() {
            let shots = rec.shots()[p] as f64;
            let sigma = (0.25 / shots).sqrt();
            for (i, e) in m.effects().iter().enumerate() {
                let want = (1.0 - b) * probe.expectation(e) / 2.0 + b * e.trace().re / 4.0;
                assert!((rec.freqs()[p][i] - want).abs() < 5.0 * sigma);
            }
            assert!((rec.freqs()[p][3] - 0.5).abs() < 5.0 * sigma);
        }
        assert!((rec.success_fraction() - 0.5).abs() < 0.01);
    }

    #[test]
    fn computational_basis_is_padded() {
        let cmp = compare_schemes(&Povm::computational_basis(2), &noiseless(4096, 1)).unwrap();
        assert_eq!(cmp.naimark.reconstruction.effects.len(), 4);
        assert!(cmp.naimark.distance < 0.05);
    }

    #[test]
    fn rejects_large_povms() {
        let m = crate::povm::random_rank_one_povm(2, 5, 0).unwrap();
        assert!(compare_schemes(&m, &noiseless(100, 0)).is_err());
        assert!(compare_schemes(&Povm::trivial(3), &noiseless(100, 0)).is_err());
    }
}
