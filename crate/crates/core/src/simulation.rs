// Copyright 2026 The povmsim Developers
// SPDX-License-Identifier: Apache-2.0

//! Simulating arbitrary POVMs with projective measurements, classical
//! randomness and postselection.
//!
//! Any POVM `M` on `C^d` is first split into rank-one pieces
//! `a_k |psi_k><psi_k|` (with `sum_k a_k = d`). A run of the protocol draws
//! `k` with probability `a_k / d`, measures the binary projective measurement
//! `(|psi_k><psi_k|, 1 - |psi_k><psi_k|)`, and reports the parent outcome of
//! `k` on `+` or a failure on `-`. The resulting `n + 1` outcome measurement is
//! exactly `M_q = (q M_1, ..., q M_n, (1 - q) 1)` with `q = 1/d`, so
//! conditioning on success reproduces the statistics of `M` for every input
//! state.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::PovmDoc;
use crate::linalg::{self, hermitian_function, ComplexMatrix, C64};
use crate::povm::{born_probabilities, Povm, ProjectiveMeasurement};
use crate::rng;
use crate::state::QuantumState;
use crate::tol;

/// Column-stochastic matrix of conditional probabilities `q(j|k)`, stored as
/// `rows[j][k]` (output `j`, input `k`).
#[derive(Debug, Clone, PartialEq)]
pub struct PostProcessingMap {
    rows: Vec<Vec<f64>>,
}

impl PostProcessingMap {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let inputs = rows.first().map(Vec::len).unwrap_or(0);
        if rows.is_empty() || inputs == 0 {
            return Err(Error::InvalidArgument("post-processing map must be non-empty".into()));
        }
        if rows.iter().any(|r| r.len() != inputs) {
            return Err(Error::Format("post-processing rows differ in length".into()));
        }
        for r in &rows {
            for &x in r {
                if !x.is_finite() || x < -tol::COMPLETENESS {
                    return Err(Error::invariant("conditional probabilities are non-negative", -x));
                }
            }
        }
        for k in 0..inputs {
            let s: f64 = rows.iter().map(|r| r[k]).sum();
            if (s - 1.0).abs() > tol::COMPLETENESS {
                return Err(Error::invariant("columns sum to one", (s - 1.0).abs()));
            }
        }
        Ok(PostProcessingMap { rows })
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n).map(|j| (0..n).map(|k| if j == k { 1.0 } else { 0.0 }).collect()).collect();
        PostProcessingMap { rows }
    }

    /// Deterministic relabelling: input `k` goes to output `targets[k]`.
    pub fn relabel(targets: &[usize], outputs: usize) -> Result<Self> {
        if let Some(&bad) = targets.iter().find(|&&t| t >= outputs) {
            return Err(Error::InvalidArgument(format!("output {bad} out of range {outputs}")));
        }
        let mut rows = vec![vec![0.0; targets.len()]; outputs];
        for (k, &t) in targets.iter().enumerate() {
            rows[t][k] = 1.0;
        }
        PostProcessingMap::new(rows)
    }

    /// Sends every input to the single output.
    pub fn glue_all(n: usize) -> Self {
        PostProcessingMap { rows: vec![vec![1.0; n]] }
    }

    /// Merges input `b` into input `a` among `n` outcomes. Remaining outcomes
    /// keep their relative order.
    pub fn glue_pair(n: usize, a: usize, b: usize) -> Result<Self> {
        if a >= n || b >= n || a == b {
            return Err(Error::InvalidArgument(format!("cannot glue outcomes {a} and {b} of {n}")));
        }
        let mut targets = Vec::with_capacity(n);
        let mut next = 0;
        let mut slot_of_a = None;
        for k in 0..n {
            if k == b {
                targets.push(usize::MAX);
                continue;
            }
            if k == a {
                slot_of_a = Some(next);
            }
            targets.push(next);
            next += 1;
        }
        targets[b] = slot_of_a.unwrap();
        PostProcessingMap::relabel(&targets, n - 1)
    }

    pub fn inputs(&self) -> usize {
        self.rows[0].len()
    }

    pub fn outputs(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, output: usize, input: usize) -> f64 {
        self.rows[output][input]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }
}

/// `N_j = sum_k q(j|k) M_k`.
pub fn apply_postprocessing(povm: &Povm, map: &PostProcessingMap) -> Result<Povm> {
    if map.inputs() != povm.outcomes() {
        return Err(Error::DimensionMismatch { expected: povm.outcomes(), found: map.inputs() });
    }
    let d = povm.dim();
    let effects = map
        .rows
        .iter()
        .map(|row| {
            let mut acc = ComplexMatrix::zeros(d);
            for (w, m) in row.iter().zip(povm.effects()) {
                if *w != 0.0 {
                    acc = &acc + &m.scale(*w);
                }
            }
            acc
        })
        .collect();
    Povm::new(effects)
}

/// Effectwise weighted sum `sum_a p_a M^a`.
pub fn convex_combination(terms: &[(f64, Povm)]) -> Result<Povm> {
    let Some((_, first)) = terms.first() else {
        return Err(Error::InvalidArgument("empty convex combination".into()));
    };
    let (d, n) = (first.dim(), first.outcomes());
    let mut total = 0.0;
    for (w, p) in terms {
        if !w.is_finite() || *w < 0.0 {
            return Err(Error::InvalidArgument(format!("weight {w} is not a probability")));
        }
        if p.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: p.dim() });
        }
        if p.outcomes() != n {
            return Err(Error::DimensionMismatch { expected: n, found: p.outcomes() });
        }
        total += w;
    }
    if (total - 1.0).abs() > tol::COMPLETENESS {
        return Err(Error::invariant("weights sum to one", (total - 1.0).abs()));
    }
    let effects = (0..n)
        .map(|i| {
            let mut acc = ComplexMatrix::zeros(d);
            for (w, p) in terms {
                acc = &acc + &p.effect(i).scale(*w);
            }
            acc
        })
        .collect();
    Povm::with_labels(effects, first.labels().to_vec())
}

/// `M_q = (q M_1, ..., q M_n, (1 - q) 1)`.
pub fn build_mq(povm: &Povm, q: f64) -> Result<Povm> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::InvalidArgument(format!("success probability {q} outside (0, 1]")));
    }
    let mut effects: Vec<ComplexMatrix> = povm.effects().iter().map(|m| m.scale(q)).collect();
    effects.push(ComplexMatrix::identity(povm.dim()).scale(1.0 - q));
    let mut labels = povm.labels().to_vec();
    labels.push(FAIL_LABEL.to_string());
    Povm::with_labels(effects, labels)
}

pub const FAIL_LABEL: &str = "fail";

/// Rank-one pieces of a POVM and the merge map back to it.
#[derive(Debug, Clone)]
pub struct RankOneRefinement {
    pub povm: Povm,
    pub map: PostProcessingMap,
    /// Parent outcome of every refined effect.
    pub parents: Vec<usize>,
    /// `a_k` in `a_k |v_k><v_k|`.
    pub weights: Vec<f64>,
    pub vectors: Vec<Vec<C64>>,
}

/// Splits every effect into rank-one pieces by eigendecomposition.
///
/// Pieces are ordered by parent outcome, then by descending eigenvalue.
/// Eigenvalues below the positivity tolerance are dropped; the resulting tiny
/// completeness defect is removed by conjugating all pieces with `S^{-1/2}`,
/// where `S` is their sum.
pub fn rank_one_refinement(povm: &Povm) -> Result<RankOneRefinement> {
    let d = povm.dim();
    let psd = tol::scaled(tol::PSD, d);
    let mut parents = Vec::new();
    let mut scaled_vectors: Vec<Vec<C64>> = Vec::new();
    for (i, m) in povm.effects().iter().enumerate() {
        let eig = m.hermitian_eigen()?;
        for (val, vec) in eig.values.iter().zip(&eig.vectors).rev() {
            if *val > psd {
                parents.push(i);
                scaled_vectors.push(vec.iter().map(|z| z * val.sqrt()).collect());
            }
        }
    }
    let pieces: Vec<ComplexMatrix> = scaled_vectors.iter().map(|v| ComplexMatrix::outer(v)).collect();
    let total = linalg::sum(d, &pieces);
    let defect = total.max_abs_diff(&ComplexMatrix::identity(d));
    if defect > tol::scaled(tol::COMPLETENESS, d) {
        return Err(Error::invariant("refined effects sum to identity", defect));
    }
    let correction = hermitian_function(&total, |x| 1.0 / x.sqrt())?;
    let mut weights = Vec::with_capacity(parents.len());
    let mut vectors = Vec::with_capacity(parents.len());
    let mut effects = Vec::with_capacity(parents.len());
    for v in &scaled_vectors {
        let w = correction.apply(v);
        let a = linalg::norm(&w).powi(2);
        let unit = linalg::fix_phase(linalg::normalized(&w));
        effects.push(ComplexMatrix::outer(&unit).scale(a));
        weights.push(a);
        vectors.push(unit);
    }
    let labels = parents.iter().enumerate().map(|(k, &p)| format!("{}.{}", povm.labels()[p], k + 1)).collect();
    let refined = Povm::with_labels(effects, labels)?;
    let map = PostProcessingMap::relabel(&parents, povm.outcomes())?;
    Ok(RankOneRefinement { povm: refined, map, parents, weights, vectors })
}

/// Randomization over projective measurements followed by post-processing.
#[derive(Debug, Clone)]
pub struct ProjectiveSimulation {
    components: Vec<(f64, ProjectiveMeasurement)>,
    postprocessing: PostProcessingMap,
}

impl ProjectiveSimulation {
    pub fn new(components: Vec<(f64, ProjectiveMeasurement)>, postprocessing: PostProcessingMap) -> Result<Self> {
        let total: f64 = components.iter().map(|(w, _)| w).sum();
        if components.iter().any(|(w, _)| *w < 0.0) {
            return Err(Error::InvalidArgument("negative component weight".into()));
        }
        if (total - 1.0).abs() > tol::COMPLETENESS {
            return Err(Error::invariant("weights sum to one", (total - 1.0).abs()));
        }
        if let Some((_, pm)) = components.iter().find(|(_, pm)| pm.povm().outcomes() != postprocessing.inputs()) {
            return Err(Error::DimensionMismatch { expected: postprocessing.inputs(), found: pm.povm().outcomes() });
        }
        Ok(ProjectiveSimulation { components, postprocessing })
    }

    pub fn components(&self) -> &[(f64, ProjectiveMeasurement)] {
        &self.components
    }

    pub fn postprocessing(&self) -> &PostProcessingMap {
        &self.postprocessing
    }

    /// The mixture `sum_a p_a P^a` before post-processing.
    pub fn mixture(&self) -> Result<Povm> {
        let terms: Vec<(f64, Povm)> = self.components.iter().map(|(w, pm)| (*w, pm.povm().clone())).collect();
        convex_combination(&terms)
    }

    /// The measurement realized by the whole simulation.
    pub fn simulated_povm(&self) -> Result<Povm> {
        apply_postprocessing(&self.mixture()?, &self.postprocessing)
    }
}

/// One branch of the protocol: measure `(|v><v|, 1 - |v><v|)` with
/// probability `weight`, report `plus_outcome` on `+` and fail on `-`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeComponent {
    pub weight: f64,
    pub vector: Vec<C64>,
    pub plus_outcome: usize,
}

/// A postselection simulation of `target` with success probability `1/d`.
#[derive(Debug, Clone)]
pub struct PostselectionScheme {
    target: Povm,
    components: Vec<SchemeComponent>,
    simulation: ProjectiveSimulation,
    success_probability: f64,
}

impl PostselectionScheme {
    fn from_components(target: Povm, components: Vec<SchemeComponent>) -> Result<Self> {
        let d = target.dim();
        let n = target.outcomes();
        let refined = components.len();
        let mut pms = Vec::with_capacity(refined);
        let mut parents = Vec::with_capacity(refined + 1);
        for (k, c) in components.iter().enumerate() {
            if c.vector.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: c.vector.len() });
            }
            if c.plus_outcome >= n {
                return Err(Error::InvalidArgument(format!("outcome {} out of range", c.plus_outcome)));
            }
            let proj = ComplexMatrix::outer(&c.vector);
            let mut effects = vec![ComplexMatrix::zeros(d); refined + 1];
            effects[refined] = &ComplexMatrix::identity(d) - &proj;
            effects[k] = proj;
            pms.push((c.weight, ProjectiveMeasurement::new(Povm::new(effects)?)?));
            parents.push(c.plus_outcome);
        }
        parents.push(n);
        let map = PostProcessingMap::relabel(&parents, n + 1)?;
        let simulation = ProjectiveSimulation::new(pms, map)?;
        let q = 1.0 / d as f64;
        let scheme = PostselectionScheme { target, components, simulation, success_probability: q };
        let expected = build_mq(&scheme.target, q)?;
        let got = scheme.simulation.simulated_povm()?;
        let dev = max_effect_deviation(&expected, &got);
        if dev > tol::scaled(tol::COMPLETENESS, d) {
            return Err(Error::invariant("scheme realizes M_q", dev));
        }
        Ok(scheme)
    }

    pub fn target(&self) -> &Povm {
        &self.target
    }

    pub fn components(&self) -> &[SchemeComponent] {
        &self.components
    }

    pub fn simulation(&self) -> &ProjectiveSimulation {
        &self.simulation
    }

    pub fn success_probability(&self) -> f64 {
        self.success_probability
    }

    /// Index of the failure outcome (`n`, zero-based).
    pub fn failure_outcome(&self) -> usize {
        self.target.outcomes()
    }

    /// `(outcome on +, outcome on -)` per component.
    pub fn relabeling(&self) -> Vec<(usize, usize)> {
        self.components.iter().map(|c| (c.plus_outcome, self.failure_outcome())).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = SchemeDoc {
            schema_version: SCHEME_SCHEMA_VERSION,
            dim: self.target.dim(),
            success_probability: self.success_probability,
            failure_label: FAIL_LABEL.to_string(),
            target: PovmDoc::from_povm(&self.target),
            components: self
                .components
                .iter()
                .map(|c| ComponentDoc {
                    weight: c.weight,
                    vector: c.vector.iter().map(|z| [z.re, z.im]).collect(),
                    plus_outcome: c.plus_outcome,
                    plus_label: self.target.labels()[c.plus_outcome].clone(),
                    minus_label: FAIL_LABEL.to_string(),
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    /// Rebuilds a scheme from its JSON audit record, re-checking that it
    /// realizes `M_{1/d}` of its target.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SchemeDoc = serde_json::from_str(text)?;
        let target = doc.target.to_povm()?;
        let components = doc
            .components
            .into_iter()
            .map(|c| SchemeComponent {
                weight: c.weight,
                vector: c.vector.into_iter().map(|[re, im]| C64::new(re, im)).collect(),
                plus_outcome: c.plus_outcome,
            })
            .collect();
        PostselectionScheme::from_components(target, components)
    }
}

pub const SCHEME_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct SchemeDoc {
    schema_version: u32,
    dim: usize,
    success_probability: f64,
    failure_label: String,
    target: PovmDoc,
    components: Vec<ComponentDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ComponentDoc {
    weight: f64,
    vector: Vec<[f64; 2]>,
    plus_outcome: usize,
    plus_label: String,
    minus_label: String,
}

fn max_effect_deviation(a: &Povm, b: &Povm) -> f64 {
    if a.outcomes() != b.outcomes() {
        return f64::INFINITY;
    }
    a.effects().iter().zip(b.effects()).map(|(x, y)| x.max_abs_diff(y)).fold(0.0, f64::max)
}

/// The protocol for `povm`: weights `a_k / d` over the rank-one refinement.
pub fn postselection_scheme(povm: &Povm) -> Result<PostselectionScheme> {
    let refinement = rank_one_refinement(povm)?;
    let d = povm.dim() as f64;
    let components = refinement
        .weights
        .iter()
        .zip(&refinement.vectors)
        .zip(&refinement.parents)
        .map(|((a, v), &p)| SchemeComponent { weight: a / d, vector: v.clone(), plus_outcome: p })
        .collect();
    PostselectionScheme::from_components(povm.clone(), components)
}

/// Outcome stream of a sampler. Labels are zero-based outcome indices; the
/// failure outcome, when present, is `fail_outcome`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShotRecord {
    pub seed: u64,
    /// Number of distinct outcomes, including the failure outcome if any.
    pub outcome_count: usize,
    pub fail_outcome: Option<u32>,
    pub outcomes: Vec<u32>,
}

impl ShotRecord {
    pub fn shots(&self) -> u64 {
        self.outcomes.len() as u64
    }

    pub fn counts(&self) -> Vec<u64> {
        let mut c = vec![0u64; self.outcome_count];
        for &o in &self.outcomes {
            c[o as usize] += 1;
        }
        c
    }

    pub fn success_count(&self) -> u64 {
        match self.fail_outcome {
            Some(f) => self.outcomes.iter().filter(|&&o| o != f).count() as u64,
            None => self.shots(),
        }
    }

    pub fn success_rate(&self) -> f64 {
        self.success_count() as f64 / self.shots().max(1) as f64
    }

    /// Relative frequencies of the non-failure outcomes, conditioned on
    /// success.
    pub fn conditional_frequencies(&self) -> Vec<f64> {
        let counts = self.counts();
        let kept = self.success_count().max(1) as f64;
        counts
            .iter()
            .enumerate()
            .filter(|(k, _)| Some(*k as u32) != self.fail_outcome)
            .map(|(_, &c)| c as f64 / kept)
            .collect()
    }

    /// Concatenates two records of the same experiment.
    pub fn merge(mut self, other: ShotRecord) -> Result<ShotRecord> {
        if self.outcome_count != other.outcome_count || self.fail_outcome != other.fail_outcome {
            return Err(Error::InvalidArgument("cannot merge records of different experiments".into()));
        }
        self.outcomes.extend(other.outcomes);
        Ok(self)
    }
}

const CHUNK: u64 = 1 << 16;

/// Runs `shots` draws split in fixed-size chunks, chunk `c` using stream `c`
/// of `seed`.
pub(crate) fn sample_chunked<F>(shots: u64, seed: u64, draw: F) -> Vec<u32>
where
    F: Fn(&mut rng::Rng) -> u32 + Sync,
{
    let chunks = shots.div_ceil(CHUNK);
    let parts: Vec<Vec<u32>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut r = rng::substream(seed, c);
            let len = CHUNK.min(shots - c * CHUNK);
            (0..len).map(|_| draw(&mut r)).collect()
        })
        .collect();
    parts.concat()
}

/// Runs the protocol shot by shot: draw a component, measure its binary
/// projective measurement, relabel.
pub fn sample_postselection(
    scheme: &PostselectionScheme,
    state: &QuantumState,
    shots: u64,
    seed: u64,
) -> Result<ShotRecord> {
    check_sampling(scheme, state, shots)?;
    let plus: Vec<f64> =
        scheme.components.iter().map(|c| state.expectation(&ComplexMatrix::outer(&c.vector)).clamp(0.0, 1.0)).collect();
    let picker = WeightedIndex::new(scheme.components.iter().map(|c| c.weight))
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let fail = scheme.failure_outcome() as u32;
    let outcomes = sample_chunked(shots, seed, |r| {
        let k = picker.sample(r);
        if r.random::<f64>() < plus[k] {
            scheme.components[k].plus_outcome as u32
        } else {
            fail
        }
    });
    Ok(ShotRecord { seed, outcome_count: scheme.target.outcomes() + 1, fail_outcome: Some(fail), outcomes })
}

/// Samples the composite `M_{1/d}` distribution directly.
pub fn sample_postselection_direct(
    scheme: &PostselectionScheme,
    state: &QuantumState,
    shots: u64,
    seed: u64,
) -> Result<ShotRecord> {
    check_sampling(scheme, state, shots)?;
    let probs = born_probabilities(state, &build_mq(&scheme.target, scheme.success_probability)?)?;
    let picker = WeightedIndex::new(&probs).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let fail = scheme.failure_outcome() as u32;
    let outcomes = sample_chunked(shots, seed, |r| picker.sample(r) as u32);
    Ok(ShotRecord { seed, outcome_count: probs.len(), fail_outcome: Some(fail), outcomes })
}

fn check_sampling(scheme: &PostselectionScheme, state: &QuantumState, shots: u64) -> Result<()> {
    if state.dim() != scheme.target.dim() {
        return Err(Error::DimensionMismatch { expected: scheme.target.dim(), found: state.dim() });
    }
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    Ok(())
}

/// Orbit POVM of the Heisenberg-Weyl group through a fiducial state.
#[derive(Debug, Clone)]
pub struct HwCovariantPovm {
    pub povm: Povm,
    /// Whether all effects pairwise fail to commute.
    pub pairwise_noncommuting: bool,
}

/// `d^2` effects `(1/d) |psi_ab><psi_ab|` with `|psi_ab> = X^a Z^b |psi_0>`,
/// ordered with `a` major.
pub fn hw_covariant_povm(d: usize, fiducial: &QuantumState) -> Result<HwCovariantPovm> {
    let Some(psi) = fiducial.as_pure() else {
        return Err(Error::Precondition("fiducial must be a pure state".into()));
    };
    if psi.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: psi.len() });
    }
    let omega = |k: usize| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * (k % d) as f64 / d as f64);
    let mut effects = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            // (X^a Z^b psi)_j = omega^{b (j - a)} psi_{j - a}
            let v: Vec<C64> = (0..d)
                .map(|j| {
                    let src = (j + d - a) % d;
                    omega(b * src) * psi[src]
                })
                .collect();
            effects.push(ComplexMatrix::outer(&v).scale(1.0 / d as f64));
        }
    }
    let mut noncommuting = true;
    'outer: for i in 0..effects.len() {
        for j in i + 1..effects.len() {
            if effects[i].commutator_norm(&effects[j]) <= tol::ORTHOGONAL {
                noncommuting = false;
                break 'outer;
            }
        }
    }
    let labels = (0..d).flat_map(|a| (0..d).map(move |b| format!("{a},{b}"))).collect();
    Ok(HwCovariantPovm { povm: Povm::with_labels(effects, labels)?, pairwise_noncommuting: noncommuting })
}

/// Upper bound on the success probability of any projective-plus-postselection
/// simulation of a rank-one POVM whose states are pairwise non-orthogonal.
///
/// Each branch of such a simulation can only contain one of the rank-one
/// effects, which pins every branch weight to `q/d` and forces `q <= 1/d`.
pub fn max_success_bound_rank_one(povm: &Povm) -> Result<f64> {
    let parts = povm.rank_one_parts()?;
    let psd = tol::scaled(tol::PSD, povm.dim());
    let live: Vec<&Vec<C64>> = parts.iter().filter(|(a, _)| *a > psd).map(|(_, v)| v).collect();
    for i in 0..live.len() {
        for j in i + 1..live.len() {
            let overlap = linalg::inner(live[i], live[j]).norm();
            if overlap <= tol::ORTHOGONAL {
                return Err(Error::Precondition(format!(
                    "effects {} and {} are orthogonal (overlap {overlap:.1e}); bound not applicable",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    Ok(1.0 / povm.dim() as f64)
}
