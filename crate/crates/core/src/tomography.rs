// Copyright 2026 The povmsim Developers
// SPDX-License-Identifier: Apache-2.0

//! Qubit measurement tomography by linear inversion, the operational
//! distance between measurements, and readout-bias mitigation.
//!
//! Writing an effect as `(alpha/2)(1 + n . sigma)`, its click probabilities on
//! the probes `|0>, |1>, |x+>, |y+>` determine it completely:
//! `alpha = p0 + p1`, `n_z = (p0 - p1)/alpha`, `n_x = 2 p_x/alpha - 1`,
//! `n_y = 2 p_y/alpha - 1`. No positivity projection is applied.

use std::f64::consts::FRAC_1_SQRT_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, C64};
use crate::povm::{born_probabilities, completeness_defect, BlochVector, Povm};
use crate::state::QuantumState;
use crate::tol;

/// Informationally complete qubit probes.
pub struct ProbeSet;

impl ProbeSet {
    pub const NAMES: [&'static str; 4] = ["0", "1", "x+", "y+"];

    pub fn states() -> [QuantumState; 4] {
        let h = FRAC_1_SQRT_2;
        let r = |v: [C64; 2]| QuantumState::Pure(v.to_vec());
        [
            r([C64::new(1.0, 0.0), C64::new(0.0, 0.0)]),
            r([C64::new(0.0, 0.0), C64::new(1.0, 0.0)]),
            r([C64::new(h, 0.0), C64::new(h, 0.0)]),
            r([C64::new(h, 0.0), C64::new(0.0, h)]),
        ]
    }
}

/// Relative frequencies of every outcome for each of the four probes.
///
/// When `fail_outcome` is set, that column holds postselection failures and is
/// dropped by [`TomographyRecord::postselected`].
#[derive(Debug, Clone, PartialEq)]
pub struct TomographyRecord {
    freqs: [Vec<f64>; 4],
    shots: [u64; 4],
    fail_outcome: Option<usize>,
}

impl TomographyRecord {
    /// Frequencies with `shots[p]` runs behind probe `p` (zero for exact
    /// probabilities).
    pub fn new(freqs: [Vec<f64>; 4], shots: [u64; 4], fail_outcome: Option<usize>) -> Result<Self> {
        let k = freqs[0].len();
        if k == 0 || freqs.iter().any(|f| f.len() != k) {
            return Err(Error::Format("probes report different outcome sets".into()));
        }
        if fail_outcome.is_some_and(|f| f >= k) {
            return Err(Error::InvalidArgument("failure outcome out of range".into()));
        }
        for f in &freqs {
            if f.iter().any(|x| !x.is_finite() || *x < -tol::PSD || *x > 1.0 + tol::PSD) {
                return Err(Error::InvalidArgument("frequencies must lie in [0, 1]".into()));
            }
            let total: f64 = f.iter().sum();
            if (total - 1.0).abs() > tol::COMPLETENESS {
                return Err(Error::invariant("probe frequencies sum to one", (total - 1.0).abs()));
            }
        }
        Ok(TomographyRecord { freqs, shots, fail_outcome })
    }

    pub fn from_counts(counts: [Vec<u64>; 4], fail_outcome: Option<usize>) -> Result<Self> {
        let shots = counts.each_ref().map(|c| c.iter().sum::<u64>());
        if shots.contains(&0) {
            return Err(Error::InvalidArgument("every probe needs at least one shot".into()));
        }
        let freqs = std::array::from_fn(|p| counts[p].iter().map(|&c| c as f64 / shots[p] as f64).collect());
        TomographyRecord::new(freqs, shots, fail_outcome)
    }

    /// Exact Born statistics of `povm` on the probes.
    pub fn exact(povm: &Povm, fail_outcome: Option<usize>) -> Result<Self> {
        if povm.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: povm.dim() });
        }
        let probes = ProbeSet::states();
        let mut freqs: [Vec<f64>; 4] = Default::default();
        for (f, s) in freqs.iter_mut().zip(&probes) {
            *f = born_probabilities(s, povm)?;
        }
        TomographyRecord::new(freqs, [0; 4], fail_outcome)
    }

    pub fn outcomes(&self) -> usize {
        self.freqs[0].len()
    }

    pub fn freqs(&self) -> &[Vec<f64>; 4] {
        &self.freqs
    }

    pub fn shots(&self) -> [u64; 4] {
        self.shots
    }

    pub fn fail_outcome(&self) -> Option<usize> {
        self.fail_outcome
    }

    /// Fraction of runs kept by postselection, averaged over probes.
    pub fn success_fraction(&self) -> f64 {
        match self.fail_outcome {
            Some(f) => self.freqs.iter().map(|p| 1.0 - p[f]).sum::<f64>() / 4.0,
            None => 1.0,
        }
    }

    /// Drops the failure column and renormalizes over the kept outcomes.
    pub fn postselected(&self) -> Result<TomographyRecord> {
        let Some(fail) = self.fail_outcome else {
            return Ok(self.clone());
        };
        let mut freqs: [Vec<f64>; 4] = Default::default();
        let mut shots = [0u64; 4];
        for p in 0..4 {
            let kept: f64 = 1.0 - self.freqs[p][fail];
            if kept <= 0.0 {
                return Err(Error::InvalidArgument(format!("probe {} has no accepted runs", ProbeSet::NAMES[p])));
            }
            freqs[p] = self.freqs[p].iter().enumerate().filter(|(k, _)| *k != fail).map(|(_, x)| x / kept).collect();
            shots[p] = (self.shots[p] as f64 * kept).round() as u64;
        }
        TomographyRecord::new(freqs, shots, None)
    }

    /// Renames outcomes: raw outcome `k` becomes `map[k]`.
    pub fn relabeled(&self, map: &[usize]) -> Result<TomographyRecord> {
        let k = self.outcomes();
        let mut seen = vec![false; k];
        if map.len() != k || map.iter().any(|&t| t >= k || std::mem::replace(&mut seen[t], true)) {
            return Err(Error::InvalidArgument("relabelling is not a permutation".into()));
        }
        let freqs = self.freqs.each_ref().map(|f| {
            let mut out = vec![0.0; k];
            for (raw, &x) in f.iter().enumerate() {
                out[map[raw]] = x;
            }
            out
        });
        TomographyRecord::new(freqs, self.shots, self.fail_outcome.map(|f| map[f]))
    }

    /// CSV rows `probe,outcome,count,shots,frequency`.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for (p, f) in self.freqs.iter().enumerate() {
            for (k, x) in f.iter().enumerate() {
                let outcome = if Some(k) == self.fail_outcome { "fail".to_string() } else { (k + 1).to_string() };
                out.serialize(CsvRow {
                    probe: ProbeSet::NAMES[p].to_string(),
                    outcome,
                    count: (x * self.shots[p] as f64).round() as u64,
                    shots: self.shots[p],
                    frequency: *x,
                })
                .map_err(|e| Error::Format(e.to_string()))?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    probe: String,
    outcome: String,
    count: u64,
    shots: u64,
    frequency: f64,
}

/// Effect from its four probe frequencies `[p0, p1, p_x+, p_y+]`.
pub fn reconstruct_effect(freqs: [f64; 4]) -> Result<BlochVector> {
    let [p0, p1, px, py] = freqs;
    if freqs.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::InvalidArgument(format!("frequencies {freqs:?} outside [0, 1]")));
    }
    let alpha = p0 + p1;
    if alpha <= 0.0 {
        return Err(Error::InvalidArgument("effect never clicked on |0> or |1>".into()));
    }
    Ok(BlochVector { alpha, n: [2.0 * px / alpha - 1.0, 2.0 * py / alpha - 1.0, (p0 - p1) / alpha] })
}

/// Effects by direct inversion: diagonal from `p0, p1`, off-diagonal from
/// `p_x - alpha/2` and `p_y - alpha/2`.
fn invert(freqs: [f64; 4]) -> ComplexMatrix {
    let [p0, p1, px, py] = freqs;
    let alpha = p0 + p1;
    let off = C64::new(px - alpha / 2.0, -(py - alpha / 2.0));
    ComplexMatrix::from_row_major(2, &[C64::new(p0, 0.0), off, off.conj(), C64::new(p1, 0.0)])
        .expect("finite frequencies")
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub effects: Vec<ComplexMatrix>,
    /// Largest entry of `sum_i M_i - 1`.
    pub completeness_defect: f64,
    /// Outcomes whose Bloch vector is longer than one.
    pub unphysical: Vec<usize>,
}

/// All effects of a record, after postselection if it has a failure column.
/// Outcomes that never fired reconstruct to the zero operator.
pub fn reconstruct_povm(record: &TomographyRecord) -> Result<Reconstruction> {
    let record = record.postselected()?;
    let mut effects = Vec::with_capacity(record.outcomes());
    let mut unphysical = Vec::new();
    for k in 0..record.outcomes() {
        let f = [record.freqs[0][k], record.freqs[1][k], record.freqs[2][k], record.freqs[3][k]];
        if f[0] + f[1] > 0.0 && !reconstruct_effect(f)?.is_physical() {
            unphysical.push(k);
        }
        effects.push(invert(f));
    }
    Ok(Reconstruction { completeness_defect: completeness_defect(&effects), effects, unphysical })
}

/// Largest subset size handled by [`operational_distance`].
pub const MAX_OUTCOMES: usize = 20;

/// `max_x || sum_{i in x} (M_i - N_i) ||` over all outcome subsets `x`. The
/// shorter list is padded with zero effects.
pub fn operational_distance(m: &[ComplexMatrix], n: &[ComplexMatrix]) -> Result<f64> {
    let (Some(first), Some(_)) = (m.first(), n.first()) else {
        return Err(Error::InvalidArgument("empty effect list".into()));
    };
    let d = first.dim();
    if let Some(bad) = m.iter().chain(n).find(|e| e.dim() != d) {
        return Err(Error::DimensionMismatch { expected: d, found: bad.dim() });
    }
    let k = m.len().max(n.len());
    if k > MAX_OUTCOMES {
        return Err(Error::InvalidArgument(format!("{k} outcomes exceed the limit of {MAX_OUTCOMES}")));
    }
    let zero = ComplexMatrix::zeros(d);
    let diffs: Vec<ComplexMatrix> = (0..k).map(|i| m.get(i).unwrap_or(&zero) - n.get(i).unwrap_or(&zero)).collect();
    // complete arguments: the full difference vanishes, so a subset and its
    // complement have equal norm and the last outcome can be left out
    let complete = completeness_defect(m) <= tol::scaled(tol::COMPLETENESS, d)
        && completeness_defect(n) <= tol::scaled(tol::COMPLETENESS, d);
    let bits = if complete && k > 1 { k - 1 } else { k };
    (1u64..1 << bits)
        .into_par_iter()
        .map(|mask| {
            let mut acc = zero.clone();
            for (i, dm) in diffs.iter().enumerate().take(bits) {
                if mask >> i & 1 == 1 {
                    acc = &acc + dm;
                }
            }
            linalg::operator_norm(&acc)
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

pub fn operational_distance_povm(m: &Povm, n: &Povm) -> Result<f64> {
    operational_distance(m.effects(), n.effects())
}

/// Readout-mitigation layout: number of x-gate configurations averaged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MitigationMode {
    /// One qubit read out: plain and flipped.
    Postselection,
    /// Two qubits read out: all four flip patterns.
    Naimark,
}

impl MitigationMode {
    pub fn variants(self) -> usize {
        match self {
            MitigationMode::Postselection => 2,
            MitigationMode::Naimark => 4,
        }
    }
}

/// Averages the frequency tables of all x-gate variants after mapping each
/// variant's raw outcomes back to logical ones.
pub fn bias_mitigated_statistics(
    mode: MitigationMode,
    variants: &[(TomographyRecord, Vec<usize>)],
) -> Result<TomographyRecord> {
    if variants.len() != mode.variants() {
        return Err(Error::Precondition(format!(
            "{mode:?} mitigation needs {} variants, got {}",
            mode.variants(),
            variants.len()
        )));
    }
    let relabeled = variants.iter().map(|(r, map)| r.relabeled(map)).collect::<Result<Vec<_>>>()?;
    let first = &relabeled[0];
    for r in &relabeled[1..] {
        if r.outcomes() != first.outcomes() || r.fail_outcome != first.fail_outcome || r.shots != first.shots {
            return Err(Error::Precondition("variants differ in outcomes or shots".into()));
        }
    }
    let v = relabeled.len() as f64;
    let freqs = std::array::from_fn(|p| {
        (0..first.outcomes()).map(|k| relabeled.iter().map(|r| r.freqs[p][k]).sum::<f64>() / v).collect()
    });
    let shots = std::array::from_fn(|p| relabeled.iter().map(|r| r.shots[p]).sum());
    TomographyRecord::new(freqs, shots, first.fail_outcome)
}
