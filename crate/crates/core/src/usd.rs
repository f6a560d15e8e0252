// Copyright 2026 The povmsim Developers
// SPDX-License-Identifier: Apache-2.0

//! Unambiguous discrimination of pure states.
//!
//! For `n` linearly independent states the Gram matrix `C_ij = <psi_i|psi_j>`
//! controls everything here: the equal-probability measurement succeeds with
//! probability `lambda_min(C)`, and the best projective-simulable strategy
//! reaches `max_i p_i / (C^-1)_ii`.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, C64, ZERO};
use crate::povm::Povm;
use crate::rng;
use crate::simulation::{apply_postprocessing, build_mq, PostProcessingMap};
use crate::state::haar_random_vector;
use crate::tol;

/// Pure states with prior probabilities.
#[derive(Debug, Clone)]
pub struct Ensemble {
    states: Vec<Vec<C64>>,
    probs: Vec<f64>,
    linearly_independent: bool,
}

impl Ensemble {
    pub fn new(states: Vec<Vec<C64>>, probs: Vec<f64>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidArgument("ensemble has no states".into()));
        }
        if probs.len() != states.len() {
            return Err(Error::DimensionMismatch { expected: states.len(), found: probs.len() });
        }
        let dim = states[0].len();
        for s in &states {
            if s.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: s.len() });
            }
            let dev = (linalg::norm(s) - 1.0).abs();
            if dev > tol::NORM {
                return Err(Error::invariant("states are unit vectors", dev));
            }
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidArgument(format!("probability {p} is negative")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > tol::COMPLETENESS {
            return Err(Error::invariant("probabilities sum to one", (total - 1.0).abs()));
        }
        let linearly_independent = independent(&states);
        Ok(Ensemble { states, probs, linearly_independent })
    }

    pub fn uniform(states: Vec<Vec<C64>>) -> Result<Self> {
        let n = states.len().max(1);
        Ensemble::new(states, vec![1.0 / n as f64; n])
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Dimension of the ambient space.
    pub fn dim(&self) -> usize {
        self.states[0].len()
    }

    pub fn states(&self) -> &[Vec<C64>] {
        &self.states
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn is_linearly_independent(&self) -> bool {
        self.linearly_independent
    }

    pub fn is_uniform(&self) -> bool {
        let u = 1.0 / self.len() as f64;
        self.probs.iter().all(|p| (p - u).abs() <= tol::COMPLETENESS)
    }

    pub fn gram(&self) -> GramMatrix {
        let n = self.len();
        let mut entries = Vec::with_capacity(n * n);
        for a in &self.states {
            for b in &self.states {
                entries.push(linalg::inner(a, b));
            }
        }
        GramMatrix(ComplexMatrix::from_row_major(n, &entries).expect("finite Gram matrix"))
    }

    fn require_independent(&self) -> Result<()> {
        if !self.linearly_independent {
            return Err(Error::Precondition("ensemble states are linearly dependent".into()));
        }
        Ok(())
    }

    /// Dual vectors `|psi~_i>` with `<psi~_i|psi_j> = delta_ij`, spanning the
    /// same subspace as the ensemble.
    pub fn dual_vectors(&self) -> Result<Vec<Vec<C64>>> {
        self.require_independent()?;
        let (n, dim) = (self.len(), self.dim());
        let psi = DMatrix::from_fn(dim, n, |r, c| self.states[c][r]);
        let gram = self.gram().0.into_dmatrix();
        let chol = gram.cholesky().ok_or_else(|| Error::Precondition("Gram matrix is not positive definite".into()))?;
        // C Y = Psi^dagger, dual matrix is Y^dagger = Psi C^-1
        let y = chol.solve(&psi.adjoint());
        let dual = y.adjoint();
        Ok((0..n).map(|i| dual.column(i).iter().copied().collect()).collect())
    }
}

fn independent(states: &[Vec<C64>]) -> bool {
    let (n, dim) = (states.len(), states[0].len());
    if n > dim {
        return false;
    }
    let psi = DMatrix::from_fn(dim, n, |r, c| states[c][r]);
    let sv = psi.singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    min > tol::LINEAR_INDEPENDENCE * max
}

/// `C_ij = <psi_i|psi_j>`.
#[derive(Debug, Clone)]
pub struct GramMatrix(ComplexMatrix);

impl GramMatrix {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.0.hermitian_eigen().expect("Gram matrix is finite").values
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn condition_number(&self) -> f64 {
        let ev = self.eigenvalues();
        let max = *ev.last().unwrap();
        if ev[0] <= 0.0 {
            f64::INFINITY
        } else {
            max / ev[0]
        }
    }
}

/// A `tr(rho_i M_j)` cross term above the unambiguity tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Violation {
    pub state: usize,
    pub outcome: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UsdReport {
    pub success: f64,
    pub violations: Vec<Violation>,
}

impl UsdReport {
    pub fn is_unambiguous(&self) -> bool {
        self.violations.is_empty()
    }
}

/// `sum_i p_i <psi_i|M_i|psi_i>` for an `(n + 1)`-outcome POVM whose last
/// effect is the inconclusive one, plus every violated cross term.
pub fn usd_success(ensemble: &Ensemble, povm: &Povm) -> Result<UsdReport> {
    let n = ensemble.len();
    if povm.outcomes() != n + 1 {
        return Err(Error::DimensionMismatch { expected: n + 1, found: povm.outcomes() });
    }
    if povm.dim() != ensemble.dim() {
        return Err(Error::DimensionMismatch { expected: ensemble.dim(), found: povm.dim() });
    }
    let mut success = 0.0;
    let mut violations = Vec::new();
    for (i, (psi, p)) in ensemble.states.iter().zip(&ensemble.probs).enumerate() {
        for j in 0..n {
            let v = povm.effect(j).expectation(psi).re;
            if i == j {
                success += p * v;
            } else if v > tol::UNAMBIGUOUS {
                violations.push(Violation { state: i, outcome: j, value: v });
            }
        }
    }
    Ok(UsdReport { success, violations })
}

/// `M_i = lambda_min(C) |psi~_i><psi~_i|` and the inconclusive remainder.
/// Every state is identified with probability `lambda_min(C)`.
pub fn equal_probability_measurement(ensemble: &Ensemble) -> Result<Povm> {
    if !ensemble.is_uniform() {
        return Err(Error::Precondition("equal-probability measurement needs uniform priors".into()));
    }
    let dual = ensemble.dual_vectors()?;
    let lambda = ensemble.gram().min_eigenvalue();
    let dim = ensemble.dim();
    let mut effects: Vec<ComplexMatrix> = dual.iter().map(|v| ComplexMatrix::outer(v).scale(lambda)).collect();
    let inconclusive = &ComplexMatrix::identity(dim) - &linalg::sum(dim, &effects);
    effects.push(inconclusive);
    let mut labels: Vec<String> = (1..=ensemble.len()).map(|i| i.to_string()).collect();
    labels.push("?".into());
    Povm::with_labels(effects, labels)
}

/// Best success of a projective-simulable USD strategy: `max_i p_i / (C^-1)_ii`.
///
/// Needs pairwise non-orthogonal, linearly independent states. An
/// unambiguous projector for outcome `i` must then lie along the dual vector
/// `|psi~_i>`, and `|<psi_i|phi_i>|^2 = 1 / (C^-1)_ii` for its normalization.
pub fn projective_simulable_optimum(ensemble: &Ensemble) -> Result<f64> {
    ensemble.require_independent()?;
    check_pairwise_nonorthogonal(ensemble)?;
    let dual = ensemble.dual_vectors()?;
    Ok(dual.iter().zip(&ensemble.probs).map(|(v, p)| p / linalg::norm(v).powi(2)).fold(0.0, f64::max))
}

fn check_pairwise_nonorthogonal(ensemble: &Ensemble) -> Result<()> {
    for i in 0..ensemble.len() {
        for j in i + 1..ensemble.len() {
            let s = linalg::inner(&ensemble.states[i], &ensemble.states[j]).norm();
            if s <= tol::ORTHOGONAL {
                return Err(Error::Precondition(format!(
                    "states {} and {} are orthogonal (overlap {s:.1e})",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    Ok(())
}

fn all_orthogonal(ensemble: &Ensemble) -> bool {
    let n = ensemble.len();
    (0..n)
        .all(|i| (i + 1..n).all(|j| linalg::inner(&ensemble.states[i], &ensemble.states[j]).norm() <= tol::ORTHOGONAL))
}

/// Symmetric states `|phi_i> = d^{-1/2} sum_k c_k omega^{ik} |k>` and their
/// optimal USD success `min_k |c_k|^2`.
#[derive(Debug, Clone)]
pub struct SymmetricEnsemble {
    pub ensemble: Ensemble,
    pub coefficients: Vec<C64>,
    pub optimum: f64,
}

/// Coefficients are normalized as `sum_k |c_k|^2 = d`.
pub fn symmetric_ensemble(coefficients: &[C64]) -> Result<SymmetricEnsemble> {
    let d = coefficients.len();
    if d == 0 {
        return Err(Error::InvalidArgument("no coefficients".into()));
    }
    let total: f64 = coefficients.iter().map(|c| c.norm_sqr()).sum();
    if (total - d as f64).abs() > tol::scaled(tol::COMPLETENESS, d) {
        return Err(Error::invariant("squared coefficients sum to d", (total - d as f64).abs()));
    }
    if let Some(k) = coefficients.iter().position(|c| c.norm_sqr() <= tol::LINEAR_INDEPENDENCE) {
        return Err(Error::Precondition(format!("coefficient c_{k} vanishes")));
    }
    let scale = 1.0 / (d as f64).sqrt();
    let omega = |m: usize| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * (m % d) as f64 / d as f64);
    let states = (0..d).map(|i| (0..d).map(|k| coefficients[k] * omega(i * k) * scale).collect()).collect();
    let optimum = coefficients.iter().map(|c| c.norm_sqr()).fold(f64::INFINITY, f64::min).min(1.0);
    Ok(SymmetricEnsemble { ensemble: Ensemble::uniform(states)?, coefficients: coefficients.to_vec(), optimum })
}

/// Symmetric ensemble with `|c_0|^2 = 1 - eps` and the remaining weight spread
/// evenly, so the optimum is `1 - eps`.
pub fn symmetric_ensemble_with_epsilon(d: usize, eps: f64) -> Result<SymmetricEnsemble> {
    if d < 2 {
        return Err(Error::InvalidArgument("need d >= 2".into()));
    }
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidArgument(format!("epsilon {eps} outside [0, 1)")));
    }
    let rest = (1.0 + eps / (d - 1) as f64).sqrt();
    let mut c = vec![C64::new(rest, 0.0); d];
    c[0] = C64::new((1.0 - eps).sqrt(), 0.0);
    symmetric_ensemble(&c)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma1Check {
    /// Equal-probability success `lambda_min(C)`, a lower bound on the POVM
    /// optimum.
    pub p_povm_lower: f64,
    pub p_sp: f64,
    pub ratio: f64,
    /// Success of the postselected simulation of the equal-probability
    /// measurement, which is projective-simulable.
    pub simulated_success: f64,
    pub bound_ok: bool,
}

/// Compares the POVM lower bound with the projective-simulable optimum and
/// checks `p_povm <= d p_sp`.
pub fn lemma1_bound_check(ensemble: &Ensemble) -> Result<Lemma1Check> {
    ensemble.require_independent()?;
    let d = ensemble.len() as f64;
    let p_sp = if all_orthogonal(ensemble) { 1.0 } else { projective_simulable_optimum(ensemble)? };
    let m_eq = equal_probability_measurement(ensemble)?;
    let p_povm_lower = usd_success(ensemble, &m_eq)?.success;
    let mq = build_mq(&m_eq, 1.0 / d)?;
    let n = ensemble.len();
    let glued = apply_postprocessing(&mq, &PostProcessingMap::glue_pair(n + 2, n, n + 1)?)?;
    let simulated_success = usd_success(ensemble, &glued)?.success;
    let bound_ok = p_povm_lower <= d * p_sp + tol::COMPLETENESS && simulated_success <= p_sp + tol::COMPLETENESS;
    Ok(Lemma1Check { p_povm_lower, p_sp, ratio: p_povm_lower / p_sp, simulated_success, bound_ok })
}

/// One Haar-random ensemble of the sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRow {
    pub d: usize,
    #[serde(rename = "D")]
    pub big_d: usize,
    pub gamma: f64,
    pub trial: usize,
    pub lambda_min: f64,
    pub p_sp_upper: f64,
    pub ratio_lower: f64,
    pub ratio_upper: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Summary {
        let n = values.len().max(1) as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        Summary {
            mean,
            std: var.sqrt(),
            min: values.iter().cloned().fold(f64::INFINITY, f64::min),
            max: values.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RandomExperiment {
    pub d: usize,
    #[serde(rename = "D")]
    pub big_d: usize,
    pub gamma: f64,
    pub seed: u64,
    pub rows: Vec<TrialRow>,
    pub lambda_min: Summary,
    /// `(1 - gamma)^2`.
    pub asymptotic_lambda_min: f64,
    /// Trials with `d (1 - gamma)^2 <= d lambda_min <= d`.
    pub band_holds: usize,
}

impl RandomExperiment {
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for row in &self.rows {
            out.serialize(row).map_err(|e| Error::Format(e.to_string()))?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Gram spectra of `trials` ensembles of `d` Haar-random states in `C^D`.
/// Trial `t` draws from seed `derive_seed(seed, [t])`.
pub fn random_ensemble_experiment(d: usize, big_d: usize, trials: usize, seed: u64) -> Result<RandomExperiment> {
    if d == 0 || d > big_d {
        return Err(Error::InvalidArgument(format!("need 1 <= d <= D, got d = {d}, D = {big_d}")));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let gamma = d as f64 / big_d as f64;
    let rows = (0..trials)
        .into_par_iter()
        .map(|t| {
            let sub = rng::derive_seed(seed, &[t as u64]);
            let mut r = rng::from_seed(sub);
            let states = (0..d).map(|_| haar_random_vector(big_d, &mut r)).collect::<Result<Vec<_>>>()?;
            let lambda = Ensemble::uniform(states)?.gram().min_eigenvalue().max(0.0);
            Ok(TrialRow {
                d,
                big_d,
                gamma,
                trial: t,
                lambda_min: lambda,
                p_sp_upper: 1.0 / d as f64,
                ratio_lower: d as f64 * lambda,
                ratio_upper: d as f64,
                seed: sub,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let lambdas: Vec<f64> = rows.iter().map(|r| r.lambda_min).collect();
    let asymptotic = (1.0 - gamma).powi(2);
    let band_holds = rows
        .iter()
        .filter(|r| {
            d as f64 * asymptotic <= r.ratio_lower + tol::COMPLETENESS
                && r.ratio_lower <= r.ratio_upper + tol::COMPLETENESS
        })
        .count();
    Ok(RandomExperiment {
        d,
        big_d,
        gamma,
        seed,
        rows,
        lambda_min: Summary::of(&lambdas),
        asymptotic_lambda_min: asymptotic,
        band_holds,
    })
}

/// The orthonormal basis as a uniform ensemble.
pub fn basis_ensemble(d: usize) -> Ensemble {
    let states = (0..d)
        .map(|k| {
            let mut v = vec![ZERO; d];
            v[k] = C64::new(1.0, 0.0);
            v
        })
        .collect();
    Ensemble::uniform(states).expect("basis is a valid ensemble")
}
