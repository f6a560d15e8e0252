// Copyright 2026 The povmsim Developers
// SPDX-License-Identifier: Apache-2.0

//! Effects, POVMs, projective measurements and the Born rule.

use crate::error::{Error, Result};
use crate::linalg::{self, pauli, ComplexMatrix, C64};
use crate::rng;
use crate::state::{self, QuantumState};
use crate::tol;

/// A single measurement effect: Hermitian with spectrum in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Effect(ComplexMatrix);

impl Effect {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        check_effect(&matrix)?;
        Ok(Effect(matrix))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }
}

fn check_effect(m: &ComplexMatrix) -> Result<()> {
    let d = m.dim();
    let herm = m.hermitian_deviation();
    if herm > tol::scaled(tol::HERMITIAN, d) {
        return Err(Error::invariant("effect is hermitian", herm));
    }
    let eig = m.hermitian_eigen()?;
    let psd = tol::scaled(tol::PSD, d);
    let lo = eig.values[0];
    if lo < -psd {
        return Err(Error::invariant("effect is positive semidefinite", -lo));
    }
    let hi = *eig.values.last().unwrap();
    if hi > 1.0 + psd {
        return Err(Error::invariant("effect is bounded by the identity", hi - 1.0));
    }
    Ok(())
}

/// An ordered list of effects on `C^d` summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    effects: Vec<ComplexMatrix>,
    labels: Vec<String>,
}

impl Povm {
    /// Validates and wraps `effects`, labelling outcomes `1..=n`.
    pub fn new(effects: Vec<ComplexMatrix>) -> Result<Self> {
        let labels = (1..=effects.len()).map(|i| i.to_string()).collect();
        Self::with_labels(effects, labels)
    }

    pub fn with_labels(effects: Vec<ComplexMatrix>, labels: Vec<String>) -> Result<Self> {
        if effects.is_empty() {
            return Err(Error::InvalidArgument("a POVM needs at least one effect".into()));
        }
        if labels.len() != effects.len() {
            return Err(Error::DimensionMismatch { expected: effects.len(), found: labels.len() });
        }
        let d = effects[0].dim();
        for e in &effects {
            if e.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, found: e.dim() });
            }
            check_effect(e)?;
        }
        let defect = completeness_defect(&effects);
        if defect > tol::scaled(tol::COMPLETENESS, d) {
            return Err(Error::invariant("effects sum to identity", defect));
        }
        Ok(Povm { effects, labels })
    }

    /// The one-outcome measurement `(1)`.
    pub fn trivial(dim: usize) -> Self {
        Povm { effects: vec![ComplexMatrix::identity(dim)], labels: vec!["1".into()] }
    }

    /// Projective measurement in the computational basis.
    pub fn computational_basis(dim: usize) -> Self {
        let effects = (0..dim)
            .map(|k| {
                let mut diag = vec![0.0; dim];
                diag[k] = 1.0;
                ComplexMatrix::from_real_diagonal(&diag)
            })
            .collect();
        Povm::new(effects).expect("basis projectors form a POVM")
    }

    pub fn dim(&self) -> usize {
        self.effects[0].dim()
    }

    pub fn outcomes(&self) -> usize {
        self.effects.len()
    }

    pub fn effects(&self) -> &[ComplexMatrix] {
        &self.effects
    }

    pub fn effect(&self, i: usize) -> &ComplexMatrix {
        &self.effects[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn into_effects(self) -> Vec<ComplexMatrix> {
        self.effects
    }

    /// Whether every effect has rank at most one (within the positivity
    /// tolerance).
    pub fn is_rank_one(&self) -> bool {
        let psd = tol::scaled(tol::PSD, self.dim());
        self.effects.iter().all(|e| {
            let eig = e.hermitian_eigen().expect("validated effect");
            eig.values.iter().rev().skip(1).all(|&v| v.abs() <= psd)
        })
    }

    /// Rank-one effects as `(weight, unit vector)` pairs. Fails if any effect
    /// has rank above one. Zero effects yield a zero weight.
    pub fn rank_one_parts(&self) -> Result<Vec<(f64, Vec<C64>)>> {
        let psd = tol::scaled(tol::PSD, self.dim());
        self.effects
            .iter()
            .map(|e| {
                let eig = e.hermitian_eigen()?;
                let second = eig.values.len().checked_sub(2).map(|k| eig.values[k]).unwrap_or(0.0);
                if second.abs() > psd {
                    return Err(Error::Precondition("effects must be rank one".into()));
                }
                let top = eig.values.len() - 1;
                Ok((eig.values[top].max(0.0), eig.vectors[top].clone()))
            })
            .collect()
    }
}

/// Largest entrywise deviation of `sum(effects)` from the identity.
pub fn completeness_defect(effects: &[ComplexMatrix]) -> f64 {
    let d = effects[0].dim();
    linalg::sum(d, effects).max_abs_diff(&ComplexMatrix::identity(d))
}

/// A POVM whose effects are pairwise orthogonal projectors. Zero effects are
/// allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveMeasurement(Povm);

impl ProjectiveMeasurement {
    pub fn new(povm: Povm) -> Result<Self> {
        let tau = tol::scaled(tol::PROJECTOR, povm.dim());
        for (i, p) in povm.effects().iter().enumerate() {
            let idem = (p * p).max_abs_diff(p);
            if idem > tau {
                return Err(Error::invariant("effects are idempotent", idem));
            }
            for q in &povm.effects()[i + 1..] {
                let overlap = (p * q).max_abs();
                if overlap > tau {
                    return Err(Error::invariant("effects are mutually orthogonal", overlap));
                }
            }
        }
        Ok(ProjectiveMeasurement(povm))
    }

    pub fn povm(&self) -> &Povm {
        &self.0
    }

    pub fn into_povm(self) -> Povm {
        self.0
    }
}

/// Outcome probabilities `tr(M_i rho)`.
///
/// Negative round-off within the positivity tolerance is clamped to zero and
/// the vector renormalized; anything more negative is an error.
pub fn born_probabilities(state: &QuantumState, povm: &Povm) -> Result<Vec<f64>> {
    if state.dim() != povm.dim() {
        return Err(Error::DimensionMismatch { expected: povm.dim(), found: state.dim() });
    }
    let psd = tol::scaled(tol::PSD, povm.dim());
    let mut probs = Vec::with_capacity(povm.outcomes());
    for e in povm.effects() {
        let p = state.expectation(e);
        if p < -psd {
            return Err(Error::invariant("born probability is non-negative", -p));
        }
        probs.push(p.max(0.0));
    }
    let total: f64 = probs.iter().sum();
    let dev = (total - 1.0).abs();
    if dev > tol::scaled(tol::COMPLETENESS, povm.dim()) {
        return Err(Error::invariant("born probabilities sum to one", dev));
    }
    for p in probs.iter_mut() {
        *p /= total;
    }
    Ok(probs)
}

/// Random POVM with `n` effects of rank `rank`: Gaussian positive operators
/// `G_i = A_i A_i^dagger` normalized as `S^{-1/2} G_i S^{-1/2}`.
pub fn random_povm(dim: usize, n: usize, rank: usize, seed: u64) -> Result<Povm> {
    if dim == 0 || n == 0 || rank == 0 || rank > dim {
        return Err(Error::InvalidArgument(format!("cannot draw {n} effects of rank {rank} on C^{dim}")));
    }
    let mut r = rng::from_seed(seed);
    let mut raw = Vec::with_capacity(n);
    for _ in 0..n {
        let mut g = ComplexMatrix::zeros(dim);
        for _ in 0..rank {
            let v = state::haar_random_vector(dim, &mut r)?;
            g = &g + &ComplexMatrix::outer(&v);
        }
        raw.push(g);
    }
    normalize_effects(raw)
}

/// Random rank-one POVM with `n` outcomes.
pub fn random_rank_one_povm(dim: usize, n: usize, seed: u64) -> Result<Povm> {
    random_povm(dim, n, 1, seed)
}

fn normalize_effects(raw: Vec<ComplexMatrix>) -> Result<Povm> {
    let dim = raw[0].dim();
    let total = linalg::sum(dim, &raw);
    if linalg::min_eigenvalue(&total)? <= tol::LINEAR_INDEPENDENCE {
        return Err(Error::Precondition("random effects do not span the space".into()));
    }
    let t = linalg::hermitian_function(&total, |x| 1.0 / x.sqrt())?;
    let effects = raw
        .iter()
        .map(|g| {
            let e = &(&t * g) * &t;
            // symmetrize away round-off
            (&e + &e.adjoint()).scale(0.5)
        })
        .collect();
    Povm::new(effects)
}

/// Qubit effect written as `(alpha/2) (1 + n . sigma)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    pub alpha: f64,
    pub n: [f64; 3],
}

impl BlochVector {
    /// Checked constructor: the resulting matrix must be a valid effect.
    pub fn new(alpha: f64, n: [f64; 3]) -> Result<Self> {
        let b = BlochVector { alpha, n };
        if alpha.is_nan() || alpha <= 0.0 {
            return Err(Error::InvalidArgument(format!("effect weight must be positive, got {alpha}")));
        }
        Effect::new(b.to_matrix())?;
        Ok(b)
    }

    /// Reads off `(alpha, n)` from a 2x2 Hermitian matrix with positive trace.
    /// No positivity check: reconstructed effects may be unphysical.
    pub fn from_matrix(m: &ComplexMatrix) -> Result<Self> {
        if m.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: m.dim() });
        }
        let alpha = m.trace().re;
        if alpha.is_nan() || alpha <= 0.0 {
            return Err(Error::InvalidArgument("effect has non-positive trace".into()));
        }
        let off = m.get(0, 1);
        Ok(BlochVector {
            alpha,
            n: [2.0 * off.re / alpha, -2.0 * off.im / alpha, (m.get(0, 0).re - m.get(1, 1).re) / alpha],
        })
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        let [x, y, z] = self.n;
        let m = &(&(&ComplexMatrix::identity(2) + &pauli::x().scale(x)) + &pauli::y().scale(y)) + &pauli::z().scale(z);
        m.scale(self.alpha / 2.0)
    }

    pub fn length(&self) -> f64 {
        self.n.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Whether `|n| <= 1` (within tolerance).
    pub fn is_physical(&self) -> bool {
        self.length() <= 1.0 + tol::PSD
    }
}
