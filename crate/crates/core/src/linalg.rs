// Copyright 2026 The povmsim Developers
// SPDX-License-Identifier: Apache-2.0

//! Dense complex matrices and the spectral routines the rest of the crate
//! builds on.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tol;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// A square complex matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix{}", self.0)
    }
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries.
    pub fn from_row_major(dim: usize, entries: &[C64]) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("matrix dimension must be at least 1".into()));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: entries.len() });
        }
        Self::from_dmatrix(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn from_dmatrix(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        if m.nrows() == 0 {
            return Err(Error::InvalidArgument("matrix dimension must be at least 1".into()));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(ComplexMatrix(m))
    }

    pub fn identity(dim: usize) -> Self {
        ComplexMatrix(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        ComplexMatrix(DMatrix::zeros(dim, dim))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let v: Vec<C64> = diag.iter().map(|&x| C64::new(x, 0.0)).collect();
        ComplexMatrix(DMatrix::from_diagonal(&DVector::from_vec(v)))
    }

    /// `|v><v|`
    pub fn outer(v: &[C64]) -> Self {
        let col = DVector::from_column_slice(v);
        ComplexMatrix(&col * col.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn row_major(&self) -> Vec<C64> {
        let d = self.dim();
        (0..d).flat_map(|r| (0..d).map(move |c| (r, c))).map(|(r, c)| self.0[(r, c)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        ComplexMatrix(self.0.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn scale(&self, s: f64) -> Self {
        ComplexMatrix(self.0.map(|z| z * s))
    }

    pub fn scale_complex(&self, s: C64) -> Self {
        ComplexMatrix(self.0.map(|z| z * s))
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn hermitian_deviation(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_deviation() <= tol::scaled(tol::HERMITIAN, self.dim())
    }

    /// `tr(self * other)`
    pub fn trace_product(&self, other: &ComplexMatrix) -> C64 {
        let d = self.dim();
        let mut acc = ZERO;
        for i in 0..d {
            for k in 0..d {
                acc += self.0[(i, k)] * other.0[(k, i)];
            }
        }
        acc
    }

    /// `<v| self |v>`
    pub fn expectation(&self, v: &[C64]) -> C64 {
        let col = DVector::from_column_slice(v);
        (col.adjoint() * &self.0 * &col)[(0, 0)]
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let col = DVector::from_column_slice(v);
        (&self.0 * col).iter().copied().collect()
    }

    /// `self ⊗ other`
    pub fn kron(&self, other: &ComplexMatrix) -> Self {
        ComplexMatrix(self.0.kronecker(&other.0))
    }

    pub fn commutator_norm(&self, other: &ComplexMatrix) -> f64 {
        let c = &self.0 * &other.0 - &other.0 * &self.0;
        c.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Deviation of `self† self` from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        let p = self.0.adjoint() * &self.0;
        ComplexMatrix(p).max_abs_diff(&ComplexMatrix::identity(self.dim()))
    }

    /// Spectral decomposition of a Hermitian matrix.
    ///
    /// Eigenvalues are returned in ascending order together with the matching
    /// unit eigenvectors. The Hermitian part `(A + A†)/2` is decomposed, so the
    /// caller is responsible for checking Hermiticity first.
    pub fn hermitian_eigen(&self) -> Result<HermitianEigen> {
        if self.hermitian_deviation() > tol::scaled(tol::HERMITIAN, self.dim()) {
            return Err(Error::invariant("hermitian", self.hermitian_deviation()));
        }
        Ok(HermitianEigen::of_hermitian_part(self))
    }

    pub fn real_diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.0[(i, i)].re).collect()
    }
}

/// Eigen-decomposition with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<C64>>,
}

impl HermitianEigen {
    fn of_hermitian_part(m: &ComplexMatrix) -> Self {
        let h = (&m.0 + m.0.adjoint()).map(|z| z * 0.5);
        let eig = h.symmetric_eigen();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = order.iter().map(|&k| fix_phase(eig.eigenvectors.column(k).iter().copied().collect())).collect();
        HermitianEigen { values, vectors }
    }
}

/// Rotates the global phase so the first component of largest modulus is real
/// and positive.
pub fn fix_phase(mut v: Vec<C64>) -> Vec<C64> {
    let mut best = 0;
    let mut best_norm = -1.0;
    for (k, z) in v.iter().enumerate() {
        if z.norm() > best_norm + 1e-12 {
            best = k;
            best_norm = z.norm();
        }
    }
    if best_norm > 0.0 {
        let phase = v[best].conj() / best_norm;
        for z in v.iter_mut() {
            *z *= phase;
        }
    }
    v
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn normalized(v: &[C64]) -> Vec<C64> {
    let n = norm(v);
    v.iter().map(|z| z / n).collect()
}

fn check_finite(m: &ComplexMatrix) -> Result<()> {
    if m.0.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

/// Operator (spectral) norm.
///
/// Hermitian input uses the largest absolute eigenvalue; anything else falls
/// back to the largest singular value.
pub fn operator_norm(m: &ComplexMatrix) -> Result<f64> {
    check_finite(m)?;
    if m.is_hermitian() {
        let e = HermitianEigen::of_hermitian_part(m);
        Ok(e.values.iter().map(|x| x.abs()).fold(0.0, f64::max))
    } else {
        let sv = m.0.clone().singular_values();
        Ok(sv.iter().copied().fold(0.0, f64::max))
    }
}

pub fn min_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    check_finite(m)?;
    let e = m.hermitian_eigen()?;
    Ok(e.values[0])
}

pub fn max_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    check_finite(m)?;
    let e = m.hermitian_eigen()?;
    Ok(*e.values.last().unwrap())
}

/// `f(A)` for a Hermitian `A`, through its spectral decomposition.
pub fn hermitian_function(m: &ComplexMatrix, f: impl Fn(f64) -> f64) -> Result<ComplexMatrix> {
    let e = m.hermitian_eigen()?;
    let d = m.dim();
    let mut out = DMatrix::<C64>::zeros(d, d);
    for (val, vec) in e.values.iter().zip(&e.vectors) {
        let col = DVector::from_column_slice(vec);
        out += (&col * col.adjoint()).map(|z| z * f(*val));
    }
    Ok(ComplexMatrix(out))
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-&self.0)
    }
}

pub fn sum<'a>(dim: usize, it: impl IntoIterator<Item = &'a ComplexMatrix>) -> ComplexMatrix {
    let mut acc = DMatrix::<C64>::zeros(dim, dim);
    for m in it {
        acc += &m.0;
    }
    ComplexMatrix(acc)
}

/// Pauli matrices in the computational basis.
pub mod pauli {
    use super::*;

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_row_major(2, &[ZERO, ONE, ONE, ZERO]).unwrap()
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::from_row_major(2, &[ZERO, -I, I, ZERO]).unwrap()
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_real_diagonal(&[1.0, -1.0])
    }
}
