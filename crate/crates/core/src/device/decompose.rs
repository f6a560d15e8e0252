// Copyright 2026 The povmsim Developers
// SPDX-License-Identifier: Apache-2.0

//! Two-qubit unitaries as at most three CNOTs interleaved with single-qubit
//! gates.
//!
//! Any `U` in `SU(4)` factors as `(A1 (x) B1) exp(i(a XX + b YY + c ZZ)) (A2 (x) B2)`.
//! In the magic basis local gates become real orthogonal matrices and the
//! middle factor becomes diagonal, so the factorization follows from
//! simultaneously diagonalizing the real and imaginary parts of `U_B^T U_B`.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::circuit::{ry, rz, Circuit, Gate};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::tol;

/// Which CNOT orientations the hardware offers.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Connectivity {
    #[default]
    Full,
    /// Only `CNOT(control 0, target 1)`; the other orientation is conjugated
    /// by Hadamards on both qubits.
    OneWay,
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    pub circuit: Circuit,
    /// Interaction coefficients `(a, b, c)`.
    pub coefficients: [f64; 3],
    /// Largest entry of `U - e^{i phi} V` for the best global phase.
    pub residual: f64,
}

fn magic() -> DMatrix<C64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let (o, z, i) = (C64::new(h, 0.0), C64::new(0.0, 0.0), C64::new(0.0, h));
    DMatrix::from_row_slice(4, 4, &[o, z, z, i, z, i, o, z, z, i, -o, z, o, z, z, -i])
}

/// Smallest `max |U - e^{i phi} V|` over global phases.
pub fn phase_invariant_distance(u: &ComplexMatrix, v: &ComplexMatrix) -> f64 {
    let t = v.adjoint().trace_product(u);
    let phase = if t.norm() > 0.0 { t / t.norm() } else { C64::new(1.0, 0.0) };
    u.max_abs_diff(&v.scale_complex(phase))
}

/// Splits `K = A (x) B` (qubit 0 is `A`). Returns `None` if `K` is not a
/// product.
fn kron_factor(k: &DMatrix<C64>) -> Option<(ComplexMatrix, ComplexMatrix)> {
    let block = |r: usize, c: usize| k.view((2 * r, 2 * c), (2, 2)).into_owned();
    let (mut br, mut bc, mut best) = (0, 0, -1.0);
    for r in 0..2 {
        for c in 0..2 {
            let n = block(r, c).norm();
            if n > best {
                (br, bc, best) = (r, c, n);
            }
        }
    }
    let mut b = block(br, bc);
    let det = b[(0, 0)] * b[(1, 1)] - b[(0, 1)] * b[(1, 0)];
    if det.norm() < 1e-12 {
        return None;
    }
    b /= det.sqrt();
    let mut a = DMatrix::<C64>::zeros(2, 2);
    for r in 0..2 {
        for c in 0..2 {
            a[(r, c)] = (b.adjoint() * block(r, c)).trace() / C64::new(2.0, 0.0);
        }
    }
    let a = ComplexMatrix::from_dmatrix(a).ok()?;
    let b = ComplexMatrix::from_dmatrix(b).ok()?;
    let rebuilt = a.kron(&b);
    let target = ComplexMatrix::from_dmatrix(k.clone()).ok()?;
    (rebuilt.max_abs_diff(&target) < 1e-9).then_some((a, b))
}

/// Real orthogonal `P` with `P^T M P` diagonal, for complex symmetric unitary
/// `M`, with `det P = +1`.
fn real_diagonalizer(m: &DMatrix<C64>) -> Option<DMatrix<f64>> {
    let re = m.map(|z| z.re);
    let im = m.map(|z| z.im);
    for r in [0.0, 0.731, 1.913, 2.517, 0.271, 1.337, 2.983, 0.577] {
        let (cr, sr) = (f64::cos(r), f64::sin(r));
        let mix = &re * cr + &im * sr;
        let eig = SymmetricEigen::new((&mix + mix.transpose()) * 0.5);
        let mut p = eig.eigenvectors;
        if p.determinant() < 0.0 {
            let col = -p.column(0).into_owned();
            p.set_column(0, &col);
        }
        let pc = p.map(|x| C64::new(x, 0.0));
        let d = pc.transpose() * m * &pc;
        let off = (0..4)
            .flat_map(|i| (0..4).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| d[(i, j)].norm())
            .fold(0.0, f64::max);
        if off < 1e-10 {
            return Some(p);
        }
    }
    None
}

/// Decomposes a two-qubit unitary into single-qubit gates and at most three
/// CNOTs.
pub fn decompose_two_qubit(u: &ComplexMatrix, connectivity: Connectivity) -> Result<Decomposition> {
    if u.dim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, found: u.dim() });
    }
    let dev = u.unitarity_deviation();
    if dev > tol::COMPLETENESS {
        return Err(Error::invariant("target is unitary", dev));
    }
    let raw = u.as_dmatrix();
    let det = raw.determinant();
    let su = raw / det.powf(0.25);

    let b = magic();
    let up = b.adjoint() * &su * &b;
    let m2 = up.transpose() * &up;
    let p = real_diagonalizer(&m2).ok_or(Error::Decomposition { residual: f64::NAN })?;
    let pc = p.map(|x| C64::new(x, 0.0));
    let diag = pc.transpose() * &m2 * &pc;
    let mut delta: Vec<C64> = (0..4).map(|i| diag[(i, i)].sqrt()).collect();
    let prod: C64 = delta.iter().product();
    if prod.re < 0.0 {
        delta[0] = -delta[0];
    }
    let delta_inv = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(4, delta.iter().map(|z| z.inv())));
    let o1 = &up * &pc * delta_inv;
    let k1 = &b * o1 * b.adjoint();
    let k2 = &b * pc.transpose() * b.adjoint();
    let theta: Vec<f64> = delta.iter().map(|z| z.arg()).collect();
    let coeffs = [(theta[0] + theta[1]) / 2.0, (theta[1] + theta[3]) / 2.0, (theta[0] + theta[3]) / 2.0];

    let (a1, b1) = kron_factor(&k1).ok_or(Error::Decomposition { residual: f64::NAN })?;
    let (a2, b2) = kron_factor(&k2).ok_or(Error::Decomposition { residual: f64::NAN })?;

    let mut gates = vec![Gate::su2(0, a2), Gate::su2(1, b2)];
    let [a, bb, c] = coeffs;
    if coeffs.iter().any(|x| x.abs() > 1e-12) {
        gates.extend([
            Gate::su2(0, rz(-FRAC_PI_2)),
            Gate::cnot(1, 0),
            Gate::su2(1, ry(FRAC_PI_2 - 2.0 * bb)),
            Gate::cnot(0, 1),
            Gate::su2(0, rz(FRAC_PI_2 - 2.0 * c)),
            Gate::su2(1, ry(2.0 * a - FRAC_PI_2)),
            Gate::cnot(1, 0),
            Gate::su2(1, rz(FRAC_PI_2)),
        ]);
    }
    gates.extend([Gate::su2(0, a1), Gate::su2(1, b1)]);
    let mut gates = simplify(gates);
    if connectivity == Connectivity::OneWay {
        gates = route_one_way(gates);
    }
    let circuit = Circuit::new(2, gates, vec![0, 1])?;
    let residual = phase_invariant_distance(u, &circuit.unitary());
    if residual >= tol::DECOMPOSITION {
        return Err(Error::Decomposition { residual });
    }
    Ok(Decomposition { circuit, coefficients: coeffs, residual })
}

/// Merges runs of single-qubit gates on the same qubit and drops those equal
/// to the identity up to phase.
fn simplify(gates: Vec<Gate>) -> Vec<Gate> {
    let mut out: Vec<Gate> = Vec::new();
    let mut pending: [Option<ComplexMatrix>; 2] = [None, None];
    let flush = |q: usize, pending: &mut [Option<ComplexMatrix>; 2], out: &mut Vec<Gate>| {
        if let Some(m) = pending[q].take() {
            if phase_invariant_distance(&m, &ComplexMatrix::identity(2)) > 1e-12 {
                out.push(Gate::su2(q, m));
            }
        }
    };
    for g in gates {
        match g {
            Gate::Su2 { qubit, matrix } => {
                pending[qubit] = Some(match pending[qubit].take() {
                    Some(prev) => &matrix * &prev,
                    None => matrix,
                });
            }
            other => {
                for q in other.qubits() {
                    flush(q, &mut pending, &mut out);
                }
                out.push(other);
            }
        }
    }
    flush(0, &mut pending, &mut out);
    flush(1, &mut pending, &mut out);
    out
}

fn route_one_way(gates: Vec<Gate>) -> Vec<Gate> {
    gates
        .into_iter()
        .flat_map(|g| match g {
            Gate::Cnot { control: 1, target: 0 } => vec![
                Gate::H { qubit: 0 },
                Gate::H { qubit: 1 },
                Gate::cnot(0, 1),
                Gate::H { qubit: 0 },
                Gate::H { qubit: 1 },
            ],
            other => vec![other],
        })
        .collect()
}

/// Whether `u` acts as a product of single-qubit gates.
pub fn is_local(u: &ComplexMatrix) -> bool {
    u.dim() == 4 && kron_factor(u.as_dmatrix()).is_some()
}

/// `exp(i (a XX + b YY + c ZZ))`.
pub fn canonical_gate(a: f64, b: f64, c: f64) -> ComplexMatrix {
    use crate::linalg::{hermitian_function, pauli};
    let h = &(&pauli::x().kron(&pauli::x()).scale(a) + &pauli::y().kron(&pauli::y()).scale(b))
        + &pauli::z().kron(&pauli::z()).scale(c);
    // exp(iH) = cos(H) + i sin(H) for Hermitian H
    let cos = hermitian_function(&h, f64::cos).expect("finite");
    let sin = hermitian_function(&h, f64::sin).expect("finite");
    &cos + &sin.scale_complex(C64::new(0.0, 1.0))
}
