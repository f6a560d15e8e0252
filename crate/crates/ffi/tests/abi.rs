// Copyright 2026 The povmsim Developers
// SPDX-License-Identifier: Apache-2.0

use std::ffi::CStr;
use std::ptr;

use povmsim_ffi::*;

fn fixture(name: &CStr) -> *mut PovmsimPovm {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { povmsim_povm_from_fixture(name.as_ptr(), &mut p) }, PovmsimStatus::Ok);
    p
}

fn error() -> String {
    unsafe { CStr::from_ptr(povmsim_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn born_probabilities_of_tetrahedral() {
    let p = fixture(c"tetrahedral");
    assert_eq!(unsafe { povmsim_povm_dim(p) }, 2);
    assert_eq!(unsafe { povmsim_povm_outcomes(p) }, 4);
    let zero = [1.0, 0.0, 0.0, 0.0];
    let mut probs = [0.0; 4];
    assert_eq!(unsafe { povmsim_born_probabilities(p, zero.as_ptr(), 2, probs.as_mut_ptr(), 4) }, PovmsimStatus::Ok);
    let want = [0.5, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0];
    for (a, b) in probs.iter().zip(want) {
        assert!((a - b).abs() < 1e-12);
    }
    let status = unsafe { povmsim_born_probabilities(p, zero.as_ptr(), 2, probs.as_mut_ptr(), 3) };
    assert_eq!(status, PovmsimStatus::BufferTooSmall);
    assert!(error().contains("need 4"));
    unsafe { povmsim_povm_free(p) };
}

#[test]
fn scheme_samples_with_half_success() {
    let p = fixture(c"trine");
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { povmsim_scheme_new(p, &mut s) }, PovmsimStatus::Ok);
    assert_eq!(unsafe { povmsim_scheme_success_probability(s) }, 0.5);
    assert_eq!(unsafe { povmsim_scheme_components(s) }, 3);
    let plus = [1.0, 0.0, 1.0, 0.0];
    let mut counts = [0u64; 4];
    let shots = 200_000;
    let status = unsafe { povmsim_scheme_sample(s, plus.as_ptr(), 2, shots, 3, counts.as_mut_ptr(), 4) };
    assert_eq!(status, PovmsimStatus::Ok);
    assert_eq!(counts.iter().sum::<u64>(), shots);
    let rate = 1.0 - counts[3] as f64 / shots as f64;
    assert!((rate - 0.5).abs() < 5.0 * (0.25 / shots as f64).sqrt());
    unsafe {
        povmsim_scheme_free(s);
        povmsim_povm_free(p);
    }
}

#[test]
fn dilation_unitary_is_unitary() {
    let p = fixture(c"trine");
    let mut d = ptr::null_mut();
    let status = unsafe { povmsim_dilation_new(p, PovmsimDilationMode::QubitRegister, &mut d) };
    assert_eq!(status, PovmsimStatus::Ok);
    let n = unsafe { povmsim_dilation_extended_dim(d) };
    assert_eq!(n, 4);
    let mut buf = vec![0.0; 2 * n * n];
    assert_eq!(unsafe { povmsim_dilation_unitary(d, buf.as_mut_ptr(), buf.len()) }, PovmsimStatus::Ok);
    // columns are orthonormal
    for a in 0..n {
        for b in 0..n {
            let (mut re, mut im) = (0.0, 0.0);
            for r in 0..n {
                let (xr, xi) = (buf[2 * (r * n + a)], buf[2 * (r * n + a) + 1]);
                let (yr, yi) = (buf[2 * (r * n + b)], buf[2 * (r * n + b) + 1]);
                re += xr * yr + xi * yi;
                im += xr * yi - xi * yr;
            }
            let want = if a == b { 1.0 } else { 0.0 };
            assert!((re - want).abs() < 1e-9 && im.abs() < 1e-9);
        }
    }
    unsafe {
        povmsim_dilation_free(d);
        povmsim_povm_free(p);
    }
}

#[test]
fn effects_roundtrip_and_distance() {
    // computational basis
    let effects = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0];
    let mut a = ptr::null_mut();
    assert_eq!(unsafe { povmsim_povm_from_effects(2, 2, effects.as_ptr(), &mut a) }, PovmsimStatus::Ok);
    let mut b = ptr::null_mut();
    let json =
        c"{\"dim\": 2, \"effects\": [[[[0.5,0],[0.5,0]],[[0.5,0],[0.5,0]]], [[[0.5,0],[-0.5,0]],[[-0.5,0],[0.5,0]]]]}";
    assert_eq!(unsafe { povmsim_povm_from_json(json.as_ptr(), &mut b) }, PovmsimStatus::Ok);
    let mut dist = -1.0;
    assert_eq!(unsafe { povmsim_operational_distance(a, b, &mut dist) }, PovmsimStatus::Ok);
    // Z versus X basis: || |0><0| - |+><+| || = 1/sqrt(2)
    assert!((dist - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    unsafe {
        povmsim_povm_free(a);
        povmsim_povm_free(b);
    }
}

#[test]
fn invalid_effects_report_invariant() {
    let effects = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5, 0.0];
    let mut a = ptr::null_mut();
    let status = unsafe { povmsim_povm_from_effects(2, 1, effects.as_ptr(), &mut a) };
    assert_eq!(status, PovmsimStatus::InvariantViolation);
    assert!(a.is_null());
    assert!(!error().is_empty());
    let bad = c"{not json";
    assert_eq!(unsafe { povmsim_povm_from_json(bad.as_ptr(), &mut a) }, PovmsimStatus::Format);
}

#[test]
fn compare_noiseless_is_accurate() {
    let p = fixture(c"tetrahedral");
    let (mut ps, mut nm) = (0.0, 0.0);
    let status = unsafe { povmsim_compare(p, 0.0, 0.0, 0.0, 100_000, 1, &mut ps, &mut nm) };
    assert_eq!(status, PovmsimStatus::Ok);
    assert!(ps < 0.02 && nm < 0.02, "{ps} {nm}");
    let status = unsafe { povmsim_compare(p, 2.0, 0.0, 0.0, 10, 1, &mut ps, &mut nm) };
    assert_eq!(status, PovmsimStatus::InvalidArgument);
    unsafe { povmsim_povm_free(p) };
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(povmsim_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
