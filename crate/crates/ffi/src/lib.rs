// Copyright 2026 The povmsim Developers
// SPDX-License-Identifier: Apache-2.0

//! C ABI for povmsim.
//!
//! Objects cross the boundary as opaque handles created by `*_new`/`*_from_*`
//! functions and released by the matching `*_free`. Every fallible call
//! returns a [`PovmsimStatus`]; on failure [`povmsim_last_error`] describes
//! the problem for the calling thread. Complex numbers are passed as
//! interleaved `(re, im)` pairs of doubles, matrices in row-major order.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use povmsim::device::{compare_schemes, ComparisonConfig, NoiseModel};
use povmsim::naimark::{naimark_dilation, DilationMode, NaimarkDilation};
use povmsim::povm::born_probabilities;
use povmsim::simulation::{postselection_scheme, sample_postselection, PostselectionScheme};
use povmsim::tomography::operational_distance;
use povmsim::{fixtures, io, ComplexMatrix, Error, Povm, QuantumState, C64};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PovmsimStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    InvariantViolation = 4,
    Precondition = 5,
    Decomposition = 6,
    Format = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// Dilation variants, mirroring `DilationMode`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PovmsimDilationMode {
    Abstract = 0,
    QubitRegister = 1,
}

/// Opaque measurement handle.
pub struct PovmsimPovm(Povm);

/// Opaque postselection scheme handle.
pub struct PovmsimScheme(PostselectionScheme);

/// Opaque Naimark dilation handle.
pub struct PovmsimDilation(NaimarkDilation);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).expect("nul bytes removed"));
}

struct Failure(PovmsimStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::DimensionMismatch { .. } | Error::NotSquare { .. } => PovmsimStatus::DimensionMismatch,
            Error::Invariant { .. } => PovmsimStatus::InvariantViolation,
            Error::Precondition(_) => PovmsimStatus::Precondition,
            Error::Decomposition { .. } => PovmsimStatus::Decomposition,
            Error::Format(_) | Error::Json(_) | Error::Io(_) => PovmsimStatus::Format,
            _ => PovmsimStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn fail(status: PovmsimStatus, msg: impl Into<String>) -> Failure {
    Failure(status, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PovmsimStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            PovmsimStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            PovmsimStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| fail(PovmsimStatus::NullPointer, format!("{what} is null")))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(fail(PovmsimStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(PovmsimStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn complexes(p: *const f64, count: usize, what: &str) -> Result<Vec<C64>, Failure> {
    if p.is_null() {
        return Err(fail(PovmsimStatus::NullPointer, format!("{what} is null")));
    }
    let raw = std::slice::from_raw_parts(p, 2 * count);
    Ok(raw.chunks_exact(2).map(|c| C64::new(c[0], c[1])).collect())
}

unsafe fn write_out<T: Copy>(out: *mut T, len: usize, values: &[T]) -> Result<(), Failure> {
    if out.is_null() {
        return Err(fail(PovmsimStatus::NullPointer, "output buffer is null"));
    }
    if len < values.len() {
        return Err(fail(PovmsimStatus::BufferTooSmall, format!("need {} entries, got {len}", values.len())));
    }
    std::ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    Ok(())
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(fail(PovmsimStatus::NullPointer, "output handle is null"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn put_scalar<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(fail(PovmsimStatus::NullPointer, "output pointer is null"));
    }
    *out = value;
    Ok(())
}

/// Message for the last failed call on this thread, empty after a success.
/// Valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn povmsim_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn povmsim_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads a shipped fixture (`tetrahedral`, `trine`, `random4`, `trivial`).
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn povmsim_povm_from_fixture(name: *const c_char, out: *mut *mut PovmsimPovm) -> PovmsimStatus {
    guard(|| {
        let name = c_str(name, "name")?;
        put(out, PovmsimPovm(fixtures::by_name(name)?))
    })
}

/// Parses a measurement JSON document.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn povmsim_povm_from_json(json: *const c_char, out: *mut *mut PovmsimPovm) -> PovmsimStatus {
    guard(|| {
        let text = c_str(json, "json")?;
        put(out, PovmsimPovm(io::povm_from_json(text)?))
    })
}

/// Builds a measurement from `outcomes` effects of size `dim x dim`, stored
/// one after the other as `outcomes * dim * dim` interleaved complex numbers.
///
/// # Safety
/// `effects` must point to `2 * outcomes * dim * dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn povmsim_povm_from_effects(
    dim: usize,
    outcomes: usize,
    effects: *const f64,
    out: *mut *mut PovmsimPovm,
) -> PovmsimStatus {
    guard(|| {
        if dim == 0 || outcomes == 0 {
            return Err(fail(PovmsimStatus::InvalidArgument, "dim and outcomes must be positive"));
        }
        let entries = complexes(effects, outcomes * dim * dim, "effects")?;
        let matrices = entries
            .chunks_exact(dim * dim)
            .map(|c| ComplexMatrix::from_row_major(dim, c))
            .collect::<Result<Vec<_>, _>>()?;
        put(out, PovmsimPovm(Povm::new(matrices)?))
    })
}

/// # Safety
/// `povm` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn povmsim_povm_free(povm: *mut PovmsimPovm) {
    if !povm.is_null() {
        drop(Box::from_raw(povm));
    }
}

/// Hilbert-space dimension, or 0 for a null handle.
///
/// # Safety
/// `povm` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn povmsim_povm_dim(povm: *const PovmsimPovm) -> usize {
    povm.as_ref().map_or(0, |p| p.0.dim())
}

/// Number of outcomes, or 0 for a null handle.
///
/// # Safety
/// `povm` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn povmsim_povm_outcomes(povm: *const PovmsimPovm) -> usize {
    povm.as_ref().map_or(0, |p| p.0.outcomes())
}

/// Born probabilities of the pure state `state` (`dim` complex amplitudes,
/// normalized internally) into `out[0..outcomes]`.
///
/// # Safety
/// `state` must hold `2 * dim` doubles and `out` at least `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn povmsim_born_probabilities(
    povm: *const PovmsimPovm,
    state: *const f64,
    dim: usize,
    out: *mut f64,
    out_len: usize,
) -> PovmsimStatus {
    guard(|| {
        let povm = deref(povm, "povm")?;
        let s = QuantumState::pure_normalized(&complexes(state, dim, "state")?)?;
        write_out(out, out_len, &born_probabilities(&s, &povm.0)?)
    })
}

/// Operational distance between two measurements on the same space.
///
/// # Safety
/// Both handles must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn povmsim_operational_distance(
    a: *const PovmsimPovm,
    b: *const PovmsimPovm,
    out: *mut f64,
) -> PovmsimStatus {
    guard(|| {
        let (a, b) = (deref(a, "a")?, deref(b, "b")?);
        put_scalar(out, operational_distance(a.0.effects(), b.0.effects())?)
    })
}

/// Postselection scheme with success probability `1/d`.
///
/// # Safety
/// `povm` must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn povmsim_scheme_new(povm: *const PovmsimPovm, out: *mut *mut PovmsimScheme) -> PovmsimStatus {
    guard(|| {
        let povm = deref(povm, "povm")?;
        put(out, PovmsimScheme(postselection_scheme(&povm.0)?))
    })
}

/// # Safety
/// `scheme` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn povmsim_scheme_free(scheme: *mut PovmsimScheme) {
    if !scheme.is_null() {
        drop(Box::from_raw(scheme));
    }
}

/// Success probability of the scheme, or 0 for a null handle.
///
/// # Safety
/// `scheme` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn povmsim_scheme_success_probability(scheme: *const PovmsimScheme) -> f64 {
    scheme.as_ref().map_or(0.0, |s| s.0.success_probability())
}

/// Number of binary projective components of the scheme.
///
/// # Safety
/// `scheme` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn povmsim_scheme_components(scheme: *const PovmsimScheme) -> usize {
    scheme.as_ref().map_or(0, |s| s.0.components().len())
}

/// Runs `shots` rounds of the scheme on a pure state and writes the counts
/// of the `outcomes + 1` results (failure last) into `counts`.
///
/// # Safety
/// `state` must hold `2 * dim` doubles and `counts` at least `counts_len`
/// integers.
#[no_mangle]
pub unsafe extern "C" fn povmsim_scheme_sample(
    scheme: *const PovmsimScheme,
    state: *const f64,
    dim: usize,
    shots: u64,
    seed: u64,
    counts: *mut u64,
    counts_len: usize,
) -> PovmsimStatus {
    guard(|| {
        let scheme = deref(scheme, "scheme")?;
        let s = QuantumState::pure_normalized(&complexes(state, dim, "state")?)?;
        let record = sample_postselection(&scheme.0, &s, shots, seed)?;
        write_out(counts, counts_len, &record.counts())
    })
}

/// Naimark dilation of a measurement.
///
/// # Safety
/// `povm` must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn povmsim_dilation_new(
    povm: *const PovmsimPovm,
    mode: PovmsimDilationMode,
    out: *mut *mut PovmsimDilation,
) -> PovmsimStatus {
    guard(|| {
        let povm = deref(povm, "povm")?;
        let mode = match mode {
            PovmsimDilationMode::Abstract => DilationMode::Abstract,
            PovmsimDilationMode::QubitRegister => DilationMode::QubitRegister,
        };
        put(out, PovmsimDilation(naimark_dilation(&povm.0, mode)?))
    })
}

/// # Safety
/// `dilation` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn povmsim_dilation_free(dilation: *mut PovmsimDilation) {
    if !dilation.is_null() {
        drop(Box::from_raw(dilation));
    }
}

/// Dimension of the dilated space, or 0 for a null handle.
///
/// # Safety
/// `dilation` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn povmsim_dilation_extended_dim(dilation: *const PovmsimDilation) -> usize {
    dilation.as_ref().map_or(0, |d| d.0.extended_dim())
}

/// Copies the dilation unitary as `2 * D * D` doubles, row-major and
/// interleaved.
///
/// # Safety
/// `out` must hold at least `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn povmsim_dilation_unitary(
    dilation: *const PovmsimDilation,
    out: *mut f64,
    out_len: usize,
) -> PovmsimStatus {
    guard(|| {
        let u = deref(dilation, "dilation")?.0.unitary();
        let n = u.dim();
        let flat: Vec<f64> = (0..n * n)
            .flat_map(|k| {
                let z = u.get(k / n, k % n);
                [z.re, z.im]
            })
            .collect();
        write_out(out, out_len, &flat)
    })
}

/// Noisy-device tomography of both realizations of a qubit measurement.
/// Writes the operational distances of the postselection and Naimark
/// reconstructions to the target.
///
/// # Safety
/// `povm` must be live and both outputs valid.
#[no_mangle]
pub unsafe extern "C" fn povmsim_compare(
    povm: *const PovmsimPovm,
    cnot_depolarizing: f64,
    su2_depolarizing: f64,
    readout_bias: f64,
    shot_cap: u64,
    seed: u64,
    out_postselection: *mut f64,
    out_naimark: *mut f64,
) -> PovmsimStatus {
    guard(|| {
        let povm = deref(povm, "povm")?;
        let noise = NoiseModel::new(cnot_depolarizing, su2_depolarizing, readout_bias)?;
        let config = ComparisonConfig { noise, shot_cap, seed, ..Default::default() };
        let c = compare_schemes(&povm.0, &config)?;
        put_scalar(out_postselection, c.postselection.distance)?;
        put_scalar(out_naimark, c.naimark.distance)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    fn last_error() -> String {
        unsafe { CStr::from_ptr(povmsim_last_error()) }.to_string_lossy().into_owned()
    }

    #[test]
    fn unknown_fixture_sets_message() {
        let mut p = ptr::null_mut();
        let status = unsafe { povmsim_povm_from_fixture(c"nope".as_ptr(), &mut p) };
        assert_eq!(status, PovmsimStatus::InvalidArgument);
        assert!(p.is_null());
        assert!(last_error().contains("tetrahedral"));
    }

    #[test]
    fn null_arguments() {
        let mut p = ptr::null_mut();
        assert_eq!(unsafe { povmsim_povm_from_fixture(ptr::null(), &mut p) }, PovmsimStatus::NullPointer);
        assert_eq!(unsafe { povmsim_povm_dim(ptr::null()) }, 0);
        unsafe { povmsim_povm_free(ptr::null_mut()) };
    }
}
