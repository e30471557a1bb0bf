//! C interface to geoshot: build a lattice model, solve its ground state and compare
//! measurement partitionings on it.
//!
//! Handles are opaque and owned by the caller, who releases them with the matching
//! `*_free` function. Every fallible call returns a [`GsStatus`]; the message of the most
//! recent failure on the calling thread is available from [`gs_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use geoshot::experiment::LatticeConfig;
use geoshot::lattice::{build_lattice, Model, ModelConfig};
use geoshot::metrics::{partition_cost, relative_complexity};
use geoshot::partition::{build_partitioning, PartitionKind};
use geoshot::spectral::{ground_state, EigenSolution};
use geoshot::Error;
use serde::Deserialize;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Config = 4,
    Partition = 5,
    Solver = 6,
    Undefined = 7,
    Internal = 8,
    Panic = 9,
}

/// A Hamiltonian on a lattice.
pub struct GsModel {
    model: Model,
}

/// Lowest eigenpairs of a model.
pub struct GsState {
    solution: EigenSolution,
    n_qubits: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> GsStatus {
    match e {
        Error::Config(_) | Error::Parse(_) | Error::Json(_) | Error::Lattice(_) | Error::Model(_) => GsStatus::Config,
        Error::Partition(_) => GsStatus::Partition,
        Error::Solver(_) => GsStatus::Solver,
        Error::Undefined(_) => GsStatus::Undefined,
        Error::InvalidArgument(_) | Error::DimensionMismatch { .. } | Error::TooManyQubits(..) => {
            GsStatus::InvalidArgument
        }
        _ => GsStatus::Internal,
    }
}

struct Fail(GsStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> GsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GsStatus::Ok,
        Ok(Err(Fail(s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("panic inside geoshot");
            GsStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(GsStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(GsStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| Fail(GsStatus::NullPointer, format!("{what} is null")))
}

fn out_ptr<T>(p: *mut T, what: &str) -> Result<(), Fail> {
    if p.is_null() {
        Err(Fail(GsStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelSpec {
    model: ModelConfig,
    lattice: LatticeConfig,
}

/// Builds a model from JSON such as
/// `{"model": {"model": "tfim", "j": 1, "h": 1}, "lattice": {"nx": 4, "ny": 3}}`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gs_model_from_json(json: *const c_char, out: *mut *mut GsModel) -> GsStatus {
    guard(|| {
        out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let text = str_arg(json, "json")?;
        let spec: ModelSpec = serde_json::from_str(text).map_err(|e| Fail(GsStatus::Config, e.to_string()))?;
        let l = spec.lattice;
        let model = spec.model.build(&build_lattice(l.nx, l.ny, l.layers, l.periodic)?)?;
        *out = Box::into_raw(Box::new(GsModel { model }));
        Ok(())
    })
}

/// # Safety
/// `model` must come from [`gs_model_from_json`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gs_model_free(model: *mut GsModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of qubits, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gs_model_n_qubits(model: *const GsModel) -> usize {
    model.as_ref().map_or(0, |m| m.model.n_qubits())
}

/// The Hamiltonian in Pauli text format, one `coefficient STRING` per line. Release the
/// string with [`gs_string_free`].
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gs_model_hamiltonian_text(model: *const GsModel, out: *mut *mut c_char) -> GsStatus {
    guard(|| {
        out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let m = handle(model, "model")?;
        let s = CString::new(m.model.hamiltonian.to_text()).map_err(|e| Fail(GsStatus::Internal, e.to_string()))?;
        *out = s.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Solves for the ground state.
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gs_ground_state(model: *const GsModel, out: *mut *mut GsState) -> GsStatus {
    guard(|| {
        out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let m = handle(model, "model")?;
        let solution = ground_state(&m.model.hamiltonian, 2)?;
        *out = Box::into_raw(Box::new(GsState {
            solution,
            n_qubits: m.model.n_qubits(),
        }));
        Ok(())
    })
}

/// # Safety
/// `state` must come from [`gs_ground_state`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gs_state_free(state: *mut GsState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Ground energy, spectral gap (NaN when unavailable) and degeneracy flag.
///
/// # Safety
/// `state` must be a live handle; each output pointer may be null to skip it.
#[no_mangle]
pub unsafe extern "C" fn gs_state_info(
    state: *const GsState,
    energy: *mut f64,
    gap: *mut f64,
    degenerate: *mut bool,
) -> GsStatus {
    guard(|| {
        let s = handle(state, "state")?;
        if !energy.is_null() {
            *energy = s.solution.ground_energy();
        }
        if !gap.is_null() {
            *gap = s.solution.gap.unwrap_or(f64::NAN);
        }
        if !degenerate.is_null() {
            *degenerate = s.solution.degenerate;
        }
        Ok(())
    })
}

fn partition(m: &Model, kind: &str) -> Result<geoshot::partition::Partitioning, Fail> {
    let kind: PartitionKind = kind.parse()?;
    Ok(build_partitioning(m, kind)?)
}

fn same_model(m: &GsModel, s: &GsState) -> Result<(), Fail> {
    if m.model.n_qubits() != s.n_qubits {
        return Err(Fail(
            GsStatus::InvalidArgument,
            format!("state has {} qubits, model {}", s.n_qubits, m.model.n_qubits()),
        ));
    }
    Ok(())
}

/// `cost(kind_a) / cost(kind_b)` on the ground state, where the cost of a partitioning
/// is `(Σ_b √Var H_b)²`. Kinds use the CLI spelling: `pauli`, `geo1d:2`, `geo2d:2x2`,
/// `two_local`, `whole`.
///
/// # Safety
/// Handles must be live, strings NUL-terminated and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn gs_relative_complexity(
    model: *const GsModel,
    state: *const GsState,
    kind_a: *const c_char,
    kind_b: *const c_char,
    out: *mut f64,
) -> GsStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let (m, s) = (handle(model, "model")?, handle(state, "state")?);
        same_model(m, s)?;
        let a = partition(&m.model, str_arg(kind_a, "kind_a")?)?;
        let b = partition(&m.model, str_arg(kind_b, "kind_b")?)?;
        *out = relative_complexity(&a, &b, s.solution.ground())?.g;
        Ok(())
    })
}

/// Absolute cost `(Σ_b √Var H_b)²` of one partitioning on the ground state.
///
/// # Safety
/// Handles must be live, `kind` NUL-terminated and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn gs_partition_cost(
    model: *const GsModel,
    state: *const GsState,
    kind: *const c_char,
    out: *mut f64,
) -> GsStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let (m, s) = (handle(model, "model")?, handle(state, "state")?);
        same_model(m, s)?;
        let p = partition(&m.model, str_arg(kind, "kind")?)?;
        *out = partition_cost(&p, s.solution.ground())?;
        Ok(())
    })
}

/// Copies the calling thread's last error message into `buf` (truncated, always
/// NUL-terminated when `len > 0`) and returns the length needed including the NUL.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn gs_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len() + 1
    })
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
