//! C ABI over the `toledo` library.
//!
//! Every function returns a [`ToledoStatus`]; on failure the message is
//! available from [`toledo_last_error`] on the same thread. Representations
//! cross the boundary as opaque [`ToledoRepresentation`] handles built from
//! the JSON file format accepted by the command-line tool.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use toledo::cli::RepresentationFile;
use toledo::cover::rot;
use toledo::lagrangian::{kashiwara_auto, Lagrangian};
use toledo::numkernel::RealMatrix;
use toledo::surface::{self, Representation, ToledoOptions};
use toledo::symplectic::{check_symplectic, KappaClass};
use toledo::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToledoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Malformed or mathematically invalid input.
    InvalidInput = 3,
    /// A numerical procedure could not certify its answer.
    NumericFailure = 4,
    Panic = 5,
}

/// Opaque handle to a validated representation.
pub struct ToledoRepresentation(Representation);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> ToledoStatus {
    if e.is_input_error() {
        ToledoStatus::InvalidInput
    } else {
        ToledoStatus::NumericFailure
    }
}

fn guard(f: impl FnOnce() -> Result<(), (ToledoStatus, String)>) -> ToledoStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ToledoStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            ToledoStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (ToledoStatus, String) {
    (status_of(&e), e.to_string())
}

fn null() -> (ToledoStatus, String) {
    (ToledoStatus::NullPointer, "null pointer argument".into())
}

unsafe fn square(data: *const f64, n: usize) -> Result<RealMatrix, (ToledoStatus, String)> {
    if data.is_null() {
        return Err(null());
    }
    let k = 2 * n;
    // SAFETY: caller promises 4n² readable doubles
    let s = unsafe { std::slice::from_raw_parts(data, k * k) };
    Ok(RealMatrix::from_row_slice(k, k, s))
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn toledo_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn toledo_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parse a representation from its JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
/// The handle written to `out` must be released with
/// [`toledo_representation_free`].
#[no_mangle]
pub unsafe extern "C" fn toledo_representation_from_json(
    json: *const c_char,
    out: *mut *mut ToledoRepresentation,
) -> ToledoStatus {
    guard(|| {
        if json.is_null() || out.is_null() {
            return Err(null());
        }
        // SAFETY: checked non-null; caller guarantees termination
        let text = unsafe { CStr::from_ptr(json) }
            .to_str()
            .map_err(|e| (ToledoStatus::InvalidUtf8, e.to_string()))?;
        let rep = RepresentationFile::parse(text).and_then(|f| f.into_representation()).map_err(lib_err)?;
        // SAFETY: checked non-null
        unsafe { *out = Box::into_raw(Box::new(ToledoRepresentation(rep))) };
        Ok(())
    })
}

/// # Safety
/// `rep` must be NULL or a handle from [`toledo_representation_from_json`]
/// not yet freed.
#[no_mangle]
pub unsafe extern "C" fn toledo_representation_free(rep: *mut ToledoRepresentation) {
    if !rep.is_null() {
        // SAFETY: handle came from Box::into_raw
        drop(unsafe { Box::from_raw(rep) });
    }
}

/// Rank n of the target group Sp(2n,R), or 0 for NULL.
///
/// # Safety
/// `rep` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn toledo_representation_rank(rep: *const ToledoRepresentation) -> usize {
    // SAFETY: caller guarantees a live handle
    unsafe { rep.as_ref() }.map_or(0, |r| r.0.n)
}

/// Toledo invariant for the class of weight `kappa_w`.
///
/// # Safety
/// `rep` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn toledo_invariant(
    rep: *const ToledoRepresentation,
    kappa_w: i32,
    depth: u32,
    out: *mut f64,
) -> ToledoStatus {
    guard(|| {
        // SAFETY: caller guarantees a live handle
        let rep = unsafe { rep.as_ref() }.ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        let k = KappaClass::new(kappa_w).map_err(lib_err)?;
        let opts = ToledoOptions { depth, ..Default::default() };
        let t = surface::toledo(&rep.0, k, &opts).map_err(lib_err)?;
        // SAFETY: checked non-null
        unsafe { *out = t.value };
        Ok(())
    })
}

/// Rotation number mod 1 of a 2n×2n symplectic matrix given row-major.
///
/// # Safety
/// `matrix` must point to 4n² doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn toledo_rot(matrix: *const f64, n: usize, kappa_w: i32, out: *mut f64) -> ToledoStatus {
    guard(|| {
        if n == 0 || out.is_null() {
            return Err(if n == 0 { (ToledoStatus::InvalidInput, "n must be positive".into()) } else { null() });
        }
        // SAFETY: forwarded caller contract
        let m = unsafe { square(matrix, n) }?;
        let scale = m.amax().max(1.0);
        let g = check_symplectic(&m, 1e-8 * scale * scale).map_err(lib_err)?;
        let k = KappaClass::new(kappa_w).map_err(lib_err)?;
        let r = rot(&g, k).map_err(lib_err)?;
        // SAFETY: checked non-null
        unsafe { *out = r.mod1 };
        Ok(())
    })
}

/// Kashiwara–Maslov index of three Lagrangians, each a 2n×n row-major
/// basis. Writes 2β, which is an integer.
///
/// # Safety
/// Each basis pointer must reference 2n² doubles and `twice_beta` be writable.
#[no_mangle]
pub unsafe extern "C" fn toledo_maslov(
    l1: *const f64,
    l2: *const f64,
    l3: *const f64,
    n: usize,
    twice_beta: *mut i64,
) -> ToledoStatus {
    guard(|| {
        if l1.is_null() || l2.is_null() || l3.is_null() || twice_beta.is_null() {
            return Err(null());
        }
        if n == 0 {
            return Err((ToledoStatus::InvalidInput, "n must be positive".into()));
        }
        let lag = |p: *const f64| {
            // SAFETY: caller promises 2n² readable doubles
            let s = unsafe { std::slice::from_raw_parts(p, 2 * n * n) };
            Lagrangian::new(RealMatrix::from_row_slice(2 * n, n, s), 1e-9).map_err(lib_err)
        };
        let v = kashiwara_auto(&lag(l1)?, &lag(l2)?, &lag(l3)?).map_err(lib_err)?;
        // SAFETY: checked non-null
        unsafe { *twice_beta = v.tau };
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_codes_are_stable() {
        assert_eq!(ToledoStatus::Ok as i32, 0);
        assert_eq!(ToledoStatus::InvalidInput as i32, 3);
        assert_eq!(ToledoStatus::Panic as i32, 5);
    }

    #[test]
    fn version_is_terminated() {
        let v = unsafe { CStr::from_ptr(toledo_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}
