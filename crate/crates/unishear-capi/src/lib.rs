//! C ABI for the unishear library: opaque handles, integer error codes,
//! caller-owned buffers.  All images are row-major N*N double arrays on
//! the unit torus; all functions are thread-compatible (handles are
//! immutable after construction and may be shared across threads).

use std::ffi::{c_char, c_double, c_int, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use unishear::model::{make_mask, project_known, MaskSpec};
use unishear::recover::{inpaint_l1, SolverConfig};
use unishear::system::Preset;
use unishear::transform::{build_digital_system, tiling_residual, DigitalSystem};
use unishear::Error;

/// Status codes returned by every fallible entry point.
#[repr(C)]
pub enum UnishearStatus {
    UnishearOk = 0,
    UnishearInvalidArgument = 1,
    UnishearBadConfig = 2,
    UnishearNonConvergence = 3,
    UnishearInternal = 4,
}

use UnishearStatus::*;

/// Opaque frame-system handle.
pub struct UnishearSystem {
    sys: DigitalSystem,
    scales: usize,
}

fn status_of(e: &Error) -> UnishearStatus {
    match e {
        Error::NonConvergence { .. } => UnishearNonConvergence,
        Error::Io(_) => UnishearInternal,
        _ => UnishearBadConfig,
    }
}

fn guard<F: FnOnce() -> UnishearStatus>(f: F) -> UnishearStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => UnishearInternal,
    }
}

/// Build a frame system.  `preset` is `"wavelet"` or `"alpha<value>"`
/// (for example `"alpha1"`); `n` is the grid size (even power of two);
/// `scales` is the scale count J.  On success writes a handle the caller
/// must free with `unishear_system_free`.
///
/// # Safety
/// `preset` must be a valid NUL-terminated string and `out` a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn unishear_system_new(
    preset: *const c_char,
    n: usize,
    scales: usize,
    out: *mut *mut UnishearSystem,
) -> UnishearStatus {
    if preset.is_null() || out.is_null() {
        return UnishearInvalidArgument;
    }
    guard(|| {
        let label = match CStr::from_ptr(preset).to_str() {
            Ok(s) => s,
            Err(_) => return UnishearInvalidArgument,
        };
        let preset = if label == "wavelet" {
            Preset::Wavelet
        } else if let Some(a) = label.strip_prefix("alpha") {
            match a.parse() {
                Ok(v) => Preset::Alpha(v),
                Err(_) => return UnishearInvalidArgument,
            }
        } else {
            return UnishearInvalidArgument;
        };
        let seq = preset.sequence(scales);
        match build_digital_system(&seq, n, scales) {
            Ok(sys) => {
                *out = Box::into_raw(Box::new(UnishearSystem { sys, scales }));
                UnishearOk
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Free a handle created by `unishear_system_new`.  NULL is a no-op.
///
/// # Safety
/// `handle` must be NULL or a pointer returned by `unishear_system_new`
/// that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn unishear_system_free(handle: *mut UnishearSystem) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Grid size N of the handle, or 0 for NULL.
///
/// # Safety
/// `handle` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn unishear_system_n(handle: *const UnishearSystem) -> usize {
    handle.as_ref().map_or(0, |h| h.sys.grid.n)
}

/// Number of frame bands, or 0 for NULL.
///
/// # Safety
/// `handle` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn unishear_system_bands(handle: *const UnishearSystem) -> usize {
    handle.as_ref().map_or(0, |h| h.sys.bands.len())
}

/// Scale count J of the handle, or 0 for NULL.
///
/// # Safety
/// `handle` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn unishear_system_scales(handle: *const UnishearSystem) -> usize {
    handle.as_ref().map_or(0, |h| h.scales)
}

/// Max deviation of the squared band weights from the exact partition of
/// unity, or NaN for NULL.
///
/// # Safety
/// `handle` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn unishear_tiling_residual(handle: *const UnishearSystem) -> c_double {
    handle.as_ref().map_or(f64::NAN, |h| tiling_residual(&h.sys))
}

/// l1-analysis norm of an N*N image into `out`.
///
/// # Safety
/// `image` must point to N*N doubles and `out` to one double.
#[no_mangle]
pub unsafe extern "C" fn unishear_l1_analysis_norm(
    handle: *const UnishearSystem,
    image: *const c_double,
    out: *mut c_double,
) -> UnishearStatus {
    let Some(h) = handle.as_ref() else {
        return UnishearInvalidArgument;
    };
    if image.is_null() || out.is_null() {
        return UnishearInvalidArgument;
    }
    guard(|| {
        let n = h.sys.grid.n;
        let img = std::slice::from_raw_parts(image, n * n);
        match unishear::transform::l1_analysis_norm(img, &h.sys) {
            Ok(v) => {
                *out = v;
                UnishearOk
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Analyze then synthesize an image (round trip through the frame);
/// useful as a self-test of the Parseval property from C.
///
/// # Safety
/// `image` and `out` must each point to N*N doubles.
#[no_mangle]
pub unsafe extern "C" fn unishear_round_trip(
    handle: *const UnishearSystem,
    image: *const c_double,
    out: *mut c_double,
) -> UnishearStatus {
    let Some(h) = handle.as_ref() else {
        return UnishearInvalidArgument;
    };
    if image.is_null() || out.is_null() {
        return UnishearInvalidArgument;
    }
    guard(|| {
        let n = h.sys.grid.n;
        let img = std::slice::from_raw_parts(image, n * n);
        let result = h.sys.analyze(img).and_then(|c| h.sys.synthesize(&c));
        match result {
            Ok(v) => {
                ptr::copy_nonoverlapping(v.as_ptr(), out, n * n);
                UnishearOk
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Inpaint an image whose vertical strip |x1| <= h (continuum units,
/// domain [-1/2, 1/2)) is missing.  `use_splitting` selects the exact
/// splitting solver over the shrinkage path.  Writes the recovered image
/// to `out` and, when non-NULL, the attained objective to
/// `objective_out`.  Returns `UnishearNonConvergence` when the iteration
/// limit was hit; `out` is still written in that case.
///
/// # Safety
/// `image` and `out` must each point to N*N doubles; `objective_out`
/// must be NULL or point to one double.
#[no_mangle]
pub unsafe extern "C" fn unishear_inpaint(
    handle: *const UnishearSystem,
    image: *const c_double,
    h: c_double,
    use_splitting: c_int,
    out: *mut c_double,
    objective_out: *mut c_double,
) -> UnishearStatus {
    let Some(hd) = handle.as_ref() else {
        return UnishearInvalidArgument;
    };
    if image.is_null() || out.is_null() {
        return UnishearInvalidArgument;
    }
    guard(|| {
        let n = hd.sys.grid.n;
        let img = std::slice::from_raw_parts(image, n * n);
        let mask = if h == 0.0 {
            Ok(MaskSpec {
                h: 0.0,
                n,
                strip: vec![],
            })
        } else {
            make_mask(h, n)
        };
        let mask = match mask {
            Ok(m) => m,
            Err(e) => return status_of(&e),
        };
        let corrupted = project_known(img, &mask);
        let config = if use_splitting != 0 {
            SolverConfig::splitting()
        } else {
            SolverConfig::shrinkage()
        };
        match inpaint_l1(&corrupted, &mask, &hd.sys, &config) {
            Ok(rep) => {
                ptr::copy_nonoverlapping(rep.image.as_ptr(), out, n * n);
                if !objective_out.is_null() {
                    *objective_out = rep.objective;
                }
                if rep.converged {
                    UnishearOk
                } else {
                    UnishearNonConvergence
                }
            }
            Err(e) => status_of(&e),
        }
    })
}
