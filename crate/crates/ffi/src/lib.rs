//! C ABI over `solvlab`.
//!
//! Every function returns a status: `SOLVLAB_OK` (0), a library error code
//! (see `solvlab::Error::code`), or one of the negative codes below. The
//! message of the last failure on the calling thread is available from
//! `solvlab_last_error`. Handles are opaque and released with their `_free`
//! function; strings returned by the library are released with
//! `solvlab_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use solvlab::boundary::{madic_dist, parse_madic};
use solvlab::cli::{run_suite, ExperimentConfig, Format, Suite};
use solvlab::groups::AnyGroup;
use solvlab::modelcount::common_base;
use solvlab::qimaps::{parse_rational, uniform_iterate_check, IterateVerdict};
use solvlab::spectral::{analyze, parse_int_matrix, SpectralSplit};
use solvlab::Error;

pub const SOLVLAB_OK: i32 = 0;
pub const SOLVLAB_NULL_POINTER: i32 = -1;
pub const SOLVLAB_INVALID_UTF8: i32 = -2;
pub const SOLVLAB_PANIC: i32 = -3;
pub const SOLVLAB_BUFFER_TOO_SMALL: i32 = -4;

pub const SOLVLAB_FORMAT_JSON: i32 = 0;
pub const SOLVLAB_FORMAT_CSV: i32 = 1;

/// Spectral data of an integer matrix.
pub struct SolvlabSplit(SpectralSplit);

/// A finitely generated group with its word metric.
pub struct SolvlabGroup(AnyGroup);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nuls removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Fail {
    Lib(Error),
    Code(i32, String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SOLVLAB_OK,
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            e.code()
        }
        Ok(Err(Fail::Code(code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("panic inside solvlab".into());
            SOLVLAB_PANIC
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Code(SOLVLAB_NULL_POINTER, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail::Code(SOLVLAB_INVALID_UTF8, format!("{what} is not UTF-8")))
}

fn out_ptr<T>(p: *mut T, what: &str) -> Result<(), Fail> {
    if p.is_null() {
        Err(Fail::Code(SOLVLAB_NULL_POINTER, format!("{what} is null")))
    } else {
        Ok(())
    }
}

/// Message of the last failure on this thread, or null. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn solvlab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses a matrix such as `[[2,1],[1,1]]` and analyzes it.
///
/// # Safety
/// `matrix` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn solvlab_split_new(matrix: *const c_char, out: *mut *mut SolvlabSplit) -> i32 {
    guard(|| {
        out_ptr(out, "out")?;
        let split = analyze(&parse_int_matrix(text(matrix, "matrix")?)?)?;
        *out = Box::into_raw(Box::new(SolvlabSplit(split)));
        Ok(())
    })
}

/// # Safety
/// `split` must come from `solvlab_split_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn solvlab_split_free(split: *mut SolvlabSplit) {
    if !split.is_null() {
        drop(Box::from_raw(split));
    }
}

/// `|det M|`.
///
/// # Safety
/// `split` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn solvlab_split_det(split: *const SolvlabSplit, out: *mut u64) -> i32 {
    guard(|| {
        let s = split.as_ref().ok_or(Fail::Code(SOLVLAB_NULL_POINTER, "split is null".into()))?;
        out_ptr(out, "out")?;
        *out = s.0.det();
        Ok(())
    })
}

/// Copies the absolute Jordan diagonal into `buf`. `written` receives the
/// dimension; `SOLVLAB_BUFFER_TOO_SMALL` is returned when `len` is short.
///
/// # Safety
/// `buf` must hold `len` doubles; `split` and `written` must be valid.
#[no_mangle]
pub unsafe extern "C" fn solvlab_split_mbar(split: *const SolvlabSplit, buf: *mut f64, len: usize, written: *mut usize) -> i32 {
    guard(|| {
        let s = split.as_ref().ok_or(Fail::Code(SOLVLAB_NULL_POINTER, "split is null".into()))?;
        out_ptr(written, "written")?;
        let mbar = s.0.mbar();
        *written = mbar.len();
        if len < mbar.len() {
            return Err(Fail::Code(SOLVLAB_BUFFER_TOO_SMALL, format!("need {} doubles", mbar.len())));
        }
        out_ptr(buf, "buf")?;
        ptr::copy_nonoverlapping(mbar.as_ptr(), buf, mbar.len());
        Ok(())
    })
}

/// Parses `bs:1,n`, `abc:[[..]]`, `ll:q` or `ll:q:dl`.
///
/// # Safety
/// `spec` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn solvlab_group_new(spec: *const c_char, out: *mut *mut SolvlabGroup) -> i32 {
    guard(|| {
        out_ptr(out, "out")?;
        let g = AnyGroup::parse(text(spec, "spec")?)?;
        *out = Box::into_raw(Box::new(SolvlabGroup(g)));
        Ok(())
    })
}

/// # Safety
/// `group` must come from `solvlab_group_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn solvlab_group_free(group: *mut SolvlabGroup) {
    if !group.is_null() {
        drop(Box::from_raw(group));
    }
}

/// Word length of a whitespace-separated word, searching up to `radius`.
///
/// # Safety
/// `group`, `word` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn solvlab_group_word_length(
    group: *const SolvlabGroup,
    word: *const c_char,
    radius: u32,
    out: *mut u32,
) -> i32 {
    guard(|| {
        let g = group.as_ref().ok_or(Fail::Code(SOLVLAB_NULL_POINTER, "group is null".into()))?;
        out_ptr(out, "out")?;
        *out = g.0.word_length(text(word, "word")?, radius)?;
        Ok(())
    })
}

/// m-adic distance between two `digits@val` literals.
///
/// # Safety
/// `x`, `y` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn solvlab_madic_dist(m: u32, x: *const c_char, y: *const c_char, out: *mut f64) -> i32 {
    guard(|| {
        out_ptr(out, "out")?;
        *out = madic_dist(&parse_madic(m, text(x, "x")?)?, &parse_madic(m, text(y, "y")?)?)?;
        Ok(())
    })
}

/// Common base `m = r^i`, `p = r^j`. `found` is 0 when none exists.
///
/// # Safety
/// All out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn solvlab_common_base(m: u64, p: u64, found: *mut i32, r: *mut u64, i: *mut u32, j: *mut u32) -> i32 {
    guard(|| {
        out_ptr(found, "found")?;
        out_ptr(r, "r")?;
        out_ptr(i, "i")?;
        out_ptr(j, "j")?;
        match common_base(m, p)? {
            Some((a, b, c)) => {
                (*found, *r, *i, *j) = (1, a, b, c);
            }
            None => {
                (*found, *r, *i, *j) = (0, 0, 0, 0);
            }
        }
        Ok(())
    })
}

/// Iterate detector on rational literals. `violated_at` receives the first
/// violating iterate, or 0 when the pair is compatible.
///
/// # Safety
/// The strings and `violated_at` must be valid.
#[no_mangle]
pub unsafe extern "C" fn solvlab_iterate_check(
    c1: *const c_char,
    c2: *const c_char,
    r: *const c_char,
    max_iter: u64,
    violated_at: *mut u64,
) -> i32 {
    guard(|| {
        out_ptr(violated_at, "violated_at")?;
        let v = uniform_iterate_check(
            &parse_rational(text(c1, "c1")?)?,
            &parse_rational(text(c2, "c2")?)?,
            &parse_rational(text(r, "r")?)?,
            max_iter,
        )?;
        *violated_at = match v {
            IterateVerdict::Compatible => 0,
            IterateVerdict::ViolatedAt(s) => s,
        };
        Ok(())
    })
}

/// Runs a suite with its default fixtures. `output` receives the rendered
/// report (free with `solvlab_string_free`), `passed` 1 or 0.
///
/// # Safety
/// `suite`, `output` and `passed` must be valid.
#[no_mangle]
pub unsafe extern "C" fn solvlab_run_suite(
    suite: *const c_char,
    seed: u64,
    format: i32,
    output: *mut *mut c_char,
    passed: *mut i32,
) -> i32 {
    guard(|| {
        out_ptr(output, "output")?;
        out_ptr(passed, "passed")?;
        let suite: Suite = text(suite, "suite")?.parse()?;
        let format = match format {
            SOLVLAB_FORMAT_JSON => Format::Json,
            SOLVLAB_FORMAT_CSV => Format::Csv,
            other => return Err(Error::InvalidArgument(format!("unknown format {other}")).into()),
        };
        let outcome = run_suite(&ExperimentConfig { format, ..ExperimentConfig::new(suite, seed) })?;
        let rendered = CString::new(outcome.render(format)?).expect("reports contain no nul bytes");
        *passed = outcome.passed() as i32;
        *output = rendered.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn solvlab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
