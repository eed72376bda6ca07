//! C bindings for the retrodictor library.
//!
//! Two levels of access:
//!
//! * scenario handles: parse a JSON scenario once ([`retro_scenario_parse`]),
//!   run it ([`retro_scenario_run`]) to get the result records as a JSON
//!   string, free both;
//! * raw-array entry points ([`retro_abl_fine`], [`retro_naive_bayes`],
//!   [`retro_corrected_bayes`]) for callers that want one conditional
//!   probability without going through JSON. Complex data is passed as
//!   interleaved `(re, im)` doubles, row-major for matrices.
//!
//! Every function returns a [`RetroStatus`]; on any non-`Ok` status a
//! human-readable message is available from [`retro_last_error`] until the
//! next call on the same thread. Strings returned through out-parameters
//! are owned by the caller and must be released with [`retro_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::slice;

use retrodictor::qla::{ComplexMatrix, DensityOperator, Ket, ProjectiveDecomposition};
use retrodictor::retrodict::{abl_fine, corrected_bayes, naive_bayes, RetrodictionQuery};
use retrodictor::scenario::{self, OracleCheckConfig, ScenarioFile};
use retrodictor::Conditional;

/// Status code returned by every binding.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RetroStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The input could not be parsed as a scenario.
    ParseError = 3,
    /// The input parsed but failed validation, or a query was malformed.
    ValidationError = 4,
    /// The requested conditional is undefined (conditioning probability
    /// below 1e-14). Not an error; the out-value is left untouched.
    UndefinedResult = 5,
    /// An oracle-check run reported at least one property violation.
    PropertyFailure = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<Vec<u8>>) {
    let stored = CString::new(message).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(stored));
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

/// Message for the most recent non-`Ok` status on this thread, or null.
/// The pointer stays valid until the next binding call on the thread.
#[no_mangle]
pub extern "C" fn retro_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |s| s.as_ptr())
    })
}

/// Library version as a static string; never freed.
#[no_mangle]
pub extern "C" fn retro_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// A parsed scenario. Opaque; create with [`retro_scenario_parse`] and
/// release with [`retro_scenario_free`].
pub struct RetroScenario {
    file: ScenarioFile,
}

unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, RetroStatus> {
    if ptr.is_null() {
        set_error("null string argument");
        return Err(RetroStatus::NullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        RetroStatus::InvalidUtf8
    })
}

fn give_string(out: *mut *mut c_char, text: String) -> RetroStatus {
    let c = match CString::new(text) {
        Ok(c) => c,
        Err(_) => {
            set_error("output contained an interior NUL byte");
            return RetroStatus::ValidationError;
        }
    };
    unsafe { *out = c.into_raw() };
    RetroStatus::Ok
}

/// Parses a JSON scenario. On success writes a new handle to `out`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn retro_scenario_parse(
    json: *const c_char,
    out: *mut *mut RetroScenario,
) -> RetroStatus {
    clear_error();
    if out.is_null() {
        set_error("null output pointer");
        return RetroStatus::NullPointer;
    }
    let text = match read_str(json) {
        Ok(t) => t,
        Err(status) => return status,
    };
    match scenario::parse_scenario_str(text) {
        Ok(file) => {
            *out = Box::into_raw(Box::new(RetroScenario { file }));
            RetroStatus::Ok
        }
        Err(err) => {
            set_error(err.to_string());
            RetroStatus::ParseError
        }
    }
}

/// Runs every query of a parsed scenario and writes the result records to
/// `out_json` as a JSON array.
///
/// # Safety
/// `scenario_handle` must come from a successful [`retro_scenario_parse`]
/// and not have been freed; `out_json` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn retro_scenario_run(
    scenario_handle: *const RetroScenario,
    out_json: *mut *mut c_char,
) -> RetroStatus {
    clear_error();
    if scenario_handle.is_null() || out_json.is_null() {
        set_error("null pointer argument");
        return RetroStatus::NullPointer;
    }
    let file = &(*scenario_handle).file;
    match scenario::execute(file) {
        Ok(records) => {
            let text = serde_json::to_string(&records).expect("records serialize cleanly");
            give_string(out_json, text)
        }
        Err(err) => {
            set_error(err.to_string());
            RetroStatus::ValidationError
        }
    }
}

/// Releases a scenario handle. Null is ignored.
///
/// # Safety
/// `scenario_handle` must come from [`retro_scenario_parse`] and must not
/// be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn retro_scenario_free(scenario_handle: *mut RetroScenario) {
    if !scenario_handle.is_null() {
        drop(Box::from_raw(scenario_handle));
    }
}

/// Releases a string produced by this library. Null is ignored.
///
/// # Safety
/// `s` must come from a binding of this library and must not be used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn retro_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Renders a built-in demonstration ("margenau", "three-box", "rotated")
/// into `out_text`.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out_text` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn retro_demo(
    name: *const c_char,
    out_text: *mut *mut c_char,
) -> RetroStatus {
    clear_error();
    if out_text.is_null() {
        set_error("null output pointer");
        return RetroStatus::NullPointer;
    }
    let name = match read_str(name) {
        Ok(n) => n,
        Err(status) => return status,
    };
    match scenario::demo(name) {
        Ok(text) => give_string(out_text, text),
        Err(err) => {
            set_error(err.to_string());
            RetroStatus::ValidationError
        }
    }
}

/// Runs the randomized oracle cross-checks. Writes the number of failed
/// checks and the worst deviation observed; returns `PropertyFailure`
/// when any check failed.
///
/// # Safety
/// `out_failures` and `out_worst_deviation` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn retro_oracle_check(
    seed: u64,
    trials: u32,
    max_dim: usize,
    out_failures: *mut u64,
    out_worst_deviation: *mut f64,
) -> RetroStatus {
    clear_error();
    if out_failures.is_null() || out_worst_deviation.is_null() {
        set_error("null output pointer");
        return RetroStatus::NullPointer;
    }
    match scenario::oracle_check(&OracleCheckConfig {
        seed,
        trials,
        max_dim,
    }) {
        Ok(summary) => {
            *out_failures = summary.failures;
            *out_worst_deviation = summary.worst_deviation;
            if summary.failures > 0 {
                let description = summary
                    .failure
                    .map(|f| f.description)
                    .unwrap_or_else(|| "property violation".to_string());
                set_error(description);
                RetroStatus::PropertyFailure
            } else {
                RetroStatus::Ok
            }
        }
        Err(err) => {
            set_error(err.to_string());
            RetroStatus::ValidationError
        }
    }
}

unsafe fn density_from_raw(ptr: *const f64, dim: usize) -> Result<DensityOperator, String> {
    if ptr.is_null() {
        return Err("null state matrix".into());
    }
    let raw = slice::from_raw_parts(ptr, dim * dim * 2);
    let entries = raw
        .chunks_exact(2)
        .map(|c| num_complex::Complex64::new(c[0], c[1]))
        .collect();
    let matrix = ComplexMatrix::new(dim, entries).map_err(|e| e.to_string())?;
    DensityOperator::new(matrix).map_err(|e| format!("state matrix: {e}"))
}

unsafe fn ket_from_raw(ptr: *const f64, dim: usize, what: &str) -> Result<Ket, String> {
    if ptr.is_null() {
        return Err(format!("null {what}"));
    }
    let raw = slice::from_raw_parts(ptr, dim * 2);
    let amplitudes = raw
        .chunks_exact(2)
        .map(|c| num_complex::Complex64::new(c[0], c[1]))
        .collect();
    Ket::new(amplitudes).map_err(|e| format!("{what}: {e}"))
}

unsafe fn basis_from_raw(ptr: *const f64, dim: usize) -> Result<ProjectiveDecomposition, String> {
    if ptr.is_null() {
        return Err("null basis".into());
    }
    let mut kets = Vec::with_capacity(dim);
    for i in 0..dim {
        kets.push(ket_from_raw(ptr.add(i * dim * 2), dim, "basis ket")?);
    }
    ProjectiveDecomposition::from_kets(&kets).map_err(|e| format!("basis: {e}"))
}

type ClosedForm =
    fn(&RetrodictionQuery) -> Result<Conditional, retrodictor::retrodict::RetrodictError>;

unsafe fn raw_conditional(
    dim: usize,
    rho: *const f64,
    basis: *const f64,
    q: *const f64,
    target: usize,
    out_value: *mut f64,
    form: ClosedForm,
) -> RetroStatus {
    clear_error();
    if out_value.is_null() {
        set_error("null output pointer");
        return RetroStatus::NullPointer;
    }
    if dim == 0 {
        set_error("dimension must be at least 1");
        return RetroStatus::ValidationError;
    }
    if target >= dim {
        set_error(format!(
            "target index {target} out of range for dimension {dim}"
        ));
        return RetroStatus::ValidationError;
    }
    let build = || -> Result<RetrodictionQuery, String> {
        let rho = density_from_raw(rho, dim)?;
        let basis = basis_from_raw(basis, dim)?;
        let q = ket_from_raw(q, dim, "post-selection ket")?;
        let label = basis.blocks()[target].0.clone();
        RetrodictionQuery::new(rho, basis, q, label).map_err(|e| e.to_string())
    };
    let query = match build() {
        Ok(q) => q,
        Err(message) => {
            set_error(message);
            return RetroStatus::ValidationError;
        }
    };
    match form(&query) {
        Ok(Conditional::Defined(v)) => {
            *out_value = v;
            RetroStatus::Ok
        }
        Ok(Conditional::Undefined) => {
            set_error("conditioning probability < 1e-14");
            RetroStatus::UndefinedResult
        }
        Err(err) => {
            set_error(err.to_string());
            RetroStatus::ValidationError
        }
    }
}

/// Retrodiction under a complete observation of `basis`, toward the ket at
/// `target`. `rho` is `dim*dim` interleaved complex doubles (row-major),
/// `basis` is `dim` kets of `dim` interleaved complex doubles each, `q` is
/// one ket. Writes the probability to `out_value`.
///
/// # Safety
/// The array arguments must point to buffers of the documented sizes.
#[no_mangle]
pub unsafe extern "C" fn retro_abl_fine(
    dim: usize,
    rho: *const f64,
    basis: *const f64,
    q: *const f64,
    target: usize,
    out_value: *mut f64,
) -> RetroStatus {
    raw_conditional(dim, rho, basis, q, target, out_value, abl_fine)
}

/// The deliberately flawed naive Bayes value for the same arguments as
/// [`retro_abl_fine`]. Returns `UndefinedResult` whenever the Born weight
/// of `q` vanishes, which is the formula's characteristic failure.
///
/// # Safety
/// The array arguments must point to buffers of the documented sizes.
#[no_mangle]
pub unsafe extern "C" fn retro_naive_bayes(
    dim: usize,
    rho: *const f64,
    basis: *const f64,
    q: *const f64,
    target: usize,
    out_value: *mut f64,
) -> RetroStatus {
    raw_conditional(dim, rho, basis, q, target, out_value, naive_bayes)
}

/// The corrected Bayes value (conditioning event written out in full) for
/// the same arguments as [`retro_abl_fine`].
///
/// # Safety
/// The array arguments must point to buffers of the documented sizes.
#[no_mangle]
pub unsafe extern "C" fn retro_corrected_bayes(
    dim: usize,
    rho: *const f64,
    basis: *const f64,
    q: *const f64,
    target: usize,
    out_value: *mut f64,
) -> RetroStatus {
    raw_conditional(dim, rho, basis, q, target, out_value, corrected_bayes)
}
