//! C interface to `qlie`.
//!
//! Systems and reports are opaque heap handles owned by the caller and
//! released with the matching `*_free` function. Every fallible call returns a
//! [`QlieStatus`]; on failure a description is available from
//! [`qlie_last_error_message`] on the same thread. Strings returned through
//! out-parameters are NUL-terminated UTF-8 and must be released with
//! [`qlie_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nalgebra::DVector;
use qlie::cli::files::{to_json_string, SystemFile};
use qlie::cli::{resolve_tolerances, CliError};
use qlie::criteria::{analyze, ControllabilityReport, Tolerances};
use qlie::linalg::C64;
use qlie::models::{diagonal_pair, random_dense, truncated_oscillator};
use qlie::simulator::{propagate_state, PiecewiseConstantControl, QuantumState, Segment};
use qlie::system::ControlSystem;

/// Result codes shared by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QlieStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// The input was rejected (malformed JSON, non-Hermitian matrix, bad sizes, ...).
    InvalidInput = 2,
    /// An internal cross-check disagreed; the result would not be trustworthy.
    Consistency = 3,
    /// A string argument was not valid UTF-8.
    Utf8 = 4,
    /// A Rust panic was caught at the boundary.
    Panic = 5,
}

/// A control system together with the tolerances its source file requested.
pub struct QlieSystem {
    system: ControlSystem,
    tolerances: Option<Tolerances>,
}

/// The outcome of `qlie_analyze`.
pub struct QlieReport {
    report: ControllabilityReport,
}

/// Headline numbers of a report.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct QlieSummary {
    pub n: usize,
    pub lie_dim: usize,
    pub traceless_lie_dim: usize,
    pub centralizer_dim: usize,
    pub effective_count: usize,
    pub any_nonzero_trace: bool,
    pub functional_independent: bool,
    pub density_controllable: bool,
    pub wavefunction_controllable: bool,
    pub full_algebra: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(CString::new(msg).expect("NULs replaced")));
}

struct Failure(QlieStatus, String);

impl From<qlie::Error> for Failure {
    fn from(e: qlie::Error) -> Self {
        let status = if e.is_consistency() {
            QlieStatus::Consistency
        } else {
            QlieStatus::InvalidInput
        };
        Failure(status, e.to_string())
    }
}

impl From<CliError> for Failure {
    fn from(e: CliError) -> Self {
        match e {
            CliError::Invalid(m) => Failure(QlieStatus::InvalidInput, m),
            CliError::Consistency(m) => Failure(QlieStatus::Consistency, m),
        }
    }
}

impl From<qlie::cli::files::FieldError> for Failure {
    fn from(e: qlie::cli::files::FieldError) -> Self {
        Failure(QlieStatus::InvalidInput, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(QlieStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> QlieStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            QlieStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            QlieStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(QlieStatus::Utf8, format!("{what}: {e}")))
}

unsafe fn write_out<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Parses a system from the JSON file format used by the command-line tool.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qlie_system_from_json(json: *const c_char, out: *mut *mut QlieSystem) -> QlieStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        let file = SystemFile::parse(text)?;
        let system = file.to_system()?;
        write_out(
            out,
            QlieSystem {
                system,
                tolerances: file.tolerances,
            },
        )
    })
}

fn model(out: *mut *mut QlieSystem, build: impl FnOnce() -> qlie::Result<ControlSystem>) -> QlieStatus {
    guard(|| {
        let system = build()?;
        unsafe {
            write_out(
                out,
                QlieSystem {
                    system,
                    tolerances: None,
                },
            )
        }
    })
}

/// Lowest `n` levels of the harmonic oscillator with a dipole coupling.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qlie_model_oscillator(n: usize, out: *mut *mut QlieSystem) -> QlieStatus {
    model(out, || truncated_oscillator(n))
}

/// Two commuting diagonal operators; never controllable.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qlie_model_diagonal(n: usize, out: *mut *mut QlieSystem) -> QlieStatus {
    model(out, || diagonal_pair(n))
}

/// Gaussian random Hermitian operators with `l` monomial couplings.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qlie_model_random(
    n: usize,
    l: usize,
    seed: u64,
    out: *mut *mut QlieSystem,
) -> QlieStatus {
    model(out, || random_dense(n, l, seed))
}

/// Hilbert-space dimension of `system`, or 0 for a null handle.
///
/// # Safety
/// `system` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qlie_system_dim(system: *const QlieSystem) -> usize {
    system.as_ref().map_or(0, |s| s.system.n())
}

/// # Safety
/// `system` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qlie_system_free(system: *mut QlieSystem) {
    if !system.is_null() {
        drop(Box::from_raw(system));
    }
}

/// Runs the full controllability analysis.
///
/// A positive `tol` overrides the closure, rank and independence tolerances;
/// zero or a negative value keeps those of the system (or the defaults).
///
/// # Safety
/// `system` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qlie_analyze(
    system: *const QlieSystem,
    tol: f64,
    out: *mut *mut QlieReport,
) -> QlieStatus {
    guard(|| {
        let s = system.as_ref().ok_or_else(|| null("system"))?;
        let tol = if tol > 0.0 { Some(tol) } else { None };
        let tolerances = resolve_tolerances(s.tolerances, tol, None)?;
        let report = analyze(&s.system, &tolerances)?;
        write_out(out, QlieReport { report })
    })
}

/// Copies the headline numbers of `report` into `out`.
///
/// # Safety
/// `report` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qlie_report_summary(report: *const QlieReport, out: *mut QlieSummary) -> QlieStatus {
    guard(|| {
        let r = &report.as_ref().ok_or_else(|| null("report"))?.report;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = QlieSummary {
            n: r.n,
            lie_dim: r.lie_dim,
            traceless_lie_dim: r.traceless_lie_dim,
            centralizer_dim: r.centralizer_dim,
            effective_count: r.effective_count,
            any_nonzero_trace: r.any_nonzero_trace,
            functional_independent: r.functional_independent,
            density_controllable: r.density_controllable,
            wavefunction_controllable: r.wavefunction_controllable,
            full_algebra: r.full_algebra,
        };
        Ok(())
    })
}

/// Number of warnings attached to `report`, or 0 for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qlie_report_warning_count(report: *const QlieReport) -> usize {
    report.as_ref().map_or(0, |r| r.report.warnings.len())
}

/// The full report as JSON; release with `qlie_string_free`.
///
/// # Safety
/// `report` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qlie_report_to_json(report: *const QlieReport, out: *mut *mut c_char) -> QlieStatus {
    guard(|| {
        let r = &report.as_ref().ok_or_else(|| null("report"))?.report;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = CString::new(to_json_string(r))
            .expect("JSON has no NUL")
            .into_raw();
        Ok(())
    })
}

/// # Safety
/// `report` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qlie_report_free(report: *mut QlieReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qlie_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Propagates a unit state through `segments` piecewise-constant segments.
///
/// `durations` and `values` hold one entry per segment. The state is given and
/// returned as separate real and imaginary arrays of length `n`, which must
/// equal the system dimension; the output arrays may alias the inputs.
///
/// # Safety
/// Every non-empty array must be valid for its stated length.
#[no_mangle]
pub unsafe extern "C" fn qlie_propagate_state(
    system: *const QlieSystem,
    durations: *const f64,
    values: *const f64,
    segments: usize,
    re_in: *const f64,
    im_in: *const f64,
    re_out: *mut f64,
    im_out: *mut f64,
    n: usize,
) -> QlieStatus {
    guard(|| {
        let s = system.as_ref().ok_or_else(|| null("system"))?;
        if n != s.system.n() {
            return Err(Failure(
                QlieStatus::InvalidInput,
                format!(
                    "state length {n} does not match system dimension {}",
                    s.system.n()
                ),
            ));
        }
        let durations = slice(durations, segments, "durations")?;
        let values = slice(values, segments, "values")?;
        let control = PiecewiseConstantControl::new(
            durations
                .iter()
                .zip(values)
                .map(|(&duration, &value)| Segment { duration, value })
                .collect(),
        )?;
        let amps: Vec<C64> = slice(re_in, n, "re_in")?
            .iter()
            .zip(slice(im_in, n, "im_in")?)
            .map(|(&re, &im)| C64::new(re, im))
            .collect();
        if re_out.is_null() || im_out.is_null() {
            return Err(null("output state"));
        }
        let state = QuantumState::new(DVector::from_vec(amps))?;
        let out = propagate_state(&s.system, &control, &state)?;
        for (k, z) in out.amplitudes().iter().enumerate() {
            *re_out.add(k) = z.re;
            *im_out.add(k) = z.im;
        }
        Ok(())
    })
}

/// Message for the last failed call on this thread, or null after a success.
/// The pointer stays valid until the next call into this library on the same
/// thread.
#[no_mangle]
pub extern "C" fn qlie_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qlie_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn panics_become_status_codes() {
        let status = guard(|| panic!("boom"));
        assert_eq!(status, QlieStatus::Panic);
        let msg = unsafe { CStr::from_ptr(qlie_last_error_message()) }
            .to_str()
            .unwrap();
        assert_eq!(msg, "panic: boom");
        assert_eq!(guard(|| Ok(())), QlieStatus::Ok);
        assert!(qlie_last_error_message().is_null());
    }

    #[test]
    fn interior_nul_in_messages_is_replaced() {
        set_error("a\0b");
        let msg = unsafe { CStr::from_ptr(qlie_last_error_message()) }
            .to_str()
            .unwrap();
        assert_eq!(msg, "a b");
    }
}
