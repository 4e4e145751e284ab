//! C ABI for `cfactor`.
//!
//! Objects cross the boundary as opaque handles (`CfFamily`, `CfPosterior`)
//! that the caller releases with the matching `*_free`. Every fallible call
//! returns a `CfStatus`; on failure the message is available from
//! `cf_last_error_message` on the same thread until the next failing call.
//! Strings returned by the library are released with `cf_string_free`.
//! Panics never unwind into C: they surface as `CF_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cfactor::calibration::{run_coverage, CalibrationSpec};
use cfactor::cli::{self, Command, RunConfig};
use cfactor::config::FamilyConfig;
use cfactor::consistency::{ConsistencyFactor, FactorKind};
use cfactor::families::{self, FamilyRef, Sample};
use cfactor::grid::GridSpec;
use cfactor::posterior::{self, PosteriorDensity};
use cfactor::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Validation = 3,
    Domain = 4,
    InvalidInput = 5,
    Unsupported = 6,
    ImproperPosterior = 7,
    EmptyLikelihood = 8,
    Singularity = 9,
    NonConvergence = 10,
    CalibrationInfeasible = 11,
    BufferTooSmall = 12,
    Io = 13,
    Panic = 14,
}

impl From<&Error> for CfStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Validation { .. } | Error::Json(_) => CfStatus::Validation,
            Error::Domain { .. } => CfStatus::Domain,
            Error::InvalidInput(_) => CfStatus::InvalidInput,
            Error::Unsupported(_) => CfStatus::Unsupported,
            Error::ImproperPosterior(_) => CfStatus::ImproperPosterior,
            Error::EmptyLikelihood => CfStatus::EmptyLikelihood,
            Error::Singularity(_) => CfStatus::Singularity,
            Error::NonConvergence { .. } => CfStatus::NonConvergence,
            Error::CalibrationInfeasible(_) => CfStatus::CalibrationInfeasible,
            Error::Io(_) => CfStatus::Io,
        }
    }
}

/// A sampling family with fixed hyperparameters.
pub struct CfFamily {
    inner: FamilyRef,
}

/// A normalized posterior on a grid.
pub struct CfPosterior {
    inner: PosteriorDensity,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Failure carried to the boundary: a status and its message.
struct Fail(CfStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(CfStatus::from(&e), e.to_string())
    }
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> CfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CfStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("panic: {msg}"));
            CfStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(CfStatus::NullPointer, format!("`{what}` is null"))
}

/// # Safety
/// `p` is null or a NUL-terminated string.
unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(CfStatus::InvalidUtf8, format!("`{what}` is not UTF-8")))
}

/// # Safety
/// `p` is null only if `len` is 0, otherwise points to `len` doubles.
unsafe fn read_slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// # Safety
/// `p` is null or a valid handle from this library.
unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

fn json_err(field: &str, e: serde_json::Error) -> Fail {
    Fail(CfStatus::Validation, format!("invalid `{field}`: {e}"))
}

fn into_c_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Fail(CfStatus::InvalidInput, "output contains NUL".into()))
}

/// Message of the last failure on this thread, or null. Valid until the next
/// failing call on this thread; do not free.
#[no_mangle]
pub extern "C" fn cf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn cf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` is null or came from this library and was not freed before.
#[no_mangle]
pub unsafe extern "C" fn cf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a family from its id and a JSON object of hyperparameters
/// (`params_json` may be null for none).
///
/// # Safety
/// `id` is a NUL-terminated string, `params_json` is null or one, and `out`
/// is a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cf_family_new(id: *const c_char, params_json: *const c_char, out: *mut *mut CfFamily) -> CfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let mut cfg = FamilyConfig::new(read_str(id, "id")?);
        if !params_json.is_null() {
            cfg.params = serde_json::from_str(read_str(params_json, "params_json")?).map_err(|e| json_err("params_json", e))?;
        }
        let inner = cfg.build()?;
        *out = Box::into_raw(Box::new(CfFamily { inner }));
        Ok(())
    })
}

/// # Safety
/// `family` is null or a handle from `cf_family_new` not freed before.
#[no_mangle]
pub unsafe extern "C" fn cf_family_free(family: *mut CfFamily) {
    if !family.is_null() {
        drop(Box::from_raw(family));
    }
}

/// Number of free parameters, or 0 for a null handle.
///
/// # Safety
/// `family` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cf_family_dim(family: *const CfFamily) -> usize {
    family.as_ref().map_or(0, |f| f.inner.dim())
}

/// Density (pmf for discrete families) at `x`.
///
/// # Safety
/// `family` is a live handle, `theta` points to `theta_len` doubles and
/// `out` is valid.
#[no_mangle]
pub unsafe extern "C" fn cf_family_density(
    family: *const CfFamily,
    x: f64,
    theta: *const f64,
    theta_len: usize,
    out: *mut f64,
) -> CfStatus {
    guard(|| {
        let f = handle(family, "family")?;
        let theta = read_slice(theta, theta_len, "theta")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = families::density_at(f.inner.as_ref(), x, theta)?;
        Ok(())
    })
}

/// Distribution function at `x`.
///
/// # Safety
/// As for `cf_family_density`.
#[no_mangle]
pub unsafe extern "C" fn cf_family_cdf(
    family: *const CfFamily,
    x: f64,
    theta: *const f64,
    theta_len: usize,
    out: *mut f64,
) -> CfStatus {
    guard(|| {
        let f = handle(family, "family")?;
        let theta = read_slice(theta, theta_len, "theta")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = families::distribution(f.inner.as_ref(), x, theta)?;
        Ok(())
    })
}

/// Assigns the posterior for `sample` under the factor described by
/// `factor_json` (e.g. `{"kind": "location"}`). `grid_points` of 0 keeps
/// the default resolution.
///
/// # Safety
/// `family` is a live handle, `factor_json` a NUL-terminated string,
/// `sample` points to `sample_len` doubles and `out` is valid.
#[no_mangle]
pub unsafe extern "C" fn cf_posterior_assign(
    family: *const CfFamily,
    factor_json: *const c_char,
    sample: *const f64,
    sample_len: usize,
    grid_points: usize,
    out: *mut *mut CfPosterior,
) -> CfStatus {
    guard(|| {
        let f = handle(family, "family")?;
        let kind: FactorKind =
            serde_json::from_str(read_str(factor_json, "factor_json")?).map_err(|e| json_err("factor_json", e))?;
        let values = read_slice(sample, sample_len, "sample")?.to_vec();
        if out.is_null() {
            return Err(null("out"));
        }
        let factor = ConsistencyFactor::for_family(&kind, f.inner.as_ref())?;
        let sample = Sample::new(f.inner.as_ref(), values)?;
        let grid = if grid_points == 0 {
            GridSpec::default()
        } else {
            GridSpec::nodes(grid_points)
        };
        let inner = posterior::assign(f.inner.as_ref(), &factor, &sample, &grid)?;
        *out = Box::into_raw(Box::new(CfPosterior { inner }));
        Ok(())
    })
}

/// New posterior after observing `x`, on the prior's grid.
///
/// # Safety
/// `prior` and `family` are live handles and `out` is valid.
#[no_mangle]
pub unsafe extern "C" fn cf_posterior_update(
    prior: *const CfPosterior,
    family: *const CfFamily,
    x: f64,
    out: *mut *mut CfPosterior,
) -> CfStatus {
    guard(|| {
        let p = handle(prior, "prior")?;
        let f = handle(family, "family")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = posterior::update(&p.inner, f.inner.as_ref(), x)?;
        *out = Box::into_raw(Box::new(CfPosterior { inner }));
        Ok(())
    })
}

/// # Safety
/// `post` is null or a live handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn cf_posterior_free(post: *mut CfPosterior) {
    if !post.is_null() {
        drop(Box::from_raw(post));
    }
}

/// Equal-tail interval of content `delta` for parameter `target`; other
/// parameters are integrated out.
///
/// # Safety
/// `post` is a live handle; `lo` and `hi` are valid.
#[no_mangle]
pub unsafe extern "C" fn cf_posterior_interval(
    post: *const CfPosterior,
    target: usize,
    delta: f64,
    lo: *mut f64,
    hi: *mut f64,
) -> CfStatus {
    guard(|| {
        let p = &handle(post, "post")?.inner;
        if lo.is_null() || hi.is_null() {
            return Err(null("lo/hi"));
        }
        if target >= p.dims() {
            return Err(Fail(CfStatus::InvalidInput, format!("target {target} >= {} dimension(s)", p.dims())));
        }
        let m = if p.dims() == 2 {
            posterior::marginalize(p, 1 - target)?
        } else {
            p.clone()
        };
        let ci = posterior::credible_interval(&m, delta)?;
        *lo = ci.lo;
        *hi = ci.hi;
        Ok(())
    })
}

/// Number of grid nodes along `axis` (0 if out of range or null).
///
/// # Safety
/// `post` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cf_posterior_axis_len(post: *const CfPosterior, axis: usize) -> usize {
    post.as_ref()
        .and_then(|p| p.inner.grid().axes().get(axis).map(|a| a.len()))
        .unwrap_or(0)
}

/// Copies the nodes of `axis` into `buf`. `written` receives the node count
/// even when `buf` is too small.
///
/// # Safety
/// `post` is a live handle, `buf` points to `cap` writable doubles (or is
/// null with `cap` 0), and `written` is valid.
#[no_mangle]
pub unsafe extern "C" fn cf_posterior_nodes(
    post: *const CfPosterior,
    axis: usize,
    buf: *mut f64,
    cap: usize,
    written: *mut usize,
) -> CfStatus {
    guard(|| {
        let p = &handle(post, "post")?.inner;
        let a = p
            .grid()
            .axes()
            .get(axis)
            .ok_or_else(|| Fail(CfStatus::InvalidInput, format!("no axis {axis}")))?;
        copy_out(a.nodes(), buf, cap, written)
    })
}

/// Copies the density at every node (row-major over axes) into `buf`.
///
/// # Safety
/// As for `cf_posterior_nodes`.
#[no_mangle]
pub unsafe extern "C" fn cf_posterior_values(
    post: *const CfPosterior,
    buf: *mut f64,
    cap: usize,
    written: *mut usize,
) -> CfStatus {
    guard(|| {
        let p = &handle(post, "post")?.inner;
        copy_out(p.values(), buf, cap, written)
    })
}

/// # Safety
/// `buf` points to `cap` writable doubles or is null with `cap` 0; `written`
/// is valid.
unsafe fn copy_out(src: &[f64], buf: *mut f64, cap: usize, written: *mut usize) -> Result<(), Fail> {
    if written.is_null() {
        return Err(null("written"));
    }
    *written = src.len();
    if cap < src.len() {
        return Err(Fail(
            CfStatus::BufferTooSmall,
            format!("need {} doubles, have {cap}", src.len()),
        ));
    }
    if buf.is_null() {
        return Err(null("buf"));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(())
}

/// Trapezoid L1 distance between two posteriors on the same nodes.
///
/// # Safety
/// `a` and `b` are live handles; `out` is valid.
#[no_mangle]
pub unsafe extern "C" fn cf_posterior_l1(a: *const CfPosterior, b: *const CfPosterior, out: *mut f64) -> CfStatus {
    guard(|| {
        let (a, b) = (handle(a, "a")?, handle(b, "b")?);
        if out.is_null() {
            return Err(null("out"));
        }
        *out = a.inner.l1_distance(&b.inner)?;
        Ok(())
    })
}

/// Runs a coverage simulation from a JSON calibration spec and returns the
/// JSON coverage report in `*out_json` (free with `cf_string_free`).
///
/// # Safety
/// `spec_json` is a NUL-terminated string and `out_json` is valid.
#[no_mangle]
pub unsafe extern "C" fn cf_calibrate_json(spec_json: *const c_char, out_json: *mut *mut c_char) -> CfStatus {
    guard(|| {
        let text = read_str(spec_json, "spec_json")?;
        if out_json.is_null() {
            return Err(null("out_json"));
        }
        let spec: CalibrationSpec = serde_json::from_str(text).map_err(|e| json_err("spec_json", e))?;
        spec.validate()?;
        let report = run_coverage(&spec)?;
        *out_json = into_c_string(serde_json::to_string(&report).map_err(Error::from)?)?;
        Ok(())
    })
}

/// Runs any CLI command except `self-check` on a JSON run config and
/// returns the report envelope in `*out_json` (free with `cf_string_free`).
///
/// # Safety
/// `command` and `config_json` are NUL-terminated strings and `out_json` is
/// valid.
#[no_mangle]
pub unsafe extern "C" fn cf_run_json(command: *const c_char, config_json: *const c_char, out_json: *mut *mut c_char) -> CfStatus {
    guard(|| {
        let name = read_str(command, "command")?;
        let cfg = RunConfig::from_json(read_str(config_json, "config_json")?)?;
        if out_json.is_null() {
            return Err(null("out_json"));
        }
        let command: Command = serde_json::from_value(serde_json::Value::String(name.to_owned()))
            .map_err(|_| Fail(CfStatus::Validation, format!("unknown command `{name}`")))?;
        if command == Command::SelfCheck {
            return Err(Fail(CfStatus::Unsupported, "self-check is only available from the CLI".into()));
        }
        let cmd = cfg.resolve_command(Some(command))?;
        let outcome = cli::execute(cmd, &cfg)?;
        let env = cli::envelope(cmd, &outcome);
        *out_json = into_c_string(env.to_string())?;
        Ok(())
    })
}
