//! C interface to the sparkle library.
//!
//! Every function returns a [`SparkleStatus`]; on failure the message is kept
//! per thread and read with [`sparkle_last_error`]. Handles are opaque and
//! owned by the caller until passed to the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use sparkle::estimator::{fit_doubly_penalized_with, schedule, FitOptions, RegularizationSchedule};
use sparkle::harness::{run_experiment, ExperimentConfig};
use sparkle::policy::PolicyTrace;
use sparkle::{AdditiveFunction, Error, KernelSpec, SampleBatch};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SparkleStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ConfigError = 3,
    RuntimeError = 4,
    Panic = 5,
}

/// A validated experiment configuration.
pub struct SparkleExperiment {
    config: ExperimentConfig,
}

/// Traces of a finished experiment, ordered by policy name then seed.
pub struct SparkleRun {
    traces: Vec<PolicyTrace>,
    names: Vec<CString>,
}

/// A fitted sparse additive reward model.
pub struct SparkleModel {
    function: AdditiveFunction,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: SparkleStatus, msg: impl Into<String>) -> SparkleStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> SparkleStatus {
    let status = match e {
        Error::Config(_) | Error::Json(_) => SparkleStatus::ConfigError,
        Error::Input(_) => SparkleStatus::InvalidArgument,
        _ => SparkleStatus::RuntimeError,
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> SparkleStatus) -> SparkleStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(SparkleStatus::Panic, format!("panic: {msg}"))
        }
    }
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(SparkleStatus::NullPointer, concat!("`", stringify!($p), "` is null"));
        })+
    };
}

/// Message of the last failure on this thread, or null. Valid until the next
/// call into this library from the same thread.
#[no_mangle]
pub extern "C" fn sparkle_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sparkle_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Matérn kernel with smoothness `m` (unit lengthscale and variance) at `(x, y)`.
///
/// # Safety
/// `out` must point to writable storage for one `double`.
#[no_mangle]
pub unsafe extern "C" fn sparkle_kernel_eval(m: f64, x: f64, y: f64, out: *mut f64) -> SparkleStatus {
    guard(|| {
        non_null!(out);
        if !x.is_finite() || !y.is_finite() {
            return fail(SparkleStatus::InvalidArgument, "kernel arguments must be finite");
        }
        match KernelSpec::matern_unit(m) {
            Ok(k) => {
                *out = k.eval(x, y);
                SparkleStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Parses and validates an experiment configuration from JSON.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sparkle_experiment_from_json(json: *const c_char, out: *mut *mut SparkleExperiment) -> SparkleStatus {
    guard(|| {
        non_null!(json, out);
        *out = ptr::null_mut();
        let text = match CStr::from_ptr(json).to_str() {
            Ok(t) => t,
            Err(_) => return fail(SparkleStatus::InvalidArgument, "config is not valid UTF-8"),
        };
        let config = match ExperimentConfig::from_json(text) {
            Ok(c) => c,
            Err(e) => return from_error(e),
        };
        if let Err(e) = config.validate() {
            return from_error(e);
        }
        *out = Box::into_raw(Box::new(SparkleExperiment { config }));
        SparkleStatus::Ok
    })
}

/// # Safety
/// `exp` must be null or a handle from [`sparkle_experiment_from_json`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sparkle_experiment_free(exp: *mut SparkleExperiment) {
    if !exp.is_null() {
        drop(Box::from_raw(exp));
    }
}

/// Runs every policy for every replication. Nothing is written to disk.
///
/// # Safety
/// `exp` must be a live experiment handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sparkle_experiment_run(exp: *const SparkleExperiment, out: *mut *mut SparkleRun) -> SparkleStatus {
    guard(|| {
        non_null!(exp, out);
        *out = ptr::null_mut();
        match run_experiment(&(*exp).config) {
            Ok(traces) => {
                let names = traces
                    .iter()
                    .map(|t| CString::new(t.policy.clone()).unwrap_or_default())
                    .collect();
                *out = Box::into_raw(Box::new(SparkleRun { traces, names }));
                SparkleStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `run` must be null or a handle from [`sparkle_experiment_run`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sparkle_run_free(run: *mut SparkleRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

unsafe fn trace<'a>(run: *const SparkleRun, index: usize) -> Result<&'a PolicyTrace, SparkleStatus> {
    let r = &*run;
    r.traces.get(index).ok_or_else(|| {
        fail(
            SparkleStatus::InvalidArgument,
            format!("trace index {index} out of range for {} traces", r.traces.len()),
        )
    })
}

/// Number of traces (policies times replications).
///
/// # Safety
/// `run` must be a live run handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sparkle_run_count(run: *const SparkleRun, out: *mut usize) -> SparkleStatus {
    guard(|| {
        non_null!(run, out);
        let r = &*run;
        *out = r.traces.len();
        SparkleStatus::Ok
    })
}

/// Horizon and seed of trace `index`. Either output may be null.
///
/// # Safety
/// `run` must be a live run handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn sparkle_run_trace_info(
    run: *const SparkleRun,
    index: usize,
    horizon: *mut usize,
    seed: *mut u64,
) -> SparkleStatus {
    guard(|| {
        non_null!(run);
        let t = match trace(run, index) {
            Ok(t) => t,
            Err(s) => return s,
        };
        if !horizon.is_null() {
            *horizon = t.steps.len();
        }
        if !seed.is_null() {
            *seed = t.seed;
        }
        SparkleStatus::Ok
    })
}

/// Policy name of trace `index`, owned by the run handle.
///
/// # Safety
/// `run` must be a live run handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sparkle_run_policy_name(run: *const SparkleRun, index: usize, out: *mut *const c_char) -> SparkleStatus {
    guard(|| {
        non_null!(run, out);
        if let Err(s) = trace(run, index) {
            return s;
        }
        let r = &*run;
        *out = r.names[index].as_ptr();
        SparkleStatus::Ok
    })
}

/// Copies the cumulative regret curve of trace `index` into `buf`, which must
/// hold exactly the trace's horizon.
///
/// # Safety
/// `run` must be a live run handle; `buf` must have room for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sparkle_run_cumulative_regret(
    run: *const SparkleRun,
    index: usize,
    buf: *mut f64,
    len: usize,
) -> SparkleStatus {
    guard(|| {
        non_null!(run, buf);
        let t = match trace(run, index) {
            Ok(t) => t,
            Err(s) => return s,
        };
        if len != t.steps.len() {
            return fail(
                SparkleStatus::InvalidArgument,
                format!("buffer length {len} does not match horizon {}", t.steps.len()),
            );
        }
        slice::from_raw_parts_mut(buf, len).copy_from_slice(&t.cumulative_regret());
        SparkleStatus::Ok
    })
}

/// Fits the doubly penalized sparse additive estimator on `n` rows of `d`
/// covariates (row-major) with responses `y`, using the sample-size driven
/// regularization schedule with constants `c3`, `c4`, smoothness `m` and
/// confidence `delta`.
///
/// # Safety
/// `x` must hold `n * d` doubles, `y` must hold `n`, `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sparkle_fit_additive(
    x: *const f64,
    n: usize,
    d: usize,
    y: *const f64,
    c3: f64,
    c4: f64,
    m: f64,
    delta: f64,
    out: *mut *mut SparkleModel,
) -> SparkleStatus {
    guard(|| {
        non_null!(x, y, out);
        *out = ptr::null_mut();
        if n == 0 || d == 0 {
            return fail(SparkleStatus::InvalidArgument, "need at least one row and one column");
        }
        let Some(total) = n.checked_mul(d) else {
            return fail(SparkleStatus::InvalidArgument, "n * d overflows");
        };
        let xs = slice::from_raw_parts(x, total);
        let rows: Vec<Vec<f64>> = xs.chunks(d).map(<[f64]>::to_vec).collect();
        let ys = slice::from_raw_parts(y, n).to_vec();
        let fitted = (|| {
            let batch = SampleBatch::from_rows(rows, ys)?;
            let kernel = KernelSpec::matern_unit(m)?;
            let pair = schedule(n, d, delta, &RegularizationSchedule::new(c3, c4, m)?)?;
            fit_doubly_penalized_with(&batch, &pair, &kernel, &FitOptions::default())
        })();
        match fitted {
            Ok((function, _)) => {
                *out = Box::into_raw(Box::new(SparkleModel { function }));
                SparkleStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `model` must be null or a handle from [`sparkle_fit_additive`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sparkle_model_free(model: *mut SparkleModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Evaluates the model at one point of dimension `d`.
///
/// # Safety
/// `model` must be live, `x` must hold `d` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sparkle_model_predict(model: *const SparkleModel, x: *const f64, d: usize, out: *mut f64) -> SparkleStatus {
    guard(|| {
        non_null!(model, x, out);
        match (*model).function.evaluate(slice::from_raw_parts(x, d)) {
            Ok(v) => {
                *out = v;
                SparkleStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Writes the selected coordinates (ascending) into `buf` and their number
/// into `count`. With `cap` too small, only `count` is written and the call
/// fails with `InvalidArgument`; `buf` may be null when `cap` is 0.
///
/// # Safety
/// `model` must be live, `count` writable, and `buf` must have room for `cap` entries.
#[no_mangle]
pub unsafe extern "C" fn sparkle_model_support(
    model: *const SparkleModel,
    buf: *mut usize,
    cap: usize,
    count: *mut usize,
) -> SparkleStatus {
    guard(|| {
        non_null!(model, count);
        let support = (*model).function.support();
        *count = support.len();
        if support.len() > cap {
            return fail(
                SparkleStatus::InvalidArgument,
                format!("support has {} coordinates, buffer holds {cap}", support.len()),
            );
        }
        if !support.is_empty() {
            non_null!(buf);
            slice::from_raw_parts_mut(buf, support.len()).copy_from_slice(&support);
        }
        SparkleStatus::Ok
    })
}
