#![warn(missing_docs)]
//! C ABI for the `pbn-steady` library.
//!
//! Conventions:
//!
//! * Models are opaque handles (`PsModel*`) created by `ps_model_parse` /
//!   `ps_model_generate` and released with `ps_model_free`.
//! * Every fallible call returns a [`PsStatus`]; on any non-OK status a
//!   human-readable message is retrievable with [`ps_last_error`] (valid on
//!   the calling thread until its next library call).
//! * Strings returned by the library (`ps_model_serialize`) are NUL-
//!   terminated, UTF-8, and must be released with [`ps_string_free`].
//! * No call unwinds across the boundary: internal panics are caught and
//!   reported as [`PsStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use pbn_steady::model::{GeneratorSpec, PbnModel};
use pbn_steady::sim::MetaPredicate;
use pbn_steady::twostate::{
    run, safe_n0_range, Heuristic, PbnMetaSource, TwoStateParams, TwoStateRun,
};
use pbn_steady::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsStatus {
    /// Success.
    Ok = 0,
    /// A required pointer argument was NULL.
    NullPointer = 1,
    /// An argument value was rejected (range, index, predicate, parameters).
    InvalidArgument = 2,
    /// Model text violated the `.pbn` grammar.
    ParseError = 3,
    /// A structural model invariant failed.
    ModelError = 4,
    /// The estimator could not produce a valid estimate.
    EstimationError = 5,
    /// The exact solver's state-space cap was exceeded.
    CapExceeded = 6,
    /// Iterative computation failed to converge.
    NonConvergence = 7,
    /// Underlying I/O failure.
    IoError = 8,
    /// A string argument was not valid UTF-8.
    Utf8Error = 9,
    /// An internal panic was caught at the boundary.
    Panic = 10,
}

/// Opaque handle to a probabilistic Boolean network model.
pub struct PsModel(PbnModel);

/// Mirror of the random-model generator configuration.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PsGeneratorSpec {
    /// Number of nodes (≥ 1).
    pub node_count: u64,
    /// Minimum predictor functions per node (≥ 1).
    pub min_funcs: u64,
    /// Maximum predictor functions per node.
    pub max_funcs: u64,
    /// Minimum parents per function.
    pub min_parents: u64,
    /// Maximum parents per function.
    pub max_parents: u64,
    /// Perturbation parameter p (0, or in (0,1)).
    pub perturbation_p: f64,
    /// Generator seed.
    pub seed: u64,
}

/// Initialization heuristic selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsHeuristic {
    /// No safeguard (the documented failure mode).
    None = 0,
    /// Clamp n₀ into the safe pilot range.
    PitfallAvoidance = 1,
    /// Controlled initial estimation of the rarer rate.
    Controlled = 2,
    /// Double until both transition counts reach 3 (default).
    Simple = 3,
}

/// Mirror of the estimator parameters.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PsTwoStateParams {
    /// Burn-in convergence tolerance ε ∈ (0,1); e.g. 1e-10.
    pub epsilon: f64,
    /// Half-width precision r > 0.
    pub r: f64,
    /// Confidence level s ∈ (0,1); e.g. 0.95.
    pub s: f64,
    /// Subsampling lag k ≥ 1.
    pub k: u64,
    /// Initial burn-in m₀ ≥ 1 (two-state scale).
    pub m0: u64,
    /// Pilot size n₀; 0 selects the AUTO rule.
    pub n0: u64,
    /// Initialization heuristic.
    pub heuristic: PsHeuristic,
    /// Cap on heuristic trajectory doublings; e.g. 30.
    pub doubling_cap: u32,
}

/// Results of one estimation run.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PsTwoStateRun {
    /// Final α̂.
    pub alpha_hat: f64,
    /// Final β̂.
    pub beta_hat: f64,
    /// Steady-state probability estimate.
    pub q_hat: f64,
    /// 0→0 transition count.
    pub c00: u64,
    /// 0→1 transition count.
    pub c01: u64,
    /// 1→0 transition count.
    pub c10: u64,
    /// 1→1 transition count.
    pub c11: u64,
    /// Burn-in t in subsampled observations.
    pub burn_in_t: u64,
    /// Sample size ⌈n⌉ in subsampled observations.
    pub sample_obs: u64,
    /// Burn-in M = 1+(t−1)k in original steps.
    pub burn_in_steps: u64,
    /// Sample N = 1+(⌈n⌉−1)k in original steps.
    pub sample_steps: u64,
    /// Original-chain steps consumed.
    pub total_steps: u64,
    /// Observations collected.
    pub observations: u64,
    /// Pilot size after AUTO resolution / clamping.
    pub resolved_n0: u64,
    /// Estimation rounds.
    pub iterations: u32,
    /// Wall-clock milliseconds.
    pub wall_time_ms: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).expect("NUL bytes stripped");
    });
}

fn fail(err: &Error) -> PsStatus {
    set_last_error(&err.to_string());
    match err {
        Error::Parse { .. } => PsStatus::ParseError,
        Error::InvalidModel(_) | Error::NoMassToRedistribute { .. } => PsStatus::ModelError,
        Error::IndexOutOfRange(_)
        | Error::InvalidPredicate(_)
        | Error::InvalidGeneratorSpec(_)
        | Error::InvalidParams(_) => PsStatus::InvalidArgument,
        Error::PeriodicAbstraction
        | Error::UndefinedEstimate(_)
        | Error::DoublingCapExceeded { .. }
        | Error::EmptySafeRange { .. } => PsStatus::EstimationError,
        Error::ExactCapExceeded { .. } => PsStatus::CapExceeded,
        Error::NonConvergence { .. } => PsStatus::NonConvergence,
        Error::Io(_) => PsStatus::IoError,
        _ => PsStatus::InvalidArgument,
    }
}

fn null_pointer(what: &str) -> PsStatus {
    set_last_error(&format!("{what} must not be NULL"));
    PsStatus::NullPointer
}

/// Runs `body` with panics converted to [`PsStatus::Panic`].
fn guarded(body: impl FnOnce() -> PsStatus) -> PsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_last_error("internal panic caught at the C boundary");
            PsStatus::Panic
        }
    }
}

/// # Safety
/// `text` must be NULL or point to a NUL-terminated string.
unsafe fn read_str<'a>(text: *const c_char, what: &str) -> Result<&'a str, PsStatus> {
    if text.is_null() {
        return Err(null_pointer(what));
    }
    CStr::from_ptr(text).to_str().map_err(|_| {
        set_last_error(&format!("{what} is not valid UTF-8"));
        PsStatus::Utf8Error
    })
}

fn to_params(p: &PsTwoStateParams) -> Result<TwoStateParams, PsStatus> {
    let heuristic = match p.heuristic {
        PsHeuristic::None => Heuristic::None,
        PsHeuristic::PitfallAvoidance => Heuristic::PitfallAvoidance,
        PsHeuristic::Controlled => Heuristic::Controlled,
        PsHeuristic::Simple => Heuristic::Simple,
    };
    let k = usize::try_from(p.k).map_err(|_| {
        set_last_error("subsampling lag k does not fit this platform");
        PsStatus::InvalidArgument
    })?;
    Ok(TwoStateParams {
        epsilon: p.epsilon,
        r: p.r,
        s: p.s,
        k,
        m0: p.m0,
        n0: (p.n0 != 0).then_some(p.n0),
        heuristic,
        doubling_cap: p.doubling_cap,
    })
}

fn to_run_struct(run: &TwoStateRun) -> PsTwoStateRun {
    PsTwoStateRun {
        alpha_hat: run.alpha_hat,
        beta_hat: run.beta_hat,
        q_hat: run.q_hat,
        c00: run.counts.c00,
        c01: run.counts.c01,
        c10: run.counts.c10,
        c11: run.counts.c11,
        burn_in_t: run.burn_in_t,
        sample_obs: run.sample_obs,
        burn_in_steps: run.burn_in_steps,
        sample_steps: run.sample_steps,
        total_steps: run.total_steps,
        observations: run.observations,
        resolved_n0: run.resolved_n0,
        iterations: run.iterations,
        wall_time_ms: run.wall_time.as_secs_f64() * 1e3,
    }
}

/// Returns the library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ps_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Returns the message of the calling thread's most recent error (empty
/// string when no error has occurred). The pointer stays valid until this
/// thread's next library call.
#[no_mangle]
pub extern "C" fn ps_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Parses `.pbn` model text into a new model handle.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must point to writable
/// storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn ps_model_parse(text: *const c_char, out: *mut *mut PsModel) -> PsStatus {
    guarded(|| {
        if out.is_null() {
            return null_pointer("out");
        }
        let text = match read_str(text, "text") {
            Ok(t) => t,
            Err(status) => return status,
        };
        match PbnModel::parse(text) {
            Ok(model) => {
                *out = Box::into_raw(Box::new(PsModel(model)));
                PsStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Generates a random model from a [`PsGeneratorSpec`].
///
/// # Safety
/// `spec` and `out` must be non-NULL and point to valid storage.
#[no_mangle]
pub unsafe extern "C" fn ps_model_generate(
    spec: *const PsGeneratorSpec,
    out: *mut *mut PsModel,
) -> PsStatus {
    guarded(|| {
        if out.is_null() {
            return null_pointer("out");
        }
        if spec.is_null() {
            return null_pointer("spec");
        }
        let spec = &*spec;
        let narrow = |v: u64, what: &str| {
            usize::try_from(v).map_err(|_| {
                set_last_error(&format!("{what} does not fit this platform"));
                PsStatus::InvalidArgument
            })
        };
        let spec = GeneratorSpec {
            node_count: match narrow(spec.node_count, "node_count") {
                Ok(v) => v,
                Err(s) => return s,
            },
            min_funcs: match narrow(spec.min_funcs, "min_funcs") {
                Ok(v) => v,
                Err(s) => return s,
            },
            max_funcs: match narrow(spec.max_funcs, "max_funcs") {
                Ok(v) => v,
                Err(s) => return s,
            },
            min_parents: match narrow(spec.min_parents, "min_parents") {
                Ok(v) => v,
                Err(s) => return s,
            },
            max_parents: match narrow(spec.max_parents, "max_parents") {
                Ok(v) => v,
                Err(s) => return s,
            },
            perturbation_p: spec.perturbation_p,
            seed: spec.seed,
        };
        match PbnModel::generate(&spec) {
            Ok(model) => {
                *out = Box::into_raw(Box::new(PsModel(model)));
                PsStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Releases a model handle. NULL is a no-op.
///
/// # Safety
/// `model` must be NULL or a handle obtained from this library that has not
/// been freed already.
#[no_mangle]
pub unsafe extern "C" fn ps_model_free(model: *mut PsModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of nodes in the model (0 for NULL).
///
/// # Safety
/// `model` must be NULL or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn ps_model_node_count(model: *const PsModel) -> u64 {
    if model.is_null() {
        return 0;
    }
    (*model).0.n() as u64
}

/// Parent-count density 𝒟 of the model (NaN for NULL).
///
/// # Safety
/// `model` must be NULL or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn ps_model_density(model: *const PsModel) -> f64 {
    if model.is_null() {
        return f64::NAN;
    }
    (*model).0.density()
}

/// Serializes a model to `.pbn` text. The returned string must be released
/// with [`ps_string_free`].
///
/// # Safety
/// `model` must be a live handle; `out` must point to writable storage for
/// one pointer.
#[no_mangle]
pub unsafe extern "C" fn ps_model_serialize(
    model: *const PsModel,
    out: *mut *mut c_char,
) -> PsStatus {
    guarded(|| {
        if out.is_null() {
            return null_pointer("out");
        }
        if model.is_null() {
            return null_pointer("model");
        }
        let text = (*model).0.serialize();
        match CString::new(text) {
            Ok(cstring) => {
                *out = cstring.into_raw();
                PsStatus::Ok
            }
            Err(_) => {
                set_last_error("serialized text contained NUL");
                PsStatus::Panic
            }
        }
    })
}

/// Releases a string returned by this library. NULL is a no-op.
///
/// # Safety
/// `text` must be NULL or a string obtained from this library that has not
/// been freed already.
#[no_mangle]
pub unsafe extern "C" fn ps_string_free(text: *mut c_char) {
    if !text.is_null() {
        drop(CString::from_raw(text));
    }
}

/// Estimates the steady-state probability of `predicate` (e.g. `"3=1&7=0"`)
/// on the model with the two-state estimator.
///
/// # Safety
/// `model` must be a live handle; `predicate` a NUL-terminated string;
/// `params` and `out` non-NULL pointers to valid storage.
#[no_mangle]
pub unsafe extern "C" fn ps_steady_estimate(
    model: *const PsModel,
    predicate: *const c_char,
    params: *const PsTwoStateParams,
    seed: u64,
    out: *mut PsTwoStateRun,
) -> PsStatus {
    guarded(|| {
        if out.is_null() {
            return null_pointer("out");
        }
        if model.is_null() {
            return null_pointer("model");
        }
        if params.is_null() {
            return null_pointer("params");
        }
        let model = &(*model).0;
        let predicate = match read_str(predicate, "predicate") {
            Ok(t) => t,
            Err(status) => return status,
        };
        let pred = match MetaPredicate::parse(predicate, model) {
            Ok(p) => p,
            Err(e) => return fail(&e),
        };
        let params = match to_params(&*params) {
            Ok(p) => p,
            Err(status) => return status,
        };
        let mut source = match PbnMetaSource::new(model, pred, params.k, seed) {
            Ok(s) => s,
            Err(e) => return fail(&e),
        };
        match run(&mut source, &params) {
            Ok(result) => {
                *out = to_run_struct(&result);
                PsStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Exact steady-state probability of `predicate` (small networks only).
///
/// # Safety
/// `model` must be a live handle; `predicate` a NUL-terminated string;
/// `out` a non-NULL pointer to one f64.
#[no_mangle]
pub unsafe extern "C" fn ps_exact_meta_probability(
    model: *const PsModel,
    predicate: *const c_char,
    out: *mut f64,
) -> PsStatus {
    guarded(|| {
        if out.is_null() {
            return null_pointer("out");
        }
        if model.is_null() {
            return null_pointer("model");
        }
        let model = &(*model).0;
        let predicate = match read_str(predicate, "predicate") {
            Ok(t) => t,
            Err(status) => return status,
        };
        let pred = match MetaPredicate::parse(predicate, model) {
            Ok(p) => p,
            Err(e) => return fail(&e),
        };
        match pbn_steady::exact::exact_meta_probability(model, &pred) {
            Ok(q) => {
                *out = q;
                PsStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Computes the safe pilot range for (r, s). On success writes the inclusive
/// bounds; an empty range writes 0 to both.
///
/// # Safety
/// `out_lower` and `out_upper` must be non-NULL pointers to u64 storage.
#[no_mangle]
pub unsafe extern "C" fn ps_safe_n0_range(
    r: f64,
    s: f64,
    out_lower: *mut u64,
    out_upper: *mut u64,
) -> PsStatus {
    guarded(|| {
        if out_lower.is_null() || out_upper.is_null() {
            return null_pointer("out_lower/out_upper");
        }
        match safe_n0_range(r, s) {
            Ok(Some((lo, hi))) => {
                *out_lower = lo;
                *out_upper = hi;
                PsStatus::Ok
            }
            Ok(None) => {
                *out_lower = 0;
                *out_upper = 0;
                PsStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}
