//! C interface to `msa-core`.
//!
//! Every fallible call returns an [`MsaStatus`]; on failure a message is
//! kept per thread and read with [`msa_last_error_message`]. Handles are
//! opaque and freed by their `_free` function. Strings handed out are
//! freed with [`msa_string_free`]. No call unwinds into C: a panic becomes
//! `MSA_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use msa_core::infer::{load, run_rejection, CompiledProgram, PosteriorEstimate, RejectionConfig};
use msa_core::metrics::{self, Histogram10};
use msa_core::olympics::{self, Experiment, Vignette};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MsaStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    /// Source text failed to parse or compile.
    Parse = 3,
    /// Rejection sampling failed, e.g. the condition is never met.
    Inference = 4,
    InvalidArgument = 5,
    /// No query with the given label.
    NotFound = 6,
    Metrics = 7,
    Json = 8,
    /// The output buffer is too small; the needed length was written.
    BufferTooSmall = 9,
    Panic = 10,
}

/// A compiled program.
pub struct MsaProgram(CompiledProgram);

/// Samples drawn from a program's posterior.
pub struct MsaPosterior(PosteriorEstimate);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let mut bytes = msg.into().into_bytes();
    bytes.retain(|&b| b != 0);
    let c = CString::new(bytes).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

type Fallible = Result<(), (MsaStatus, String)>;

fn guard(f: impl FnOnce() -> Fallible) -> MsaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MsaStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            MsaStatus::Panic
        }
    }
}

fn null(what: &str) -> (MsaStatus, String) {
    (MsaStatus::NullArgument, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, (MsaStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| (MsaStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], (MsaStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (MsaStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

fn owned_string(s: String) -> Result<*mut c_char, (MsaStatus, String)> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|e| (MsaStatus::Json, e.to_string()))
}

fn metrics_error(e: metrics::MetricsError) -> (MsaStatus, String) {
    (MsaStatus::Metrics, e.to_string())
}

/// The message of the last failed call on this thread, or null. Valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn msa_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static version string.
#[no_mangle]
pub extern "C" fn msa_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Free a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn msa_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parse and compile program text.
///
/// # Safety
/// `source` is a NUL-terminated string; `out_program` is writable.
#[no_mangle]
pub unsafe extern "C" fn msa_program_load(source: *const c_char, out_program: *mut *mut MsaProgram) -> MsaStatus {
    guard(|| {
        let slot = out(out_program, "out_program")?;
        *slot = ptr::null_mut();
        let src = text(source, "source")?;
        let program = load(src).map_err(|e| (MsaStatus::Parse, e.to_string()))?;
        *slot = Box::into_raw(Box::new(MsaProgram(program)));
        Ok(())
    })
}

/// # Safety
/// `program` comes from [`msa_program_load`] and is not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn msa_program_free(program: *mut MsaProgram) {
    if !program.is_null() {
        drop(Box::from_raw(program));
    }
}

/// Draw `n_samples` posterior samples by rejection. `max_attempts_per_sample`
/// of 0 keeps the library default.
///
/// # Safety
/// `program` is a live handle; `out_posterior` is writable.
#[no_mangle]
pub unsafe extern "C" fn msa_program_sample(
    program: *const MsaProgram,
    n_samples: usize,
    seed: u64,
    max_attempts_per_sample: u64,
    out_posterior: *mut *mut MsaPosterior,
) -> MsaStatus {
    guard(|| {
        let slot = out(out_posterior, "out_posterior")?;
        *slot = ptr::null_mut();
        let program = program.as_ref().ok_or_else(|| null("program"))?;
        if n_samples == 0 {
            return Err((MsaStatus::InvalidArgument, "n_samples must be at least 1".into()));
        }
        let mut config = RejectionConfig::new(n_samples, seed);
        if max_attempts_per_sample > 0 {
            config.max_attempts_per_sample = max_attempts_per_sample;
        }
        let est = run_rejection(&program.0, &config).map_err(|e| (MsaStatus::Inference, e.to_string()))?;
        *slot = Box::into_raw(Box::new(MsaPosterior(est)));
        Ok(())
    })
}

/// # Safety
/// `posterior` comes from [`msa_program_sample`] and is not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn msa_posterior_free(posterior: *mut MsaPosterior) {
    if !posterior.is_null() {
        drop(Box::from_raw(posterior));
    }
}

unsafe fn query<'a>(posterior: *const MsaPosterior, label: *const c_char) -> Result<&'a [f64], (MsaStatus, String)> {
    let posterior = posterior.as_ref().ok_or_else(|| null("posterior"))?;
    let label = text(label, "label")?;
    posterior
        .0
        .queries
        .get(label)
        .map(Vec::as_slice)
        .ok_or_else(|| (MsaStatus::NotFound, format!("no query labelled {label:?}")))
}

/// Samples per query and traces rejected along the way.
///
/// # Safety
/// `posterior` is a live handle; the out pointers are writable.
#[no_mangle]
pub unsafe extern "C" fn msa_posterior_counts(
    posterior: *const MsaPosterior,
    out_samples: *mut usize,
    out_rejected: *mut u64,
) -> MsaStatus {
    guard(|| {
        let p = posterior.as_ref().ok_or_else(|| null("posterior"))?;
        *out(out_samples, "out_samples")? = p.0.n_samples;
        *out(out_rejected, "out_rejected")? = p.0.n_rejected;
        Ok(())
    })
}

/// Mean of one query.
///
/// # Safety
/// `posterior` is a live handle; `label` is a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn msa_posterior_mean(
    posterior: *const MsaPosterior,
    label: *const c_char,
    out_mean: *mut f64,
) -> MsaStatus {
    guard(|| {
        let xs = query(posterior, label)?;
        *out(out_mean, "out_mean")? = xs.iter().sum::<f64>() / xs.len() as f64;
        Ok(())
    })
}

/// Copy one query's samples into `buffer`. `out_len` always receives the
/// sample count; a short buffer yields `MSA_STATUS_BUFFER_TOO_SMALL` and
/// copies nothing.
///
/// # Safety
/// `buffer` holds `capacity` doubles (or is null with capacity 0).
#[no_mangle]
pub unsafe extern "C" fn msa_posterior_samples(
    posterior: *const MsaPosterior,
    label: *const c_char,
    buffer: *mut f64,
    capacity: usize,
    out_len: *mut usize,
) -> MsaStatus {
    guard(|| {
        let xs = query(posterior, label)?;
        *out(out_len, "out_len")? = xs.len();
        if capacity < xs.len() {
            return Err((MsaStatus::BufferTooSmall, format!("need room for {} samples", xs.len())));
        }
        if buffer.is_null() {
            return Err(null("buffer"));
        }
        ptr::copy_nonoverlapping(xs.as_ptr(), buffer, xs.len());
        Ok(())
    })
}

/// The whole estimate as JSON; free with [`msa_string_free`].
///
/// # Safety
/// `posterior` is a live handle; `out_json` is writable.
#[no_mangle]
pub unsafe extern "C" fn msa_posterior_to_json(posterior: *const MsaPosterior, out_json: *mut *mut c_char) -> MsaStatus {
    guard(|| {
        let slot = out(out_json, "out_json")?;
        *slot = ptr::null_mut();
        let p = posterior.as_ref().ok_or_else(|| null("posterior"))?;
        let json = serde_json::to_string(&p.0).map_err(|e| (MsaStatus::Json, e.to_string()))?;
        *slot = owned_string(json)?;
        Ok(())
    })
}

/// Counts of `samples` over ten buckets of [0, 100] into `out_counts[10]`.
///
/// # Safety
/// `samples` holds `len` doubles; `out_counts` has room for 10 values.
#[no_mangle]
pub unsafe extern "C" fn msa_bucketize(samples: *const f64, len: usize, out_counts: *mut u64) -> MsaStatus {
    guard(|| {
        let xs = slice(samples, len, "samples")?;
        if out_counts.is_null() {
            return Err(null("out_counts"));
        }
        let h = metrics::bucketize(xs).map_err(metrics_error)?;
        ptr::copy_nonoverlapping(h.counts.as_ptr(), out_counts, 10);
        Ok(())
    })
}

unsafe fn histogram(counts: *const u64, what: &str) -> Result<Histogram10, (MsaStatus, String)> {
    let c: [u64; 10] = slice(counts, 10, what)?.try_into().expect("ten counts");
    Histogram10::from_counts(c).map_err(metrics_error)
}

/// Wasserstein distance on the 0-100 scale between two 10-bucket count
/// arrays.
///
/// # Safety
/// `a` and `b` each hold 10 counts.
#[no_mangle]
pub unsafe extern "C" fn msa_wasserstein(a: *const u64, b: *const u64, out_distance: *mut f64) -> MsaStatus {
    guard(|| {
        let (a, b) = (histogram(a, "a")?, histogram(b, "b")?);
        *out(out_distance, "out_distance")? = metrics::wasserstein(&a, &b);
        Ok(())
    })
}

/// Total variation distance between two 10-bucket count arrays.
///
/// # Safety
/// `a` and `b` each hold 10 counts.
#[no_mangle]
pub unsafe extern "C" fn msa_tvd(a: *const u64, b: *const u64, out_distance: *mut f64) -> MsaStatus {
    guard(|| {
        let (a, b) = (histogram(a, "a")?, histogram(b, "b")?);
        *out(out_distance, "out_distance")? = metrics::tvd(&a, &b);
        Ok(())
    })
}

/// Squared Pearson correlation of two series of length `len`.
///
/// # Safety
/// `x` and `y` each hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn msa_mean_r2(x: *const f64, y: *const f64, len: usize, out_r2: *mut f64) -> MsaStatus {
    guard(|| {
        let (x, y) = (slice(x, len, "x")?, slice(y, len, "y")?);
        *out(out_r2, "out_r2")? = metrics::mean_r2(x, y).map_err(metrics_error)?;
        Ok(())
    })
}

/// The vignettes of one experiment ("e1", "e2" or "e3") as a JSON array.
/// e3 uses `commentary_json` if given, else the shipped commentary.
///
/// # Safety
/// String arguments are NUL-terminated; `commentary_json` may be null.
#[no_mangle]
pub unsafe extern "C" fn msa_generate_experiment(
    experiment: *const c_char,
    seed: u64,
    commentary_json: *const c_char,
    out_json: *mut *mut c_char,
) -> MsaStatus {
    guard(|| {
        let slot = out(out_json, "out_json")?;
        *slot = ptr::null_mut();
        let exp: Experiment = text(experiment, "experiment")?
            .parse()
            .map_err(|e: olympics::OlympicsError| (MsaStatus::InvalidArgument, e.to_string()))?;
        let commentary = if commentary_json.is_null() {
            olympics::default_commentary()
        } else {
            serde_json::from_str(text(commentary_json, "commentary_json")?)
                .map_err(|e| (MsaStatus::Json, e.to_string()))?
        };
        let set = olympics::sample_experiment_set(exp, seed, Some(&commentary))
            .map_err(|e| (MsaStatus::InvalidArgument, e.to_string()))?;
        *slot = owned_string(serde_json::to_string(&set).map_err(|e| (MsaStatus::Json, e.to_string()))?)?;
        Ok(())
    })
}

/// Gold program text for one vignette (JSON) with default parameters.
///
/// # Safety
/// `vignette_json` is NUL-terminated; `out_source` is writable.
#[no_mangle]
pub unsafe extern "C" fn msa_gold_model_source(vignette_json: *const c_char, out_source: *mut *mut c_char) -> MsaStatus {
    guard(|| {
        let slot = out(out_source, "out_source")?;
        *slot = ptr::null_mut();
        let v: Vignette = serde_json::from_str(text(vignette_json, "vignette_json")?)
            .map_err(|e| (MsaStatus::Json, e.to_string()))?;
        let src = olympics::gold_model(&v, &olympics::GoldParams::default())
            .map_err(|e| (MsaStatus::InvalidArgument, e.to_string()))?;
        *slot = owned_string(src.text)?;
        Ok(())
    })
}
