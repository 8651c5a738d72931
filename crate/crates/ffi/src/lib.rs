//! C ABI over the signalkg engine.
//!
//! A knowledge base is loaded into an opaque [`SkgKb`] handle. Every call
//! returns an [`SkgStatus`]; on failure, [`skg_last_error_message`] describes
//! what went wrong on the calling thread. Strings handed out by the library
//! are NUL-terminated UTF-8 and must be released with [`skg_string_free`].

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use signalkg::compiler::{compile, export_bn, BayesianNetwork};
use signalkg::kgmodel::{parse_kb, Diagnostic, KnowledgeBase};
use signalkg::observations::parse_observations;
use signalkg::service::{self, InferOptions};
use signalkg::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Syntax = 3,
    InvalidKb = 4,
    UnknownId = 5,
    TooManyParents = 6,
    NetworkTooLarge = 7,
    ZeroWeight = 8,
    ZeroProbability = 9,
    ConflictingEvidence = 10,
    RecompileNeeded = 11,
    InvalidNetwork = 12,
    InvalidObservations = 13,
    InvalidArgument = 14,
    Io = 15,
    Panic = 16,
}

impl From<&Error> for SkgStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Syntax { .. } => SkgStatus::Syntax,
            Error::InvalidKb(_) => SkgStatus::InvalidKb,
            Error::UnknownId { .. } => SkgStatus::UnknownId,
            Error::TooManyParents { .. } => SkgStatus::TooManyParents,
            Error::NetworkTooLarge { .. } => SkgStatus::NetworkTooLarge,
            Error::ZeroWeight => SkgStatus::ZeroWeight,
            Error::ZeroProbability => SkgStatus::ZeroProbability,
            Error::ConflictingEvidence { .. } => SkgStatus::ConflictingEvidence,
            Error::RecompileNeeded { .. } => SkgStatus::RecompileNeeded,
            Error::InvalidNetwork(_) => SkgStatus::InvalidNetwork,
            Error::InvalidObservations(_) => SkgStatus::InvalidObservations,
            Error::InvalidArgument(_) => SkgStatus::InvalidArgument,
            Error::Io(_) => SkgStatus::Io,
        }
    }
}

/// A validated knowledge base and its compiled network.
pub struct SkgKb {
    kb: KnowledgeBase,
    diagnostics: Vec<Diagnostic>,
    bn: BayesianNetwork,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let message = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = message);
}

struct Failure(SkgStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(SkgStatus::from(&e), format!("{}: {e}", e.code()))
    }
}

/// Runs `body`, recording any failure or panic as the thread's last error.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> SkgStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_last_error("");
            SkgStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_last_error(&message);
            status
        }
        Err(_) => {
            set_last_error("panic: internal error");
            SkgStatus::Panic
        }
    }
}

unsafe fn input<'a>(s: *const c_char) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(Failure(SkgStatus::NullPointer, "null string argument".into()));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| Failure(SkgStatus::InvalidUtf8, format!("argument is not UTF-8: {e}")))
}

unsafe fn handle<'a>(kb: *const SkgKb) -> Result<&'a SkgKb, Failure> {
    kb.as_ref()
        .ok_or_else(|| Failure(SkgStatus::NullPointer, "null knowledge-base handle".into()))
}

unsafe fn output(out: *mut *mut c_char, text: String) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure(SkgStatus::NullPointer, "null output pointer".into()));
    }
    let s = CString::new(text)
        .map_err(|_| Failure(SkgStatus::InvalidArgument, "output contains NUL".into()))?;
    *out = s.into_raw();
    Ok(())
}

fn build(text: &str) -> Result<SkgKb, Failure> {
    let parsed = parse_kb(text)?;
    if !parsed.is_valid() {
        let lines: Vec<String> = parsed
            .diagnostics
            .iter()
            .filter(|d| d.is_error())
            .map(ToString::to_string)
            .collect();
        let count = lines.len();
        return Err(Failure(
            SkgStatus::InvalidKb,
            format!("invalid-kb: {count} error-level diagnostic(s)\n{}", lines.join("\n")),
        ));
    }
    let bn = compile(&parsed.kb)?;
    Ok(SkgKb {
        kb: parsed.kb,
        diagnostics: parsed.diagnostics,
        bn,
    })
}

unsafe fn store(out: *mut *mut SkgKb, kb: SkgKb) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure(SkgStatus::NullPointer, "null output pointer".into()));
    }
    *out = Box::into_raw(Box::new(kb));
    Ok(())
}

/// Parses, validates and compiles a knowledge base from Turtle text.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn skg_kb_parse(text: *const c_char, out: *mut *mut SkgKb) -> SkgStatus {
    guard(|| {
        let kb = build(input(text)?)?;
        store(out, kb)
    })
}

/// Like [`skg_kb_parse`], reading the Turtle from a file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn skg_kb_load(path: *const c_char, out: *mut *mut SkgKb) -> SkgStatus {
    guard(|| {
        let path = input(path)?;
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure(SkgStatus::Io, format!("io: {path}: {e}")))?;
        store(out, build(&text)?)
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `kb` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn skg_kb_free(kb: *mut SkgKb) {
    if !kb.is_null() {
        drop(Box::from_raw(kb));
    }
}

/// Warnings recorded while loading, one `SEVERITY code subject: message`
/// line each.
///
/// # Safety
/// `kb` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn skg_kb_diagnostics(kb: *const SkgKb, out: *mut *mut c_char) -> SkgStatus {
    guard(|| {
        let kb = handle(kb)?;
        let text: String = kb.diagnostics.iter().map(|d| format!("{d}\n")).collect();
        output(out, text)
    })
}

/// Number of nodes in the compiled network.
///
/// # Safety
/// `kb` must be a live handle or null (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn skg_kb_node_count(kb: *const SkgKb) -> usize {
    kb.as_ref().map_or(0, |kb| kb.bn.len())
}

/// The compiled network in its JSON interchange form.
///
/// # Safety
/// `kb` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn skg_kb_compile_json(kb: *const SkgKb, out: *mut *mut c_char) -> SkgStatus {
    guard(|| output(out, export_bn(&handle(kb)?.bn)))
}

/// Posterior JSON for the given observations (evidence JSON or JSON-LD;
/// null means no evidence). `samples == 0` selects the default count;
/// `workers == 0` means one.
///
/// # Safety
/// `kb` must be a live handle, `evidence` null or a NUL-terminated string,
/// and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn skg_kb_infer(
    kb: *const SkgKb,
    evidence: *const c_char,
    samples: usize,
    seed: u64,
    exact: bool,
    workers: usize,
    out: *mut *mut c_char,
) -> SkgStatus {
    guard(|| {
        let kb = handle(kb)?;
        let records = if evidence.is_null() {
            Vec::new()
        } else {
            parse_observations(input(evidence)?)?
        };
        let options = InferOptions {
            samples: (samples > 0).then_some(samples),
            seed: Some(seed),
            exact,
            workers: Some(workers.max(1)),
        };
        let posterior = service::infer(&kb.kb, &records, &options)?;
        output(out, service::posterior_json(&posterior).to_string())
    })
}

/// Simulates one scenario. `forced` is null or a JSON object mapping node
/// labels to booleans. The result holds the scenario and its observations.
///
/// # Safety
/// `kb` must be a live handle, `forced` null or a NUL-terminated string,
/// and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn skg_kb_simulate(
    kb: *const SkgKb,
    seed: u64,
    forced: *const c_char,
    out: *mut *mut c_char,
) -> SkgStatus {
    guard(|| {
        let kb = handle(kb)?;
        let labels: BTreeMap<String, bool> = if forced.is_null() {
            BTreeMap::new()
        } else {
            serde_json::from_str(input(forced)?)
                .map_err(|e| Failure(SkgStatus::InvalidArgument, format!("invalid-argument: {e}")))?
        };
        let forced = service::forced_from_labels(&labels)?;
        let (scenario, records) = service::run_simulation(&kb.bn, &forced, seed)?;
        output(out, service::simulation_json(&scenario, &records).to_string())
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn skg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread, empty after a success.
/// Valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn skg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Stable machine-readable name of a status, e.g. `"zero-weight"`.
#[no_mangle]
pub extern "C" fn skg_status_name(status: SkgStatus) -> *const c_char {
    let name: &'static CStr = match status {
        SkgStatus::Ok => c"ok",
        SkgStatus::NullPointer => c"null-pointer",
        SkgStatus::InvalidUtf8 => c"invalid-utf8",
        SkgStatus::Syntax => c"syntax",
        SkgStatus::InvalidKb => c"invalid-kb",
        SkgStatus::UnknownId => c"unknown-id",
        SkgStatus::TooManyParents => c"too-many-parents",
        SkgStatus::NetworkTooLarge => c"network-too-large",
        SkgStatus::ZeroWeight => c"zero-weight",
        SkgStatus::ZeroProbability => c"zero-probability",
        SkgStatus::ConflictingEvidence => c"conflicting-evidence",
        SkgStatus::RecompileNeeded => c"recompile-needed",
        SkgStatus::InvalidNetwork => c"invalid-network",
        SkgStatus::InvalidObservations => c"invalid-observations",
        SkgStatus::InvalidArgument => c"invalid-argument",
        SkgStatus::Io => c"io",
        SkgStatus::Panic => c"panic",
    };
    name.as_ptr()
}

/// Library version string.
#[no_mangle]
pub extern "C" fn skg_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}
