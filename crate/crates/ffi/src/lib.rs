//! C interface to the parser toolkit.
//!
//! Every fallible function returns a [`TupaStatus`]; on failure a message is
//! available from [`tupa_last_error`] on the same thread. Graph corpora cross
//! the boundary as MRP JSON-lines text. Strings returned through `out`
//! parameters are owned by the caller and released with
//! [`tupa_string_free`]; models with [`tupa_model_free`].

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::{c_char, c_double, c_uint};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use tupa_mrp::classifier::{parse_corpus, train, Model, TrainConfig};
use tupa_mrp::cli::pair_companions;
use tupa_mrp::constraints::profile_for;
use tupa_mrp::evaluator::{score_corpus, ScoreParams};
use tupa_mrp::graph::{corpus_stats, read_mrp, write_mrp, Graph};
use tupa_mrp::irep::to_intermediate;
use tupa_mrp::oracle::gold_sequence;
use tupa_mrp::Error;

/// Result of a call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TupaStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    /// Malformed JSON or transition text.
    Format = 4,
    /// A graph or companion file failed validation or conversion.
    Invalid = 5,
    UnknownFramework = 6,
    Oracle = 7,
    Model = 8,
    Evaluation = 9,
    /// A Rust panic was caught at the boundary.
    Internal = 10,
}

/// A trained model.
pub struct TupaModel {
    model: Model,
    framework: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

fn status_of(e: &Error) -> TupaStatus {
    match e {
        Error::Io(_) => TupaStatus::Io,
        Error::Json { .. } | Error::TransitionFormat(_) => TupaStatus::Format,
        Error::Validation { .. }
        | Error::Companion { .. }
        | Error::Conllu { .. }
        | Error::Conversion(_)
        | Error::Illegal(_)
        | Error::Replay { .. }
        | Error::Profile(_) => TupaStatus::Invalid,
        Error::UnknownFramework(_) => TupaStatus::UnknownFramework,
        Error::Oracle(_) => TupaStatus::Oracle,
        Error::Model(_) | Error::NoTrainingData => TupaStatus::Model,
        Error::Evaluation(_) => TupaStatus::Evaluation,
    }
}

struct Failure(TupaStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

/// Runs `f`, recording failures and turning panics into `Internal`.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> TupaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            TupaStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(&message);
            status
        }
        Err(_) => {
            set_error("internal error");
            TupaStatus::Internal
        }
    }
}

unsafe fn text<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(TupaStatus::NullArgument, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(TupaStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

unsafe fn optional_text<'a>(p: *const c_char, name: &str) -> Result<Option<&'a str>, Failure> {
    if p.is_null() {
        Ok(None)
    } else {
        text(p, name).map(Some)
    }
}

fn check_out<T>(out: *mut T) -> Result<(), Failure> {
    if out.is_null() {
        Err(Failure(TupaStatus::NullArgument, "out is null".into()))
    } else {
        Ok(())
    }
}

fn graphs(text: &str) -> Result<Vec<Graph>, Failure> {
    Ok(read_mrp(text.as_bytes())?)
}

fn owned(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map_or(ptr::null_mut(), CString::into_raw)
}

fn mrp_text(graphs: &[Graph]) -> Result<String, Failure> {
    let mut buf = Vec::new();
    write_mrp(graphs, &mut buf)?;
    Ok(String::from_utf8(buf).expect("MRP output is UTF-8"))
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn tupa_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, statically allocated.
#[no_mangle]
pub extern "C" fn tupa_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed yet.
#[no_mangle]
pub unsafe extern "C" fn tupa_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads a model file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tupa_model_load(path: *const c_char, out: *mut *mut TupaModel) -> TupaStatus {
    guard(|| {
        check_out(out)?;
        let path = text(path, "path")?;
        let model = Model::load(Path::new(path))?;
        *out = into_handle(model);
        Ok(())
    })
}

fn into_handle(model: Model) -> *mut TupaModel {
    let framework = CString::new(model.framework.clone()).unwrap_or_default();
    Box::into_raw(Box::new(TupaModel { model, framework }))
}

/// Trains a model on MRP graphs and their companion graphs, matched by id.
/// `framework` may be null to use the first graph's framework.
///
/// # Safety
/// String arguments must be NUL-terminated or null where allowed; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn tupa_model_train(
    graphs_mrp: *const c_char,
    companion_mrp: *const c_char,
    framework: *const c_char,
    epochs: c_uint,
    seed: u64,
    out: *mut *mut TupaModel,
) -> TupaStatus {
    guard(|| {
        check_out(out)?;
        let gs = graphs(text(graphs_mrp, "graphs_mrp")?)?;
        let cs = graphs(text(companion_mrp, "companion_mrp")?)?;
        let fw = match optional_text(framework, "framework")? {
            Some(f) => f.to_owned(),
            None => gs.first().map(|g| g.framework.clone()).unwrap_or_default(),
        };
        let profile = profile_for(&fw)?;
        let corpus = pair_companions(gs, &cs)?;
        let config = TrainConfig {
            epochs: epochs.max(1) as usize,
            seed,
            ..TrainConfig::default()
        };
        *out = into_handle(train(&corpus, &profile, &config)?);
        Ok(())
    })
}

/// Writes a model file.
///
/// # Safety
/// `model` must be a live handle; `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn tupa_model_save(model: *const TupaModel, path: *const c_char) -> TupaStatus {
    guard(|| {
        let m = model
            .as_ref()
            .ok_or_else(|| Failure(TupaStatus::NullArgument, "model is null".into()))?;
        m.model.save(Path::new(text(path, "path")?))?;
        Ok(())
    })
}

/// The model's framework tag, owned by the handle. Null for a null handle.
///
/// # Safety
/// `model` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn tupa_model_framework(model: *const TupaModel) -> *const c_char {
    model.as_ref().map_or(ptr::null(), |m| m.framework.as_ptr())
}

/// Releases a model. Null is ignored.
///
/// # Safety
/// `model` must come from this library and not have been freed yet.
#[no_mangle]
pub unsafe extern "C" fn tupa_model_free(model: *mut TupaModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Parses the sentences of `companion_mrp`; `*out` receives MRP graphs.
///
/// # Safety
/// `model` must be a live handle, `companion_mrp` NUL-terminated and `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn tupa_parse(
    model: *const TupaModel,
    companion_mrp: *const c_char,
    out: *mut *mut c_char,
) -> TupaStatus {
    guard(|| {
        check_out(out)?;
        let m = &model
            .as_ref()
            .ok_or_else(|| Failure(TupaStatus::NullArgument, "model is null".into()))?
            .model;
        let companions = graphs(text(companion_mrp, "companion_mrp")?)?;
        let shells: Vec<Graph> = companions
            .iter()
            .map(|c| Graph::new(c.id.clone(), m.framework.clone(), c.input.clone()))
            .collect();
        let corpus = pair_companions(shells, &companions)?;
        let parsed: Vec<Graph> = parse_corpus(m, &corpus, &m.profile).into_iter().map(|p| p.graph).collect();
        *out = owned(mrp_text(&parsed)?);
        Ok(())
    })
}

/// Scores system graphs against gold graphs (matched by id). `*f1`
/// receives the overall F; if `report_json` is not null it receives the
/// full report.
///
/// # Safety
/// Strings must be NUL-terminated; `f1` writable; `report_json` writable
/// or null.
#[no_mangle]
pub unsafe extern "C" fn tupa_evaluate(
    gold_mrp: *const c_char,
    system_mrp: *const c_char,
    restarts: c_uint,
    iterations: c_uint,
    seed: u64,
    f1: *mut c_double,
    report_json: *mut *mut c_char,
) -> TupaStatus {
    guard(|| {
        check_out(f1)?;
        let golds = graphs(text(gold_mrp, "gold_mrp")?)?;
        let systems = graphs(text(system_mrp, "system_mrp")?)?;
        let params = ScoreParams {
            restarts: restarts.max(1) as usize,
            iterations: iterations as usize,
            seed,
        };
        let report = score_corpus(&golds, &systems, &params)?;
        *f1 = report.overall.f1;
        if !report_json.is_null() {
            *report_json = owned(report.to_json());
        }
        Ok(())
    })
}

/// Gold transition sequences, one block per graph: `# id`, one transition
/// per line, blank line.
///
/// # Safety
/// Strings must be NUL-terminated (`framework` may be null); `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tupa_oracle(
    graphs_mrp: *const c_char,
    companion_mrp: *const c_char,
    framework: *const c_char,
    out: *mut *mut c_char,
) -> TupaStatus {
    guard(|| {
        check_out(out)?;
        let gs = graphs(text(graphs_mrp, "graphs_mrp")?)?;
        let cs = graphs(text(companion_mrp, "companion_mrp")?)?;
        let fw = optional_text(framework, "framework")?;
        let mut dump = String::new();
        for (g, rows) in pair_companions(gs, &cs)? {
            let profile = profile_for(fw.unwrap_or(&g.framework))?;
            let seq = gold_sequence(&to_intermediate(&g, &rows, &profile)?, &rows)?;
            dump.push_str(&format!("# {}\n", g.id));
            for t in seq {
                dump.push_str(&format!("{t}\n"));
            }
            dump.push('\n');
        }
        *out = owned(dump);
        Ok(())
    })
}

/// Cycle statistics of a corpus as JSON.
///
/// # Safety
/// `graphs_mrp` must be NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tupa_corpus_stats(graphs_mrp: *const c_char, out: *mut *mut c_char) -> TupaStatus {
    guard(|| {
        check_out(out)?;
        let gs = graphs(text(graphs_mrp, "graphs_mrp")?)?;
        *out = owned(serde_json::to_string(&corpus_stats(&gs)).expect("stats serialize"));
        Ok(())
    })
}
