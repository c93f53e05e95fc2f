//! C ABI over the `spreader` library.
//!
//! Every function returns an [`SpStatus`]; on failure a message is available
//! from [`sp_last_error`] on the same thread. Handles are opaque and must be
//! released with their matching `_free` function. Panics never cross the
//! boundary and are reported as `SP_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use spreader::corpus::{load_corpus, split_corpus};
use spreader::evaluation::{evaluate_model, fit_pipeline};
use spreader::persist::{load_model, save_model};
use spreader::{AuthorDocument, Corpus, Error, ErrorCategory, Label, Language, LinearModel, PipelineConfig, SplitSpec};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Usage = 3,
    Data = 4,
    Model = 5,
    Io = 6,
    Panic = 7,
}

/// Confusion counts and derived metrics for one evaluation.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SpMetrics {
    pub true_positives: usize,
    pub true_negatives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
}

/// Opaque labeled or unlabeled author corpus.
pub struct SpCorpus {
    inner: Corpus,
}

/// Opaque trained model (vocabularies plus classifier).
pub struct SpModel {
    inner: LinearModel,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let mut bytes = message.into().into_bytes();
    bytes.retain(|&b| b != 0);
    let c = CString::new(bytes).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(err: &Error) -> SpStatus {
    if matches!(err, Error::Io { .. }) {
        return SpStatus::Io;
    }
    match err.category() {
        ErrorCategory::Usage => SpStatus::Usage,
        ErrorCategory::Data => SpStatus::Data,
        ErrorCategory::Model => SpStatus::Model,
    }
}

struct Failure(SpStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SpStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SpStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            SpStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(SpStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(SpStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

fn parse_language(code: &str) -> Result<Language, Failure> {
    code.parse().map_err(|e: Error| Failure(SpStatus::Usage, e.to_string()))
}

fn parse_label(v: u8) -> Result<Label, Failure> {
    Label::from_u8(v).ok_or_else(|| Failure(SpStatus::Usage, format!("label must be 0 or 1, got {v}")))
}

/// Message for the most recent failure on this thread, or null. The pointer
/// stays valid until the next `sp_*` call on the same thread.
#[no_mangle]
pub extern "C" fn sp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads a PAN-layout directory. `language` is `"en"` or `"es"`.
///
/// # Safety
/// `dir` and `language` must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_corpus_load(
    dir: *const c_char,
    language: *const c_char,
    out: *mut *mut SpCorpus,
) -> SpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let dir = str_arg(dir, "dir")?;
        let language = parse_language(str_arg(language, "language")?)?;
        let inner = load_corpus(dir, language)?;
        *out = Box::into_raw(Box::new(SpCorpus { inner }));
        Ok(())
    })
}

/// Number of authors, or 0 for a null handle.
///
/// # Safety
/// `corpus` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sp_corpus_len(corpus: *const SpCorpus) -> usize {
    corpus.as_ref().map_or(0, |c| c.inner.len())
}

/// Stratified seeded split; `numerator / denominator` of each class goes to
/// the training side.
///
/// # Safety
/// `corpus` must be a live handle; `train` and `test` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_corpus_split(
    corpus: *const SpCorpus,
    numerator: u64,
    denominator: u64,
    seed: u64,
    train: *mut *mut SpCorpus,
    test: *mut *mut SpCorpus,
) -> SpStatus {
    guard(|| {
        let corpus = ref_arg(corpus, "corpus")?;
        if train.is_null() || test.is_null() {
            return Err(null("train/test"));
        }
        let spec = SplitSpec::new(numerator, denominator, seed)?;
        let (a, b) = split_corpus(&corpus.inner, &spec)?;
        *train = Box::into_raw(Box::new(SpCorpus { inner: a }));
        *test = Box::into_raw(Box::new(SpCorpus { inner: b }));
        Ok(())
    })
}

/// # Safety
/// `corpus` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sp_corpus_free(corpus: *mut SpCorpus) {
    if !corpus.is_null() {
        drop(Box::from_raw(corpus));
    }
}

/// Trains on a labeled corpus. A null `pipeline` selects the default system
/// for the corpus language; otherwise it uses the text form accepted by the
/// CLI, e.g. `"svm:tfidf/char/1-3/3000/1"`.
///
/// # Safety
/// `corpus` must be a live handle; `pipeline` null or NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sp_model_train(
    corpus: *const SpCorpus,
    pipeline: *const c_char,
    out: *mut *mut SpModel,
) -> SpStatus {
    guard(|| {
        let corpus = ref_arg(corpus, "corpus")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let config = if pipeline.is_null() {
            PipelineConfig::final_system(corpus.inner.language())
        } else {
            str_arg(pipeline, "pipeline")?.parse::<PipelineConfig>()?
        };
        let (inner, _) = fit_pipeline(&corpus.inner, &config)?;
        *out = Box::into_raw(Box::new(SpModel { inner }));
        Ok(())
    })
}

/// # Safety
/// `path` must be NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sp_model_load(path: *const c_char, out: *mut *mut SpModel) -> SpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = load_model(str_arg(path, "path")?)?;
        *out = Box::into_raw(Box::new(SpModel { inner }));
        Ok(())
    })
}

/// # Safety
/// `model` must be a live handle; `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn sp_model_save(model: *const SpModel, path: *const c_char) -> SpStatus {
    guard(|| {
        let model = ref_arg(model, "model")?;
        save_model(&model.inner, str_arg(path, "path")?)?;
        Ok(())
    })
}

/// Feature-space dimension, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sp_model_dimension(model: *const SpModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.dimension())
}

/// Classifies one author given their raw tweets. Writes the label
/// (0 = true-news, 1 = fake-news) and the decision value; either output may
/// be null.
///
/// # Safety
/// `model` must be a live handle; `tweets` must point to `count`
/// NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn sp_model_predict(
    model: *const SpModel,
    tweets: *const *const c_char,
    count: usize,
    label: *mut u8,
    decision: *mut f64,
) -> SpStatus {
    guard(|| {
        let model = ref_arg(model, "model")?;
        if tweets.is_null() && count > 0 {
            return Err(null("tweets"));
        }
        let mut texts = Vec::with_capacity(count);
        for i in 0..count {
            texts.push(str_arg(*tweets.add(i), "tweet")?.to_owned());
        }
        let doc = AuthorDocument::new("author", texts, None)?;
        let p = model.inner.predict_author(&doc)?;
        if !label.is_null() {
            *label = p.label.as_u8();
        }
        if !decision.is_null() {
            *decision = p.decision;
        }
        Ok(())
    })
}

/// Scores a model on a labeled corpus with `positive` (0 or 1) as the
/// positive class.
///
/// # Safety
/// `model` and `corpus` must be live handles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sp_model_evaluate(
    model: *const SpModel,
    corpus: *const SpCorpus,
    positive: u8,
    out: *mut SpMetrics,
) -> SpStatus {
    guard(|| {
        let model = ref_arg(model, "model")?;
        let corpus = ref_arg(corpus, "corpus")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let report = evaluate_model(&model.inner, &corpus.inner, parse_label(positive)?)?;
        let (c, m) = (report.confusion, report.metrics);
        *out = SpMetrics {
            true_positives: c.tp,
            true_negatives: c.tn,
            false_positives: c.fp,
            false_negatives: c.fn_,
            precision: m.precision,
            recall: m.recall,
            f1: m.f1,
            accuracy: m.accuracy,
        };
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sp_model_free(model: *mut SpModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}
