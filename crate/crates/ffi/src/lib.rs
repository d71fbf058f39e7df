//! C ABI over the lifelong sentiment library.
//!
//! Objects cross the boundary as opaque handles created by `ls_*_new`-style
//! constructors and released with the matching `ls_*_free`. Every fallible
//! call returns an [`LsStatus`]; on failure a message is kept per thread and
//! can be fetched with [`ls_last_error_message`]. Strings returned to the
//! caller are owned by the caller and must be released with
//! [`ls_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lifelong_sentiment::corpus::{load_domain, LabelMode};
use lifelong_sentiment::evaluation::macro_f1;
use lifelong_sentiment::{ClassLabel, Document, DomainCorpus, EngineConfig, Error, LifelongState, NbModel};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LsStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// File system failure; the message names the path.
    Io = 3,
    /// Malformed input file or text.
    Parse = 4,
    /// Contract violation such as a duplicate domain or too few domains.
    InvalidArgument = 5,
    /// Caller-provided buffer is too small; the required length was written.
    BufferTooSmall = 6,
    /// The library panicked; the handle involved should be discarded.
    Panic = 7,
}

/// Sentiment class as seen from C.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LsClass {
    Positive = 0,
    Negative = 1,
}

impl From<ClassLabel> for LsClass {
    fn from(c: ClassLabel) -> Self {
        match c {
            ClassLabel::Positive => LsClass::Positive,
            ClassLabel::Negative => LsClass::Negative,
        }
    }
}

impl From<LsClass> for ClassLabel {
    fn from(c: LsClass) -> Self {
        match c {
            LsClass::Positive => ClassLabel::Positive,
            LsClass::Negative => ClassLabel::Negative,
        }
    }
}

/// Engine settings. Obtain defaults from [`ls_engine_config_default`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LsEngineConfig {
    pub lambda: f64,
    pub select_percent: f64,
    pub min_avg_freq: f64,
    pub min_initial_domains: usize,
    pub restrict_to_kb: bool,
    pub self_study_passes: usize,
    pub score_after_refit: bool,
}

impl From<&EngineConfig> for LsEngineConfig {
    fn from(c: &EngineConfig) -> Self {
        LsEngineConfig {
            lambda: c.lambda,
            select_percent: c.select_percent,
            min_avg_freq: c.min_avg_freq,
            min_initial_domains: c.min_initial_domains,
            restrict_to_kb: c.restrict_to_kb,
            self_study_passes: c.self_study_passes,
            score_after_refit: c.score_after_refit,
        }
    }
}

impl From<&LsEngineConfig> for EngineConfig {
    fn from(c: &LsEngineConfig) -> Self {
        EngineConfig {
            lambda: c.lambda,
            select_percent: c.select_percent,
            min_avg_freq: c.min_avg_freq,
            min_initial_domains: c.min_initial_domains,
            restrict_to_kb: c.restrict_to_kb,
            self_study_passes: c.self_study_passes,
            score_after_refit: c.score_after_refit,
        }
    }
}

/// Opaque domain corpus.
pub struct LsCorpus(DomainCorpus);

/// Opaque fitted naive Bayes model.
pub struct LsModel(NbModel);

/// Opaque lifelong learner: cumulative model plus knowledge base.
pub struct LsEngine(LifelongState);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: impl Into<String>) {
    let msg = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> LsStatus {
    match e {
        Error::Io { .. } | Error::Locked(_) | Error::DigestMismatch { .. } => LsStatus::Io,
        Error::Parse { .. } | Error::UnknownLabel { .. } | Error::EmptyFile(_) | Error::VersionMismatch(_) => {
            LsStatus::Parse
        }
        _ => LsStatus::InvalidArgument,
    }
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), LsStatus>) -> LsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LsStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => {
            set_last_error("internal panic");
            LsStatus::Panic
        }
    }
}

fn fail(e: Error) -> LsStatus {
    let status = status_of(&e);
    set_last_error(e.to_string());
    status
}

fn null(what: &str) -> LsStatus {
    set_last_error(format!("{what} must not be null"));
    LsStatus::NullArgument
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, LsStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_last_error(format!("{what} is not valid UTF-8"));
        LsStatus::InvalidUtf8
    })
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, LsStatus> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, LsStatus> {
    p.as_ref().ok_or_else(|| null(what))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map_or(ptr::null_mut(), CString::into_raw)
}

fn mode(labeled: bool) -> LabelMode {
    if labeled {
        LabelMode::Labeled
    } else {
        LabelMode::Unlabeled
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ls_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copy of the calling thread's last error message, or NULL if none.
/// Release with [`ls_string_free`].
#[no_mangle]
pub extern "C" fn ls_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null_mut(), |m| m.clone().into_raw()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ls_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a domain from text: `label TAB text` lines when `labeled`,
/// otherwise one review per line.
///
/// # Safety
/// `name` and `text` must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ls_corpus_parse(
    name: *const c_char,
    text: *const c_char,
    labeled: bool,
    out: *mut *mut LsCorpus,
) -> LsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let name = str_arg(name, "name")?;
        let text = str_arg(text, "text")?;
        let corpus = DomainCorpus::parse(name, name, text, mode(labeled)).map_err(fail)?;
        *out = Box::into_raw(Box::new(LsCorpus(corpus)));
        Ok(())
    })
}

/// Loads a domain file; see [`ls_corpus_parse`] for the format.
///
/// # Safety
/// `path` and `name` must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ls_corpus_load(
    path: *const c_char,
    name: *const c_char,
    labeled: bool,
    out: *mut *mut LsCorpus,
) -> LsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let path = str_arg(path, "path")?;
        let name = str_arg(name, "name")?;
        let corpus = load_domain(path, name, mode(labeled)).map_err(fail)?;
        *out = Box::into_raw(Box::new(LsCorpus(corpus)));
        Ok(())
    })
}

/// Number of documents, or 0 for NULL.
///
/// # Safety
/// `corpus` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ls_corpus_len(corpus: *const LsCorpus) -> usize {
    corpus.as_ref().map_or(0, |c| c.0.len())
}

/// # Safety
/// `corpus` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ls_corpus_free(corpus: *mut LsCorpus) {
    if !corpus.is_null() {
        drop(Box::from_raw(corpus));
    }
}

/// Fits a model on a labeled corpus with smoothing `lambda` in (0, 1].
///
/// # Safety
/// `corpus` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ls_model_fit(corpus: *const LsCorpus, lambda: f64, out: *mut *mut LsModel) -> LsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let corpus = ref_arg(corpus, "corpus")?;
        let model = NbModel::fit_corpus(&corpus.0, lambda).map_err(fail)?;
        *out = Box::into_raw(Box::new(LsModel(model)));
        Ok(())
    })
}

/// Positive-class posterior of one whitespace-tokenized text.
///
/// # Safety
/// `model` must be a live handle, `text` NUL-terminated, `out_positive` writable.
#[no_mangle]
pub unsafe extern "C" fn ls_model_posterior(
    model: *const LsModel,
    text: *const c_char,
    out_positive: *mut f64,
) -> LsStatus {
    guard(|| {
        let out = out_arg(out_positive, "out_positive")?;
        let model = ref_arg(model, "model")?;
        let text = str_arg(text, "text")?;
        *out = model.0.posterior(&Document::new(text), None).get(ClassLabel::Positive);
        Ok(())
    })
}

/// Decision for one text; ties go to positive.
///
/// # Safety
/// `model` must be a live handle, `text` NUL-terminated, `out_class` writable.
#[no_mangle]
pub unsafe extern "C" fn ls_model_decide(
    model: *const LsModel,
    text: *const c_char,
    out_class: *mut LsClass,
) -> LsStatus {
    guard(|| {
        let out = out_arg(out_class, "out_class")?;
        let model = ref_arg(model, "model")?;
        let text = str_arg(text, "text")?;
        *out = model.0.decide(&Document::new(text), None).into();
        Ok(())
    })
}

/// # Safety
/// `model` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ls_model_free(model: *mut LsModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

#[no_mangle]
pub extern "C" fn ls_engine_config_default() -> LsEngineConfig {
    LsEngineConfig::from(&EngineConfig::default())
}

/// Initial learning over `count` labeled corpora. A NULL `config` means defaults.
///
/// # Safety
/// `corpora` must point to `count` live corpus handles; `config` must be NULL
/// or readable; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ls_engine_initial(
    corpora: *const *const LsCorpus,
    count: usize,
    config: *const LsEngineConfig,
    out: *mut *mut LsEngine,
) -> LsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        if corpora.is_null() && count > 0 {
            return Err(null("corpora"));
        }
        let handles: &[*const LsCorpus] = if count == 0 {
            &[]
        } else {
            std::slice::from_raw_parts(corpora, count)
        };
        let mut domains = Vec::with_capacity(count);
        for h in handles {
            domains.push(ref_arg(*h, "corpus")?.0.clone());
        }
        let config = config.as_ref().map_or_else(EngineConfig::default, EngineConfig::from);
        let state = LifelongState::initial_learn(&domains, config).map_err(fail)?;
        *out = Box::into_raw(Box::new(LsEngine(state)));
        Ok(())
    })
}

/// Self-study of one corpus (labels, if any, are ignored). Pseudo-labels are
/// written to `labels`, which must hold `capacity` entries. `out_len`
/// receives the document count; when it exceeds `capacity` nothing is
/// learned and [`LsStatus::BufferTooSmall`] is returned.
///
/// # Safety
/// `engine` and `corpus` must be live handles; `labels` must be writable for
/// `capacity` entries (may be NULL when `capacity` is 0); `out_len` writable.
#[no_mangle]
pub unsafe extern "C" fn ls_engine_self_study(
    engine: *mut LsEngine,
    corpus: *const LsCorpus,
    labels: *mut LsClass,
    capacity: usize,
    out_len: *mut usize,
) -> LsStatus {
    guard(|| {
        let out_len = out_arg(out_len, "out_len")?;
        let engine = out_arg(engine, "engine")?;
        let corpus = ref_arg(corpus, "corpus")?;
        let n = corpus.0.len();
        *out_len = n;
        if capacity < n {
            set_last_error(format!("label buffer holds {capacity} entries, need {n}"));
            return Err(LsStatus::BufferTooSmall);
        }
        if labels.is_null() && n > 0 {
            return Err(null("labels"));
        }
        let outcome = engine.0.self_study(&corpus.0.without_labels()).map_err(fail)?;
        if n > 0 {
            let dest = std::slice::from_raw_parts_mut(labels, n);
            for (d, l) in dest.iter_mut().zip(outcome.pseudo_labels) {
                *d = l.into();
            }
        }
        Ok(())
    })
}

/// Decision for one text using the engine's cumulative model and gate.
///
/// # Safety
/// `engine` must be a live handle, `text` NUL-terminated, `out_class` writable.
#[no_mangle]
pub unsafe extern "C" fn ls_engine_decide(
    engine: *const LsEngine,
    text: *const c_char,
    out_class: *mut LsClass,
) -> LsStatus {
    guard(|| {
        let out = out_arg(out_class, "out_class")?;
        let engine = ref_arg(engine, "engine")?;
        let text = str_arg(text, "text")?;
        let gate = engine.0.prediction_vocabulary();
        *out = engine.0.model().decide(&Document::new(text), gate.as_ref()).into();
        Ok(())
    })
}

/// Top `k` knowledge-base words of `class` as `word TAB score` lines.
/// Release `out` with [`ls_string_free`].
///
/// # Safety
/// `engine` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ls_engine_kb_top(
    engine: *const LsEngine,
    class: LsClass,
    k: usize,
    out: *mut *mut c_char,
) -> LsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let engine = ref_arg(engine, "engine")?;
        let text: String = engine
            .0
            .kb()
            .top_k(class.into(), k)
            .iter()
            .map(|e| format!("{}\t{}\n", e.word, e.score))
            .collect();
        *out = into_c_string(text);
        Ok(())
    })
}

/// Writes the knowledge base file to `path`.
///
/// # Safety
/// `engine` must be a live handle and `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn ls_engine_kb_save(engine: *const LsEngine, path: *const c_char) -> LsStatus {
    guard(|| {
        let engine = ref_arg(engine, "engine")?;
        let path = str_arg(path, "path")?;
        engine.0.kb().save(path).map_err(fail)
    })
}

/// # Safety
/// `engine` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ls_engine_free(engine: *mut LsEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

/// Unweighted mean of the two per-class F1 scores.
///
/// # Safety
/// `predictions` and `gold` must each hold `len` entries; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ls_macro_f1(
    predictions: *const LsClass,
    gold: *const LsClass,
    len: usize,
    out: *mut f64,
) -> LsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        if len > 0 && (predictions.is_null() || gold.is_null()) {
            return Err(null("predictions and gold"));
        }
        let convert = |p: *const LsClass| -> Vec<ClassLabel> {
            if len == 0 {
                Vec::new()
            } else {
                std::slice::from_raw_parts(p, len).iter().map(|&c| c.into()).collect()
            }
        };
        *out = macro_f1(&convert(predictions), &convert(gold)).map_err(fail)?;
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips() {
        let c = ls_engine_config_default();
        assert_eq!(EngineConfig::from(&c), EngineConfig::default());
    }

    #[test]
    fn statuses_follow_error_kinds() {
        assert_eq!(status_of(&Error::EmptySelection), LsStatus::InvalidArgument);
        assert_eq!(status_of(&Error::EmptyFile("x".into())), LsStatus::Parse);
        assert_eq!(status_of(&Error::Locked("x".into())), LsStatus::Io);
    }

    #[test]
    fn panics_become_status() {
        assert_eq!(guard(|| panic!("boom")), LsStatus::Panic);
    }
}
