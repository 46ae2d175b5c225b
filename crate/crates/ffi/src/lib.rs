//! C ABI over the sentiscope core.
//!
//! Every fallible function returns an [`SsStatus`] and writes its result
//! through an out pointer. On failure a message is kept per thread and can be
//! read with [`ss_last_error_message`]. Handles are opaque and must be
//! released with their matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::OnceLock;

use sentiscope::breaks::{default_h_min, select_m_bic, SegmentationResult};
use sentiscope::ingest::{clean_text, tokenize};
use sentiscope::sentiment::{score_shifted, score_unigram, ShifterLexicon, ValenceLexicon};
use sentiscope::stats::{mann_whitney, ols_simple, MwMethod, MwMode};
use sentiscope::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsStatus {
    Ok = 0,
    /// A required pointer argument was NULL.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Arguments were well-formed but unusable (too short, constant, out of range).
    InvalidInput = 3,
    /// A file could not be opened or read.
    Io = 4,
    /// A file was read but its contents are malformed.
    Parse = 5,
    /// The library panicked; the handle arguments should be considered lost.
    Panic = 6,
}

/// Test selection for [`ss_mann_whitney`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsMwMode {
    Auto = 0,
    Exact = 1,
    Approx = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SsOlsFit {
    pub alpha: f64,
    pub beta: f64,
    pub beta_std: f64,
    pub r2: f64,
    pub se_beta: f64,
    pub t_stat: f64,
    pub p_value: f64,
    pub n: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SsMwResult {
    pub u_a: f64,
    pub u_b: f64,
    pub p_value: f64,
    /// Whether the exact null distribution was used rather than the normal approximation.
    pub exact: bool,
    pub degenerate: bool,
}

/// Token valences.
pub struct SsLexicon {
    inner: ValenceLexicon,
}

/// Negators, amplifiers and deamplifiers.
pub struct SsShifters {
    inner: ShifterLexicon,
}

/// BIC-selected breakpoint segmentation of one series.
pub struct SsSegmentation {
    inner: SegmentationResult,
}

struct Failure {
    status: SsStatus,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io(_) | Error::File { .. } | Error::MissingPath(_) => SsStatus::Io,
            Error::Parse { .. }
            | Error::InvalidLexicon { .. }
            | Error::Csv(_)
            | Error::Json(_)
            | Error::DuplicateDate(_)
            | Error::NonPositiveClose { .. } => SsStatus::Parse,
            _ => SsStatus::InvalidInput,
        };
        Failure {
            status,
            message: e.to_string(),
        }
    }
}

fn fail(status: SsStatus, message: impl Into<String>) -> Failure {
    Failure {
        status,
        message: message.into(),
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> SsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SsStatus::Ok,
        Ok(Err(failure)) => {
            set_last_error(failure.message);
            failure.status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            SsStatus::Panic
        }
    }
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(fail(SsStatus::NullArgument, format!("{what} is NULL")))
    } else {
        Ok(())
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    non_null(p, what)?;
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(SsStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    non_null(p, what)?;
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write_out<T>(out: *mut T, value: T) {
    ptr::write(out, value);
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ss_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ss_version() -> *const c_char {
    static VERSION: OnceLock<CString> = OnceLock::new();
    VERSION
        .get_or_init(|| CString::new(sentiscope::VERSION).expect("version has no NUL"))
        .as_ptr()
}

/// Cleans `raw` (lowercase, drop URLs, mentions and hashtags, strip
/// punctuation). The result must be released with [`ss_string_free`].
///
/// # Safety
/// `raw` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ss_clean_text(raw: *const c_char, out: *mut *mut c_char) -> SsStatus {
    guard(|| {
        non_null(out, "out")?;
        let raw = str_arg(raw, "raw")?;
        let clean = CString::new(clean_text(raw)).map_err(|_| fail(SsStatus::InvalidInput, "text holds a NUL"))?;
        write_out(out, clean.into_raw());
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn ss_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads a `token<TAB>score` lexicon file.
///
/// # Safety
/// `path` and `name` must be NUL-terminated strings and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ss_lexicon_load(
    path: *const c_char,
    name: *const c_char,
    out: *mut *mut SsLexicon,
) -> SsStatus {
    guard(|| {
        non_null(out, "out")?;
        let path = str_arg(path, "path")?;
        let name = str_arg(name, "name")?;
        let file = File::open(path).map_err(|e| fail(SsStatus::Io, format!("{path}: {e}")))?;
        let inner = ValenceLexicon::read(name, file)?;
        write_out(out, Box::into_raw(Box::new(SsLexicon { inner })));
        Ok(())
    })
}

/// # Safety
/// `lex` must come from [`ss_lexicon_load`] or be NULL.
#[no_mangle]
pub unsafe extern "C" fn ss_lexicon_free(lex: *mut SsLexicon) {
    if !lex.is_null() {
        drop(Box::from_raw(lex));
    }
}

/// Number of entries in the lexicon.
///
/// # Safety
/// `lex` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ss_lexicon_len(lex: *const SsLexicon) -> usize {
    lex.as_ref().map_or(0, |l| l.inner.len())
}

/// Sum of valences of the tokens of cleaned `text`.
///
/// # Safety
/// `lex` must be a live handle, `text` a NUL-terminated string and `out` a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ss_score_unigram(lex: *const SsLexicon, text: *const c_char, out: *mut f64) -> SsStatus {
    guard(|| {
        non_null(lex, "lexicon")?;
        non_null(out, "out")?;
        let tokens = tokenize(&clean_text(str_arg(text, "text")?));
        write_out(out, score_unigram(&tokens, &(*lex).inner));
        Ok(())
    })
}

/// Loads a `token<TAB>role<TAB>weight` shifter file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ss_shifters_load(path: *const c_char, out: *mut *mut SsShifters) -> SsStatus {
    guard(|| {
        non_null(out, "out")?;
        let path = str_arg(path, "path")?;
        let file = File::open(path).map_err(|e| fail(SsStatus::Io, format!("{path}: {e}")))?;
        let inner = ShifterLexicon::read(file)?;
        write_out(out, Box::into_raw(Box::new(SsShifters { inner })));
        Ok(())
    })
}

/// # Safety
/// `sh` must come from [`ss_shifters_load`] or be NULL.
#[no_mangle]
pub unsafe extern "C" fn ss_shifters_free(sh: *mut SsShifters) {
    if !sh.is_null() {
        drop(Box::from_raw(sh));
    }
}

/// Shifter-aware score of cleaned `text`, looking `window` tokens back.
///
/// # Safety
/// Handles must be live, `text` a NUL-terminated string and `out` a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn ss_score_shifted(
    lex: *const SsLexicon,
    shifters: *const SsShifters,
    window: usize,
    text: *const c_char,
    out: *mut f64,
) -> SsStatus {
    guard(|| {
        non_null(lex, "lexicon")?;
        non_null(shifters, "shifters")?;
        non_null(out, "out")?;
        let tokens = tokenize(&clean_text(str_arg(text, "text")?));
        write_out(out, score_shifted(&tokens, &(*lex).inner, &(*shifters).inner, window));
        Ok(())
    })
}

/// Fits 0..=`m_max` breaks to `y` and picks the count by BIC. `h_min` of 0
/// uses the default trimming.
///
/// # Safety
/// `y` must point to `n` doubles and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ss_segment(
    y: *const f64,
    n: usize,
    m_max: usize,
    h_min: usize,
    out: *mut *mut SsSegmentation,
) -> SsStatus {
    guard(|| {
        non_null(out, "out")?;
        let y = slice_arg(y, n, "y")?;
        if y.is_empty() {
            return Err(fail(SsStatus::InvalidInput, "empty series"));
        }
        let h = if h_min == 0 { default_h_min(n) } else { h_min };
        let inner = select_m_bic(y, m_max, h)?;
        write_out(out, Box::into_raw(Box::new(SsSegmentation { inner })));
        Ok(())
    })
}

/// # Safety
/// `seg` must come from [`ss_segment`] or be NULL.
#[no_mangle]
pub unsafe extern "C" fn ss_segmentation_free(seg: *mut SsSegmentation) {
    if !seg.is_null() {
        drop(Box::from_raw(seg));
    }
}

/// Break count chosen by BIC.
///
/// # Safety
/// `seg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ss_segmentation_chosen_m(seg: *const SsSegmentation) -> usize {
    seg.as_ref().map_or(0, |s| s.inner.chosen_m)
}

/// Largest break count that was fitted.
///
/// # Safety
/// `seg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ss_segmentation_max_m(seg: *const SsSegmentation) -> usize {
    seg.as_ref().map_or(0, |s| s.inner.per_m.len().saturating_sub(1))
}

/// RSS and BIC of the fit with `m` breaks. BIC is negative infinity for a
/// perfect fit.
///
/// # Safety
/// `seg` must be a live handle; `rss` and `bic` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ss_segmentation_fit(
    seg: *const SsSegmentation,
    m: usize,
    rss: *mut f64,
    bic: *mut f64,
) -> SsStatus {
    guard(|| {
        non_null(seg, "segmentation")?;
        non_null(rss, "rss")?;
        non_null(bic, "bic")?;
        let seg = &*seg;
        let fit = seg
            .inner
            .per_m
            .get(m)
            .ok_or_else(|| fail(SsStatus::InvalidInput, format!("no fit with {m} breaks")))?;
        write_out(rss, fit.rss);
        write_out(bic, fit.bic);
        Ok(())
    })
}

/// Copies the `m` breakpoints of the fit with `m` breaks into `out`, which
/// must hold at least `m` entries. A breakpoint is the 1-based index of the
/// last observation of a segment.
///
/// # Safety
/// `seg` must be a live handle and `out` point to `cap` writable entries.
#[no_mangle]
pub unsafe extern "C" fn ss_segmentation_breakpoints(
    seg: *const SsSegmentation,
    m: usize,
    out: *mut usize,
    cap: usize,
) -> SsStatus {
    guard(|| {
        non_null(seg, "segmentation")?;
        let seg = &*seg;
        let fit = seg
            .inner
            .per_m
            .get(m)
            .ok_or_else(|| fail(SsStatus::InvalidInput, format!("no fit with {m} breaks")))?;
        if cap < fit.breakpoints.len() {
            return Err(fail(
                SsStatus::InvalidInput,
                format!("buffer of {cap} cannot hold {m} breakpoints"),
            ));
        }
        if !fit.breakpoints.is_empty() {
            non_null(out, "out")?;
            ptr::copy_nonoverlapping(fit.breakpoints.as_ptr(), out, fit.breakpoints.len());
        }
        Ok(())
    })
}

/// Simple least squares of `y` on `x`.
///
/// # Safety
/// `x` and `y` must point to `n` doubles and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ss_ols(x: *const f64, y: *const f64, n: usize, out: *mut SsOlsFit) -> SsStatus {
    guard(|| {
        non_null(out, "out")?;
        let fit = ols_simple(slice_arg(x, n, "x")?, slice_arg(y, n, "y")?)?;
        write_out(
            out,
            SsOlsFit {
                alpha: fit.alpha,
                beta: fit.beta,
                beta_std: fit.beta_std,
                r2: fit.r2,
                se_beta: fit.se_beta,
                t_stat: fit.t_stat,
                p_value: fit.p_value,
                n: fit.n,
            },
        );
        Ok(())
    })
}

/// Two-sided Mann-Whitney test of `a` against `b`.
///
/// # Safety
/// `a` and `b` must point to `na` and `nb` doubles and `out` be valid.
#[no_mangle]
pub unsafe extern "C" fn ss_mann_whitney(
    a: *const f64,
    na: usize,
    b: *const f64,
    nb: usize,
    mode: SsMwMode,
    out: *mut SsMwResult,
) -> SsStatus {
    guard(|| {
        non_null(out, "out")?;
        let mode = match mode {
            SsMwMode::Auto => MwMode::Auto,
            SsMwMode::Exact => MwMode::Exact,
            SsMwMode::Approx => MwMode::Approx,
        };
        let r = mann_whitney(slice_arg(a, na, "a")?, slice_arg(b, nb, "b")?, mode)?;
        write_out(
            out,
            SsMwResult {
                u_a: r.u_a,
                u_b: r.u_b,
                p_value: r.p_value,
                exact: r.method == MwMethod::Exact,
                degenerate: r.degenerate,
            },
        );
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn errors_map_to_status_codes() {
        let io = Failure::from(Error::MissingPath("x".into()));
        assert_eq!(io.status, SsStatus::Io);
        let parse = Failure::from(Error::InvalidLexicon {
            name: "a".into(),
            message: "b".into(),
        });
        assert_eq!(parse.status, SsStatus::Parse);
        assert_eq!(Failure::from(Error::EmptyVocabulary).status, SsStatus::InvalidInput);
    }

    #[test]
    fn panics_become_a_status() {
        let status = guard(|| panic!("boom"));
        assert_eq!(status, SsStatus::Panic);
        let msg = unsafe { CStr::from_ptr(ss_last_error_message()) };
        assert!(msg.to_str().unwrap().contains("boom"));
    }
}
