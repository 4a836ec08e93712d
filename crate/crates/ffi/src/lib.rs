//! C interface to `biwalk`.
//!
//! Every fallible function returns a [`BiwalkStatus`]; on failure a message
//! is available from [`biwalk_last_error`] on the same thread. Handles are
//! opaque and must be released with their `_free` function. Strings are
//! NUL-terminated UTF-8.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use biwalk::embed::WordVectors;
use biwalk::eval;
use biwalk::kb::{KnowledgeGraph, Lexicon};
use biwalk::walker::{walks, WalkConfig, WalkMode};
use biwalk::Error;

/// Result of a call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BiwalkStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    Config = 5,
    Validation = 6,
    Lookup = 7,
    Numeric = 8,
    Eval = 9,
    Other = 10,
    Panic = 11,
}

/// A concept graph with its lexicon.
pub struct BiwalkKb {
    graph: KnowledgeGraph,
    lexicon: Lexicon,
}

/// Word vectors loaded from a text model file.
pub struct BiwalkVectors {
    vectors: WordVectors,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior NUL");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> BiwalkStatus {
    match e {
        Error::Io { .. } => BiwalkStatus::Io,
        Error::Parse { .. } => BiwalkStatus::Parse,
        Error::Config(_) => BiwalkStatus::Config,
        Error::Validation(_) => BiwalkStatus::Validation,
        Error::Lookup { .. } => BiwalkStatus::Lookup,
        Error::Numeric(_) => BiwalkStatus::Numeric,
        Error::Eval(_) => BiwalkStatus::Eval,
        Error::Stage { source, .. } => status_of(source),
        _ => BiwalkStatus::Other,
    }
}

enum Fail {
    Status(BiwalkStatus, String),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> BiwalkStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BiwalkStatus::Ok,
        Ok(Err(Fail::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            BiwalkStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Status(BiwalkStatus::NullArgument, format!("{name} is NULL")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail::Status(BiwalkStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

unsafe fn opt_str_arg<'a>(p: *const c_char, name: &str) -> Result<Option<&'a str>, Fail> {
    if p.is_null() {
        Ok(None)
    } else {
        str_arg(p, name).map(Some)
    }
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Fail> {
    p.as_ref()
        .ok_or_else(|| Fail::Status(BiwalkStatus::NullArgument, format!("{name} is NULL")))
}

fn null_out(name: &str) -> Fail {
    Fail::Status(BiwalkStatus::NullArgument, format!("{name} is NULL"))
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call into the library on this thread.
#[no_mangle]
pub extern "C" fn biwalk_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn biwalk_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Load a graph (`a<TAB>b` edges) and a lexicon (`concept<TAB>lang<TAB>word`).
/// `langs` is a comma-separated list of one or two language codes.
///
/// # Safety
/// String arguments must be valid NUL-terminated strings; `out` must be a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn biwalk_kb_load(
    graph_path: *const c_char,
    lexicon_path: *const c_char,
    langs: *const c_char,
    out: *mut *mut BiwalkKb,
) -> BiwalkStatus {
    guard(|| {
        let g = str_arg(graph_path, "graph_path")?;
        let l = str_arg(lexicon_path, "lexicon_path")?;
        let langs: Vec<&str> = str_arg(langs, "langs")?.split(',').map(str::trim).collect();
        if out.is_null() {
            return Err(null_out("out"));
        }
        let graph = KnowledgeGraph::load(g)?;
        let lexicon = Lexicon::load(l, &graph, &langs)?;
        *out = Box::into_raw(Box::new(BiwalkKb { graph, lexicon }));
        Ok(())
    })
}

/// # Safety
/// `kb` must come from [`biwalk_kb_load`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn biwalk_kb_free(kb: *mut BiwalkKb) {
    if !kb.is_null() {
        drop(Box::from_raw(kb));
    }
}

/// Number of concepts, or 0 for NULL.
///
/// # Safety
/// `kb` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn biwalk_kb_concept_count(kb: *const BiwalkKb) -> usize {
    kb.as_ref().map_or(0, |k| k.graph.len())
}

/// Number of edges, or 0 for NULL.
///
/// # Safety
/// `kb` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn biwalk_kb_edge_count(kb: *const BiwalkKb) -> usize {
    kb.as_ref().map_or(0, |k| k.graph.edge_count())
}

/// Write `contexts` random-walk contexts to `out_path`, one per line.
/// `mode` is `"bi"` or `"mono:LANG"`. `trace_path` may be NULL; `tokens_out`
/// may be NULL and otherwise receives the token count.
///
/// # Safety
/// `kb` must be a live handle; strings must be NUL-terminated or NULL where
/// allowed.
#[no_mangle]
pub unsafe extern "C" fn biwalk_walk_to_file(
    kb: *const BiwalkKb,
    alpha: f64,
    contexts: usize,
    mode: *const c_char,
    seed: u64,
    out_path: *const c_char,
    trace_path: *const c_char,
    tokens_out: *mut u64,
) -> BiwalkStatus {
    guard(|| {
        let kb = ref_arg(kb, "kb")?;
        let mode: WalkMode = str_arg(mode, "mode")?.parse()?;
        let path = str_arg(out_path, "out_path")?;
        let trace = opt_str_arg(trace_path, "trace_path")?;
        let cfg = WalkConfig {
            alpha,
            contexts,
            target_tokens: None,
            seed,
            mode,
        };
        let sc = walks(&kb.graph, &kb.lexicon, &cfg)?;
        let write = |p: &str, f: &dyn Fn(&mut BufWriter<File>) -> std::io::Result<()>| -> Result<(), Fail> {
            let file = File::create(p).map_err(|e| Error::io(p, e))?;
            let mut w = BufWriter::new(file);
            f(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(p, e))?;
            Ok(())
        };
        write(path, &|w| sc.write_text(&kb.lexicon, w))?;
        if let Some(t) = trace {
            write(t, &|w| sc.write_trace(&kb.graph, &kb.lexicon, w))?;
        }
        if !tokens_out.is_null() {
            *tokens_out = sc.token_total();
        }
        Ok(())
    })
}

/// Load a text model file (`|V| D` header, one `word v1 .. vD` row per line).
///
/// # Safety
/// `path` must be NUL-terminated; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn biwalk_vectors_load(path: *const c_char, out: *mut *mut BiwalkVectors) -> BiwalkStatus {
    guard(|| {
        let p = str_arg(path, "path")?;
        if out.is_null() {
            return Err(null_out("out"));
        }
        let vectors = WordVectors::load(p)?;
        *out = Box::into_raw(Box::new(BiwalkVectors { vectors }));
        Ok(())
    })
}

/// # Safety
/// `v` must come from [`biwalk_vectors_load`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn biwalk_vectors_free(v: *mut BiwalkVectors) {
    if !v.is_null() {
        drop(Box::from_raw(v));
    }
}

/// Vocabulary size, or 0 for NULL.
///
/// # Safety
/// `v` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn biwalk_vectors_len(v: *const BiwalkVectors) -> usize {
    v.as_ref().map_or(0, |v| v.vectors.len())
}

/// Dimensionality, or 0 for NULL.
///
/// # Safety
/// `v` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn biwalk_vectors_dim(v: *const BiwalkVectors) -> usize {
    v.as_ref().map_or(0, |v| v.vectors.dim())
}

/// Cosine similarity of two words.
///
/// # Safety
/// `v` must be a live handle, words NUL-terminated, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn biwalk_vectors_similarity(
    v: *const BiwalkVectors,
    word1: *const c_char,
    word2: *const c_char,
    out: *mut f64,
) -> BiwalkStatus {
    guard(|| {
        let v = &ref_arg(v, "vectors")?.vectors;
        let a = str_arg(word1, "word1")?;
        let b = str_arg(word2, "word2")?;
        if out.is_null() {
            return Err(null_out("out"));
        }
        let va = v.get(a).ok_or_else(|| Error::lookup("word", a))?;
        let vb = v.get(b).ok_or_else(|| Error::lookup("word", b))?;
        *out = eval::cosine(va, vb)?;
        Ok(())
    })
}

/// Spearman's rho of two length-`n` arrays, ties at average rank.
///
/// # Safety
/// `x` and `y` must point to `n` readable doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn biwalk_spearman(x: *const f64, y: *const f64, n: usize, out: *mut f64) -> BiwalkStatus {
    guard(|| {
        if x.is_null() || y.is_null() || out.is_null() {
            return Err(null_out("x, y or out"));
        }
        let xs = std::slice::from_raw_parts(x, n);
        let ys = std::slice::from_raw_parts(y, n);
        *out = eval::spearman(xs, ys)?;
        Ok(())
    })
}
