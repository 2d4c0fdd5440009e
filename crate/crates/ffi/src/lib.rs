//! C ABI for the modlab library.
//!
//! Graphs are opaque handles created by `modlab_graph_*` constructors and
//! released with [`modlab_graph_free`]. Every fallible call returns a
//! [`ModlabStatus`]; on failure a message is kept per thread and can be read
//! with [`modlab_last_error`]. Node indices are `size_t`, reals are `double`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use modlab::generators::{euclidean_grid, GridSpec};
use modlab::graph::io::{parse_graph, read_graph};
use modlab::graph::{ahlfors_fit, MetricGraph, NodeSet};
use modlab::modulus::{compute_modulus, CurveFamilySpec, SolveStatus};
use modlab::poincare::{minimal_upper_gradient, poincare_ratio};
use modlab::porosity::porosity_check;
use modlab::Error;

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModlabStatus {
    Ok = 0,
    InvalidArgument = 1,
    NullPointer = 2,
    Disconnected = 3,
    ScaleTooFine = 4,
    TooLarge = 5,
    DegenerateContinuum = 6,
    NonBijective = 7,
    SolveFailed = 8,
    Parse = 9,
    Io = 10,
    Panic = 11,
}

/// Opaque graph handle.
pub struct ModlabGraph {
    inner: MetricGraph,
}

/// Outcome of a modulus computation.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ModlabModulusSummary {
    pub value: f64,
    pub dual_bound: f64,
    pub gap: f64,
    pub min_rho_length: f64,
    pub iterations: usize,
    pub active_paths: usize,
    /// 1 when the duality certificate met the tolerance.
    pub converged: i32,
    /// 1 when the family has no curves.
    pub vacuous: i32,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ModlabAhlforsSummary {
    pub q_hat: f64,
    pub c_hat: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub residual: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> ModlabStatus {
    match e {
        Error::Argument(_) => ModlabStatus::InvalidArgument,
        Error::Disconnected { .. } | Error::DisconnectedDomain(_) => ModlabStatus::Disconnected,
        Error::ScaleTooFine(_) => ModlabStatus::ScaleTooFine,
        Error::TooLarge { .. } => ModlabStatus::TooLarge,
        Error::DegenerateContinuum(_) => ModlabStatus::DegenerateContinuum,
        Error::NonBijective(_) => ModlabStatus::NonBijective,
        Error::InnerSolveFailed { .. } => ModlabStatus::SolveFailed,
        Error::Parse { .. } => ModlabStatus::Parse,
        Error::Io(_) => ModlabStatus::Io,
    }
}

struct Fail(ModlabStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(ModlabStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(ModlabStatus::InvalidArgument, msg.into())
}

/// Runs `f`, records failures and converts panics.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> ModlabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            ModlabStatus::Ok
        }
        Ok(Err(Fail(code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("internal panic".into());
            ModlabStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, n: usize, what: &str) -> Result<&'a [T], Fail> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn graph<'a>(g: *const ModlabGraph) -> Result<&'a MetricGraph, Fail> {
    g.as_ref().map(|h| &h.inner).ok_or_else(|| null("graph"))
}

unsafe fn c_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

unsafe fn emit(out: *mut *mut ModlabGraph, g: MetricGraph) {
    *out = Box::into_raw(Box::new(ModlabGraph { inner: g }));
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn modlab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn modlab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a graph from the text format.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn modlab_graph_from_text(text: *const c_char, out: *mut *mut ModlabGraph) -> ModlabStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let g = parse_graph(c_str(text, "text")?)?;
        emit(out, g);
        Ok(())
    })
}

/// Loads a graph file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn modlab_graph_load(path: *const c_char, out: *mut *mut ModlabGraph) -> ModlabStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let g = read_graph(c_str(path, "path")?)?;
        emit(out, g);
        Ok(())
    })
}

/// Cubical grid with `side^dim` nodes and unit-free spacing `spacing`.
///
/// # Safety
/// `out` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn modlab_graph_grid(
    dim: usize,
    side: usize,
    spacing: f64,
    out: *mut *mut ModlabGraph,
) -> ModlabStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let g = euclidean_grid(&GridSpec::new(dim, side, spacing))?;
        emit(out, g);
        Ok(())
    })
}

/// Releases a graph. Null is ignored.
///
/// # Safety
/// `g` must come from a `modlab_graph_*` constructor and not be used again.
#[no_mangle]
pub unsafe extern "C" fn modlab_graph_free(g: *mut ModlabGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Node count, or 0 for a null handle.
///
/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn modlab_graph_node_count(g: *const ModlabGraph) -> usize {
    g.as_ref().map_or(0, |h| h.inner.node_count())
}

/// Edge count, or 0 for a null handle.
///
/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn modlab_graph_edge_count(g: *const ModlabGraph) -> usize {
    g.as_ref().map_or(0, |h| h.inner.edge_count())
}

/// Shortest-path distance between two nodes.
///
/// # Safety
/// `g` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn modlab_graph_distance(
    g: *const ModlabGraph,
    a: usize,
    b: usize,
    out: *mut f64,
) -> ModlabStatus {
    guard(|| {
        let g = graph(g)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = g.graph_distance(a, b)?;
        Ok(())
    })
}

/// p-modulus of the curves joining `e` to `f`, optionally inside `domain`
/// (pass null and 0 for the whole graph). When `rho` is non-null it
/// receives the extremal density, one value per edge; `rho_len` must then
/// equal the edge count. An iteration limit is not an error: check
/// `converged`.
///
/// # Safety
/// Arrays must hold the stated number of elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn modlab_compute_modulus(
    g: *const ModlabGraph,
    e: *const usize,
    e_len: usize,
    f: *const usize,
    f_len: usize,
    domain: *const usize,
    domain_len: usize,
    p: f64,
    tol: f64,
    max_iter: usize,
    out: *mut ModlabModulusSummary,
    rho: *mut f64,
    rho_len: usize,
) -> ModlabStatus {
    guard(|| {
        let g = graph(g)?;
        if out.is_null() {
            return Err(null("out"));
        }
        if !rho.is_null() && rho_len != g.edge_count() {
            return Err(invalid(format!("rho_len {rho_len} differs from edge count {}", g.edge_count())));
        }
        let mut fam = CurveFamilySpec::new(
            NodeSet::new(slice(e, e_len, "e")?.to_vec()),
            NodeSet::new(slice(f, f_len, "f")?.to_vec()),
        );
        if !domain.is_null() {
            fam = fam.within(NodeSet::new(slice(domain, domain_len, "domain")?.to_vec()));
        }
        let m = compute_modulus(g, &fam, p, tol, max_iter)?;
        *out = ModlabModulusSummary {
            value: m.value,
            dual_bound: m.dual_bound,
            gap: m.gap,
            min_rho_length: m.min_rho_length,
            iterations: m.iterations,
            active_paths: m.active_paths.len(),
            converged: (m.status == SolveStatus::Converged) as i32,
            vacuous: m.vacuous as i32,
        };
        if !rho.is_null() {
            std::slice::from_raw_parts_mut(rho, rho_len).copy_from_slice(m.rho.values());
        }
        Ok(())
    })
}

/// Ahlfors regularity fit over `n_radii` geometric radii in
/// `[r_min, r_max]`, with balls centered at `samples`.
///
/// # Safety
/// `samples` must hold `n_samples` indices; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn modlab_ahlfors_fit(
    g: *const ModlabGraph,
    samples: *const usize,
    n_samples: usize,
    r_min: f64,
    r_max: f64,
    n_radii: usize,
    out: *mut ModlabAhlforsSummary,
) -> ModlabStatus {
    guard(|| {
        let g = graph(g)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let s = NodeSet::new(slice(samples, n_samples, "samples")?.to_vec());
        let fit = ahlfors_fit(g, &s, r_min, r_max, n_radii)?;
        *out = ModlabAhlforsSummary {
            q_hat: fit.q_hat,
            c_hat: fit.c_hat,
            r_min: fit.r_range.0,
            r_max: fit.r_range.1,
            residual: fit.residual,
        };
        Ok(())
    })
}

/// Annulus porosity test at `x` against `n_points` points of dimension
/// `dim` stored row by row. `passed[k]` is set to 1 when no point lies in
/// `[scales[k]/t, t·scales[k])` around `x`, else 0.
///
/// # Safety
/// `points` must hold `n_points·dim` values, `x` `dim` values, and
/// `scales` and `passed` `n_scales` values each.
#[no_mangle]
pub unsafe extern "C" fn modlab_porosity_check(
    points: *const f64,
    n_points: usize,
    dim: usize,
    x: *const f64,
    t: f64,
    scales: *const f64,
    n_scales: usize,
    passed: *mut u8,
) -> ModlabStatus {
    guard(|| {
        if dim == 0 {
            return Err(invalid("dim must be positive"));
        }
        let len = n_points.checked_mul(dim).ok_or_else(|| invalid("point array too large"))?;
        let pts: Vec<Vec<f64>> = slice(points, len, "points")?.chunks(dim).map(<[f64]>::to_vec).collect();
        let x = slice(x, dim, "x")?;
        let scales = slice(scales, n_scales, "scales")?;
        if n_scales > 0 && passed.is_null() {
            return Err(null("passed"));
        }
        let ok = porosity_check(&pts, x, t, scales)?;
        for (k, b) in ok.into_iter().enumerate() {
            *passed.add(k) = b as u8;
        }
        Ok(())
    })
}

/// Poincare ratio of the node field `u` over the closed ball `B(center, r)`
/// with gradient averaged on `B(center, tau·r)`. `grad` holds one value per
/// edge; pass null to use the minimal upper gradient of `u`.
///
/// # Safety
/// `u` must hold one value per node, `grad` (when non-null) one per edge,
/// and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn modlab_poincare_ratio(
    g: *const ModlabGraph,
    center: usize,
    r: f64,
    u: *const f64,
    u_len: usize,
    grad: *const f64,
    p: f64,
    tau: f64,
    out: *mut f64,
) -> ModlabStatus {
    guard(|| {
        let g = graph(g)?;
        if out.is_null() {
            return Err(null("out"));
        }
        if u_len != g.node_count() {
            return Err(invalid(format!("u_len {u_len} differs from node count {}", g.node_count())));
        }
        let u = slice(u, u_len, "u")?;
        let grad = if grad.is_null() {
            minimal_upper_gradient(g, u)?
        } else {
            slice(grad, g.edge_count(), "grad")?.to_vec()
        };
        *out = poincare_ratio(g, center, r, u, &grad, p, tau)?;
        Ok(())
    })
}
