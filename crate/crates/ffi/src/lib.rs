//! C ABI for the spatnet sampling library.
//!
//! Conventions:
//! - Fallible calls return a [`SpatnetStatus`] and write results through out
//!   pointers. `SPATNET_STATUS_OK` means every out pointer was filled.
//! - On any non-OK status the thread-local error message is updated; fetch it
//!   with `spatnet_last_error`. The returned pointer stays valid until the next
//!   failing call on the same thread.
//! - Handles returned through out pointers are owned by the caller and must be
//!   released with the matching `_free` function. Passing NULL to `_free` is a
//!   no-op.
//! - Vertex indices in edge arrays are zero-based.
//! - Target and reference distributions are described by the same spec strings
//!   the CLI accepts, e.g. `"normal:mu=0.2,sigma=0.05"`, `"uniform:a=0.1,b=0.3"`,
//!   `"hist:<path>"`; references additionally allow `"torus-analytic"` and
//!   `"auto"`. A NULL reference picks the same default the CLI uses.

// The pointer contracts above apply uniformly to every entry point; repeating
// them as per-function `# Safety` sections would copy Rust-only prose into the
// generated C header.
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use spatnet::degree::{self, DegreeSequence};
use spatnet::dist::{
    auto_reference, HistogramDensity, ReferenceDensity, ReferenceRequest, TargetRequest, TargetSpec,
};
use spatnet::experiments::{default_epsilon_grid, GammaBoundInputs};
use spatnet::geometry::{self, PointCloud};
use spatnet::io::read_histogram_rows;
use spatnet::metrics::{w1_empirical_target, EmpiricalLaw};
use spatnet::sampler::{
    run_with, GraphSample, RunStatus, SamplerOptions, StallAction, WeightTable,
};

/// Result code shared by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpatnetStatus {
    /// Success; all out pointers were written.
    Ok = 0,
    /// A required pointer argument was NULL.
    NullPointer = 1,
    /// Arguments failed validation (bad spec string, non-graphical degrees, ...).
    InvalidArgument = 2,
    /// The sampler stalled; the graph handle still holds the partial result.
    RunFailure = 3,
    /// An internal panic was caught at the boundary.
    Panic = 4,
}

/// Terminal state of a sampling run, mirrored from the core library.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpatnetRunStatus {
    Complete = 0,
    EarlyStop = 1,
    Failure = 2,
}

/// Opaque point cloud handle.
pub struct SpatnetCloud(PointCloud);

/// Opaque sampled-graph handle.
pub struct SpatnetGraph {
    sample: GraphSample,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let clean = msg.replace('\0', " ");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = CString::new(clean).unwrap_or_default());
}

fn panic_text(payload: &(dyn std::any::Any + Send)) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        (*s).to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "unknown panic".to_string()
    }
}

/// Runs a fallible body under `catch_unwind` so panics never cross the ABI.
fn guarded<F: FnOnce() -> SpatnetStatus>(body: F) -> SpatnetStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(payload) => {
            set_error(&format!("internal panic: {}", panic_text(&payload)));
            SpatnetStatus::Panic
        }
    }
}

/// Same guard for value-returning accessors; yields `fallback` on panic.
fn guarded_value<T, F: FnOnce() -> T>(fallback: T, body: F) -> T {
    catch_unwind(AssertUnwindSafe(body)).unwrap_or_else(|payload| {
        set_error(&format!("internal panic: {}", panic_text(&payload)));
        fallback
    })
}

unsafe fn require_ref<'a, T>(ptr: *const T, name: &str) -> Result<&'a T, SpatnetStatus> {
    if ptr.is_null() {
        set_error(&format!("{name} must not be NULL"));
        return Err(SpatnetStatus::NullPointer);
    }
    Ok(&*ptr)
}

unsafe fn require_out<'a, T>(ptr: *mut T, name: &str) -> Result<&'a mut T, SpatnetStatus> {
    if ptr.is_null() {
        set_error(&format!("{name} must not be NULL"));
        return Err(SpatnetStatus::NullPointer);
    }
    Ok(&mut *ptr)
}

unsafe fn require_slice<'a, T>(
    ptr: *const T,
    len: usize,
    name: &str,
) -> Result<&'a [T], SpatnetStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        set_error(&format!("{name} must not be NULL"));
        return Err(SpatnetStatus::NullPointer);
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

unsafe fn require_str<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, SpatnetStatus> {
    if ptr.is_null() {
        set_error(&format!("{name} must not be NULL"));
        return Err(SpatnetStatus::NullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error(&format!("{name} is not valid UTF-8"));
        SpatnetStatus::InvalidArgument
    })
}

fn invalid(err: spatnet::Error) -> SpatnetStatus {
    set_error(&err.to_string());
    SpatnetStatus::InvalidArgument
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn spatnet_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message describing the most recent failure on the calling thread.
///
/// Returns an empty string if no failure has occurred yet. The pointer is
/// invalidated by the next failing spatnet call on the same thread.
#[no_mangle]
pub extern "C" fn spatnet_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Erdos-Gallai check. Returns 1 if the sequence is graphical, 0 if not,
/// -1 on a NULL pointer.
#[no_mangle]
pub unsafe extern "C" fn spatnet_is_graphical(degrees: *const usize, len: usize) -> c_int {
    guarded_value(-1, || {
        let seq = match require_slice(degrees, len, "degrees") {
            Ok(s) => s,
            Err(_) => return -1,
        };
        degree::is_graphical(seq) as c_int
    })
}

/// Samples `n` points uniformly on the `dim`-torus.
#[no_mangle]
pub unsafe extern "C" fn spatnet_cloud_uniform(
    n: usize,
    dim: usize,
    seed: u64,
    out: *mut *mut SpatnetCloud,
) -> SpatnetStatus {
    guarded(|| {
        let out = match require_out(out, "out") {
            Ok(o) => o,
            Err(s) => return s,
        };
        *out = std::ptr::null_mut();
        if n == 0 || dim == 0 {
            set_error("n and dim must both be at least 1");
            return SpatnetStatus::InvalidArgument;
        }
        let cloud = geometry::generate_uniform(n, dim, seed);
        *out = Box::into_raw(Box::new(SpatnetCloud(cloud)));
        SpatnetStatus::Ok
    })
}

/// Poisson-disk (Bridson) cloud with minimum torus separation `radius`.
#[no_mangle]
pub unsafe extern "C" fn spatnet_cloud_poisson_disk(
    radius: f64,
    dim: usize,
    seed: u64,
    out: *mut *mut SpatnetCloud,
) -> SpatnetStatus {
    guarded(|| {
        let out = match require_out(out, "out") {
            Ok(o) => o,
            Err(s) => return s,
        };
        *out = std::ptr::null_mut();
        match geometry::generate_poisson_disk(radius, dim, seed) {
            Ok(cloud) => {
                *out = Box::into_raw(Box::new(SpatnetCloud(cloud)));
                SpatnetStatus::Ok
            }
            Err(e) => invalid(e),
        }
    })
}

/// Wraps caller-provided coordinates, row-major `n x dim`, each in `[0, 1)`.
#[no_mangle]
pub unsafe extern "C" fn spatnet_cloud_from_coords(
    coords: *const f64,
    n: usize,
    dim: usize,
    out: *mut *mut SpatnetCloud,
) -> SpatnetStatus {
    guarded(|| {
        let out = match require_out(out, "out") {
            Ok(o) => o,
            Err(s) => return s,
        };
        *out = std::ptr::null_mut();
        if n == 0 || dim == 0 {
            set_error("n and dim must both be at least 1");
            return SpatnetStatus::InvalidArgument;
        }
        let Some(total) = n.checked_mul(dim) else {
            set_error("n * dim overflows");
            return SpatnetStatus::InvalidArgument;
        };
        let flat = match require_slice(coords, total, "coords") {
            Ok(s) => s,
            Err(s) => return s,
        };
        let points: Vec<Vec<f64>> = flat.chunks_exact(dim).map(|row| row.to_vec()).collect();
        match PointCloud::new(dim, points) {
            Ok(cloud) => {
                *out = Box::into_raw(Box::new(SpatnetCloud(cloud)));
                SpatnetStatus::Ok
            }
            Err(e) => invalid(e),
        }
    })
}

/// Number of points, or 0 for a NULL handle.
#[no_mangle]
pub unsafe extern "C" fn spatnet_cloud_n(cloud: *const SpatnetCloud) -> usize {
    guarded_value(0, || match require_ref(cloud, "cloud") {
        Ok(c) => c.0.n(),
        Err(_) => 0,
    })
}

/// Ambient dimension, or 0 for a NULL handle.
#[no_mangle]
pub unsafe extern "C" fn spatnet_cloud_dim(cloud: *const SpatnetCloud) -> usize {
    guarded_value(0, || match require_ref(cloud, "cloud") {
        Ok(c) => c.0.dim(),
        Err(_) => 0,
    })
}

#[no_mangle]
pub unsafe extern "C" fn spatnet_cloud_free(cloud: *mut SpatnetCloud) {
    if !cloud.is_null() {
        drop(Box::from_raw(cloud));
    }
}

/// Geodesic distance between two points on the unit torus.
#[no_mangle]
pub unsafe extern "C" fn spatnet_torus_distance(
    x: *const f64,
    y: *const f64,
    dim: usize,
    out: *mut f64,
) -> SpatnetStatus {
    guarded(|| {
        let out = match require_out(out, "out") {
            Ok(o) => o,
            Err(s) => return s,
        };
        if dim == 0 {
            set_error("dim must be at least 1");
            return SpatnetStatus::InvalidArgument;
        }
        let (x, y) = match (require_slice(x, dim, "x"), require_slice(y, dim, "y")) {
            (Ok(x), Ok(y)) => (x, y),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        match geometry::torus_distance(x, y) {
            Ok(r) => {
                *out = r;
                SpatnetStatus::Ok
            }
            Err(e) => invalid(e),
        }
    })
}

fn build_target(spec: &str) -> spatnet::Result<TargetSpec> {
    let req: TargetRequest = spec.parse()?;
    if let Some(t) = req.build()? {
        return Ok(t);
    }
    let TargetRequest::Hist(path) = req else {
        unreachable!("only hist targets defer to file IO");
    };
    let rows = read_histogram_rows(&path)?;
    Ok(TargetSpec::from_histogram(HistogramDensity::from_rows(
        &rows, false,
    )?))
}

fn build_reference(
    spec: Option<&str>,
    target: &TargetSpec,
    dim: usize,
    dists: &[f64],
) -> spatnet::Result<ReferenceDensity> {
    let req = match spec {
        Some(s) => s.parse::<ReferenceRequest>()?,
        None => {
            let (lo, hi) = target.support();
            if (dim == 1 || dim == 2) && lo >= 0.0 && hi <= 0.5 {
                ReferenceRequest::TorusAnalytic
            } else {
                ReferenceRequest::Auto
            }
        }
    };
    match req {
        ReferenceRequest::TorusAnalytic => ReferenceDensity::torus_analytic(dim),
        ReferenceRequest::Auto => auto_reference(dists),
        ReferenceRequest::Hist(path) => {
            let rows = read_histogram_rows(&path)?;
            Ok(ReferenceDensity::Histogram(HistogramDensity::from_rows(
                &rows, false,
            )?))
        }
    }
}

/// Samples a graph on `cloud` with the given degree sequence and target
/// edge-length law.
///
/// `reference_spec` may be NULL to use the default reference (torus-analytic
/// when the dimension and target support allow it, otherwise a histogram fit
/// to the cloud's own distances). With `strict` the run fails as soon as no
/// admissible pair remains; otherwise remaining stubs are paired off ignoring
/// the length law.
///
/// On `SPATNET_STATUS_RUN_FAILURE` the out handle is still set and exposes the
/// partial graph.
#[no_mangle]
pub unsafe extern "C" fn spatnet_sample(
    cloud: *const SpatnetCloud,
    degrees: *const usize,
    degrees_len: usize,
    target_spec: *const c_char,
    reference_spec: *const c_char,
    gamma: f64,
    seed: u64,
    strict: bool,
    out: *mut *mut SpatnetGraph,
) -> SpatnetStatus {
    guarded(|| {
        let out = match require_out(out, "out") {
            Ok(o) => o,
            Err(s) => return s,
        };
        *out = std::ptr::null_mut();
        let cloud = match require_ref(cloud, "cloud") {
            Ok(c) => c,
            Err(s) => return s,
        };
        let degrees = match require_slice(degrees, degrees_len, "degrees") {
            Ok(d) => d,
            Err(s) => return s,
        };
        let target_str = match require_str(target_spec, "target_spec") {
            Ok(s) => s,
            Err(s) => return s,
        };
        let reference_str = if reference_spec.is_null() {
            None
        } else {
            match require_str(reference_spec, "reference_spec") {
                Ok(s) => Some(s),
                Err(s) => return s,
            }
        };

        let n = cloud.0.n();
        if degrees.len() != n {
            set_error(&format!(
                "degree list has {} entries but the cloud has {} points",
                degrees.len(),
                n
            ));
            return SpatnetStatus::InvalidArgument;
        }
        let seq = match DegreeSequence::new(degrees.to_vec()) {
            Ok(s) => s,
            Err(e) => return invalid(e),
        };
        let target = match build_target(target_str) {
            Ok(t) => t,
            Err(e) => return invalid(e),
        };
        let weights = WeightTable::from_cloud(cloud.0.clone());
        let mut dists = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                dists.push(weights.r(i, j));
            }
        }
        let reference = match build_reference(reference_str, &target, cloud.0.dim(), &dists) {
            Ok(r) => r,
            Err(e) => return invalid(e),
        };
        let options = SamplerOptions {
            on_stall: if strict {
                StallAction::Fail
            } else {
                StallAction::PlaceRemaining
            },
            ..SamplerOptions::default()
        };
        match run_with(&seq, &weights, &target, &reference, gamma, seed, &options) {
            Ok(output) => {
                let failed = output.sample.status == RunStatus::Failure;
                let placed = output.sample.edges.len();
                let total = output.sample.m;
                *out = Box::into_raw(Box::new(SpatnetGraph {
                    sample: output.sample,
                }));
                if failed {
                    set_error(&format!(
                        "sampler stalled after placing {placed} of {total} edges"
                    ));
                    SpatnetStatus::RunFailure
                } else {
                    SpatnetStatus::Ok
                }
            }
            Err(e) => invalid(e),
        }
    })
}

/// Number of vertices, or 0 for a NULL handle.
#[no_mangle]
pub unsafe extern "C" fn spatnet_graph_n(graph: *const SpatnetGraph) -> usize {
    guarded_value(0, || match require_ref(graph, "graph") {
        Ok(g) => g.sample.n,
        Err(_) => 0,
    })
}

/// Total edge count implied by the degree sequence, or 0 for a NULL handle.
#[no_mangle]
pub unsafe extern "C" fn spatnet_graph_m(graph: *const SpatnetGraph) -> usize {
    guarded_value(0, || match require_ref(graph, "graph") {
        Ok(g) => g.sample.m,
        Err(_) => 0,
    })
}

/// Number of edges actually placed, or 0 for a NULL handle.
#[no_mangle]
pub unsafe extern "C" fn spatnet_graph_edge_count(graph: *const SpatnetGraph) -> usize {
    guarded_value(0, || match require_ref(graph, "graph") {
        Ok(g) => g.sample.edges.len(),
        Err(_) => 0,
    })
}

/// Stop fraction the run was configured with, or NaN for a NULL handle.
#[no_mangle]
pub unsafe extern "C" fn spatnet_graph_gamma(graph: *const SpatnetGraph) -> f64 {
    guarded_value(f64::NAN, || match require_ref(graph, "graph") {
        Ok(g) => g.sample.gamma,
        Err(_) => f64::NAN,
    })
}

/// Seed the run was configured with, or 0 for a NULL handle.
#[no_mangle]
pub unsafe extern "C" fn spatnet_graph_seed(graph: *const SpatnetGraph) -> u64 {
    guarded_value(0, || match require_ref(graph, "graph") {
        Ok(g) => g.sample.seed,
        Err(_) => 0,
    })
}

/// Terminal status of the run that produced this graph.
#[no_mangle]
pub unsafe extern "C" fn spatnet_graph_status(
    graph: *const SpatnetGraph,
    out: *mut SpatnetRunStatus,
) -> SpatnetStatus {
    guarded(|| {
        let out = match require_out(out, "out") {
            Ok(o) => o,
            Err(s) => return s,
        };
        let graph = match require_ref(graph, "graph") {
            Ok(g) => g,
            Err(s) => return s,
        };
        *out = match graph.sample.status {
            RunStatus::Complete => SpatnetRunStatus::Complete,
            RunStatus::EarlyStop => SpatnetRunStatus::EarlyStop,
            RunStatus::Failure => SpatnetRunStatus::Failure,
        };
        SpatnetStatus::Ok
    })
}

/// Copies the placed edges into caller arrays of capacity `cap`.
///
/// Endpoints are zero-based. Fails with `SPATNET_STATUS_INVALID_ARGUMENT` if `cap`
/// is smaller than `spatnet_graph_edge_count`.
#[no_mangle]
pub unsafe extern "C" fn spatnet_graph_edges(
    graph: *const SpatnetGraph,
    out_i: *mut usize,
    out_j: *mut usize,
    out_r: *mut f64,
    cap: usize,
) -> SpatnetStatus {
    guarded(|| {
        let graph = match require_ref(graph, "graph") {
            Ok(g) => g,
            Err(s) => return s,
        };
        let count = graph.sample.edges.len();
        if cap < count {
            set_error(&format!("capacity {cap} too small for {count} edges"));
            return SpatnetStatus::InvalidArgument;
        }
        if count == 0 {
            return SpatnetStatus::Ok;
        }
        if out_i.is_null() || out_j.is_null() || out_r.is_null() {
            set_error("out_i, out_j, and out_r must not be NULL");
            return SpatnetStatus::NullPointer;
        }
        let is = std::slice::from_raw_parts_mut(out_i, count);
        let js = std::slice::from_raw_parts_mut(out_j, count);
        let rs = std::slice::from_raw_parts_mut(out_r, count);
        for (k, &(i, j, r)) in graph.sample.edges.iter().enumerate() {
            is[k] = i;
            js[k] = j;
            rs[k] = r;
        }
        SpatnetStatus::Ok
    })
}

/// Wasserstein-1 distance between the graph's edge lengths and a target spec.
#[no_mangle]
pub unsafe extern "C" fn spatnet_graph_w1(
    graph: *const SpatnetGraph,
    target_spec: *const c_char,
    out: *mut f64,
) -> SpatnetStatus {
    guarded(|| {
        let out = match require_out(out, "out") {
            Ok(o) => o,
            Err(s) => return s,
        };
        let graph = match require_ref(graph, "graph") {
            Ok(g) => g,
            Err(s) => return s,
        };
        let target_str = match require_str(target_spec, "target_spec") {
            Ok(s) => s,
            Err(s) => return s,
        };
        let target = match build_target(target_str) {
            Ok(t) => t,
            Err(e) => return invalid(e),
        };
        let lengths: Vec<f64> = graph.sample.edges.iter().map(|&(_, _, r)| r).collect();
        match EmpiricalLaw::from_lengths(&lengths) {
            Ok(law) => {
                *out = w1_empirical_target(&law, &target);
                SpatnetStatus::Ok
            }
            Err(e) => invalid(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn spatnet_graph_free(graph: *mut SpatnetGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Lower bound on the safe stop fraction gamma, from the ratio bound
/// `c_ratio`, maximum degree `d_max`, and mean degree `d_bar`. `eta` and `c`
/// are the occupancy and local-density constants; pass 1.0 for the defaults.
#[no_mangle]
pub unsafe extern "C" fn spatnet_gamma_lower_bound(
    c_ratio: f64,
    d_max: usize,
    d_bar: f64,
    eta: f64,
    c: f64,
    out: *mut f64,
) -> SpatnetStatus {
    guarded(|| {
        let out = match require_out(out, "out") {
            Ok(o) => o,
            Err(s) => return s,
        };
        let inputs = GammaBoundInputs {
            c_ratio,
            d_max,
            d_bar,
            eta,
            c,
            epsilon_grid: default_epsilon_grid(),
        };
        match spatnet::experiments::gamma_lower_bound(&inputs) {
            Ok(g) => {
                *out = g;
                SpatnetStatus::Ok
            }
            Err(e) => invalid(e),
        }
    })
}

/// Degree-corrected pair factor floor `1 - d_max^2 / (4m)`.
#[no_mangle]
pub extern "C" fn spatnet_degree_corrected_c(d_max: usize, m: usize) -> f64 {
    guarded_value(f64::NAN, || {
        spatnet::experiments::degree_corrected_c(d_max, m)
    })
}
