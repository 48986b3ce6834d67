//! C interface to the covplan planner.
//!
//! Objects cross the boundary as opaque handles that the caller frees with the
//! matching `_free` function. Every fallible call returns a `CovplanStatus`; on
//! failure the message is available from `covplan_last_error` on the same thread.
//! Strings handed out by the library are freed with `covplan_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use covplan::pipeline::{self, Config, FieldMap, Layer, MissionPlan};
use covplan::routing;
use covplan::Error;

/// Result of a fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CovplanStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidGeometry = 2,
    InvalidArgument = 3,
    Infeasible = 4,
    LoadFailed = 5,
    InputError = 6,
    IoError = 7,
    JsonError = 8,
    InvalidUtf8 = 9,
    Panic = 10,
}

/// Which layers `covplan_plan_render_svg` draws.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CovplanLayer {
    Field = 0,
    Partition = 1,
    Trails = 2,
    Routes = 3,
    Car = 4,
    All = 5,
}

impl From<CovplanLayer> for Layer {
    fn from(l: CovplanLayer) -> Layer {
        match l {
            CovplanLayer::Field => Layer::Field,
            CovplanLayer::Partition => Layer::Partition,
            CovplanLayer::Trails => Layer::Trails,
            CovplanLayer::Routes => Layer::Routes,
            CovplanLayer::Car => Layer::Car,
            CovplanLayer::All => Layer::All,
        }
    }
}

/// A loaded field map.
pub struct CovplanMap(FieldMap);

/// Planner configuration.
pub struct CovplanConfig(Config);

/// A finished mission plan.
pub struct CovplanPlan(MissionPlan);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> CovplanStatus {
    match e {
        Error::InvalidGeometry(_) => CovplanStatus::InvalidGeometry,
        Error::InvalidArgument(_) => CovplanStatus::InvalidArgument,
        Error::Infeasible { .. } => CovplanStatus::Infeasible,
        Error::Load(_) => CovplanStatus::LoadFailed,
        Error::Input(_) => CovplanStatus::InputError,
        Error::Io(_) => CovplanStatus::IoError,
        Error::Json(_) => CovplanStatus::JsonError,
    }
}

struct Fail(CovplanStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Fail {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(CovplanStatus::NullArgument, format!("{what} is null"))
}

/// Run `f`, turning errors and panics into a status plus the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> CovplanStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CovplanStatus::Ok,
        Ok(Err(Fail(s, msg))) => {
            set_error(msg);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal error: {msg}"));
            CovplanStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(CovplanStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut *mut T, v: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(v));
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    let c = CString::new(s).map_err(|_| Fail(CovplanStatus::InputError, "string contains NUL".into()))?;
    *out = c.into_raw();
    Ok(())
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn covplan_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL.
/// The pointer stays valid until the next library call on the thread.
#[no_mangle]
pub extern "C" fn covplan_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Free a string returned by the library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn covplan_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parse a GeoJSON map from text.
///
/// # Safety
/// `geojson` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn covplan_map_parse(geojson: *const c_char, out: *mut *mut CovplanMap) -> CovplanStatus {
    guard(|| {
        let t = text(geojson, "geojson")?;
        put(out, CovplanMap(pipeline::parse_map(t)?))
    })
}

/// Load a GeoJSON map from a file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn covplan_map_load(path: *const c_char, out: *mut *mut CovplanMap) -> CovplanStatus {
    guard(|| {
        let p = text(path, "path")?;
        put(out, CovplanMap(pipeline::load_map(p)?))
    })
}

/// Farmland area net of obstacles, square meters. Zero for NULL.
///
/// # Safety
/// `map` must be NULL or a live map handle.
#[no_mangle]
pub unsafe extern "C" fn covplan_map_area(map: *const CovplanMap) -> f64 {
    map.as_ref().map_or(0.0, |m| m.0.region_area())
}

/// # Safety
/// `map` must be NULL or a live map handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn covplan_map_free(map: *mut CovplanMap) {
    free(map)
}

/// Default configuration. Never NULL.
#[no_mangle]
pub extern "C" fn covplan_config_default() -> *mut CovplanConfig {
    Box::into_raw(Box::new(CovplanConfig(Config::default())))
}

/// Configuration from TOML text, merged over the defaults.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn covplan_config_from_toml(toml: *const c_char, out: *mut *mut CovplanConfig) -> CovplanStatus {
    guard(|| {
        let t = text(toml, "toml")?;
        put(out, CovplanConfig(Config::from_toml(t)?))
    })
}

/// # Safety
/// `cfg` must be NULL or a live config handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn covplan_config_free(cfg: *mut CovplanConfig) {
    free(cfg)
}

/// Plan a mission over `map`.
///
/// # Safety
/// `map` and `cfg` must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn covplan_plan_mission(
    map: *const CovplanMap,
    cfg: *const CovplanConfig,
    seed: u64,
    out: *mut *mut CovplanPlan,
) -> CovplanStatus {
    guard(|| {
        let m = get(map, "map")?;
        let c = get(cfg, "config")?;
        put(out, CovplanPlan(pipeline::plan_mission(&m.0, &c.0, seed)?))
    })
}

/// Read a plan from its JSON form.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn covplan_plan_from_json(json: *const c_char, out: *mut *mut CovplanPlan) -> CovplanStatus {
    guard(|| {
        let t = text(json, "json")?;
        put(out, CovplanPlan(MissionPlan::from_json(t)?))
    })
}

/// Plan as JSON; free the result with `covplan_string_free`.
///
/// # Safety
/// `plan` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn covplan_plan_to_json(plan: *const CovplanPlan, with_timings: bool, out: *mut *mut c_char) -> CovplanStatus {
    guard(|| {
        let p = get(plan, "plan")?;
        put_string(out, p.0.to_json(with_timings))
    })
}

/// Number of sub-areas in the plan. Zero for NULL.
///
/// # Safety
/// `plan` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn covplan_plan_subarea_count(plan: *const CovplanPlan) -> usize {
    plan.as_ref().map_or(0, |p| p.0.subareas.len())
}

/// Longest UAV flight time of the plan, seconds. Zero for NULL.
///
/// # Safety
/// `plan` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn covplan_plan_makespan(plan: *const CovplanPlan) -> f64 {
    plan.as_ref()
        .map_or(0.0, |p| p.0.metrics.uavs.iter().map(|u| u.flight_time).fold(0.0, f64::max))
}

/// Validate a plan against its map and the config's fleet.
/// `passed` receives the verdict; `report`, when not NULL, receives the text
/// report to free with `covplan_string_free`.
///
/// # Safety
/// Handles must be live; `passed` must be valid; `report` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn covplan_plan_validate(
    plan: *const CovplanPlan,
    map: *const CovplanMap,
    cfg: *const CovplanConfig,
    passed: *mut bool,
    report: *mut *mut c_char,
) -> CovplanStatus {
    guard(|| {
        let p = get(plan, "plan")?;
        let m = get(map, "map")?;
        let c = get(cfg, "config")?;
        if passed.is_null() {
            return Err(null("passed"));
        }
        let r = pipeline::validate_mission_with(&p.0, &m.0, &c.0.fleet, c.0.validation.samples_per_subarea);
        *passed = r.passed;
        if !report.is_null() {
            put_string(report, r.summary())?;
        }
        Ok(())
    })
}

/// SVG drawing of the plan; free the result with `covplan_string_free`.
///
/// # Safety
/// Handles must be live and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn covplan_plan_render_svg(
    plan: *const CovplanPlan,
    map: *const CovplanMap,
    layer: CovplanLayer,
    out: *mut *mut c_char,
) -> CovplanStatus {
    guard(|| {
        let p = get(plan, "plan")?;
        let m = get(map, "map")?;
        put_string(out, pipeline::render_svg(&p.0, &m.0, layer.into()))
    })
}

/// # Safety
/// `plan` must be NULL or a live handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn covplan_plan_free(plan: *mut CovplanPlan) {
    free(plan)
}

/// Open asymmetric TSP path over an `n`×`n` row-major cost matrix.
/// `start` fixes the first city when it is below `n`; pass any larger value
/// for a free start. `order` receives `n` city indices.
///
/// # Safety
/// `cost` must hold `n*n` values, `order` room for `n`, `total` must be valid.
#[no_mangle]
pub unsafe extern "C" fn covplan_atsp_order(
    cost: *const f64,
    n: usize,
    start: usize,
    order: *mut usize,
    total: *mut f64,
) -> CovplanStatus {
    guard(|| {
        if n > 0 && (cost.is_null() || order.is_null()) {
            return Err(null("cost or order"));
        }
        if total.is_null() {
            return Err(null("total"));
        }
        let flat = if n == 0 { &[][..] } else { std::slice::from_raw_parts(cost, n * n) };
        let rows: Vec<Vec<f64>> = flat.chunks(n.max(1)).map(<[f64]>::to_vec).collect();
        let (o, t) = routing::atsp_order(&rows, (start < n).then_some(start))?;
        if n > 0 {
            std::slice::from_raw_parts_mut(order, n).copy_from_slice(&o);
        }
        *total = t;
        Ok(())
    })
}
