//! C ABI over the igdyn library: opaque model and trajectory handles,
//! integer status codes and a per-thread last-error message.
//!
//! Every function returns an [`IgdynStatus`]; results come back through out
//! pointers. Handles are released with their matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use igdyn::cli::{Report, ScenarioConfig};
use igdyn::dynamics::{integrate_geodesic, FlowOptions, GeodesicState, GeodesicTrajectory};
use igdyn::geometry::{self, Backend};
use igdyn::models::StatisticalModel;
use igdyn::Error;

/// Outcome of a call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IgdynStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    DimensionMismatch = 4,
    SingularMetric = 5,
    IntegrationFailed = 6,
    ConfigParse = 7,
    BufferTooSmall = 8,
    Panic = 9,
    Other = 10,
}

/// Opaque statistical model.
pub struct IgdynModel {
    inner: StatisticalModel,
}

/// Opaque sampled geodesic.
pub struct IgdynTrajectory {
    inner: GeodesicTrajectory,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> IgdynStatus {
    match e {
        Error::Domain(_) | Error::BoundaryTooClose { .. } | Error::NonNegativeK(_) => IgdynStatus::Domain,
        Error::DimensionMismatch { .. } => IgdynStatus::DimensionMismatch,
        Error::SingularMetric | Error::DegeneratePlane { .. } => IgdynStatus::SingularMetric,
        Error::DomainExit { .. }
        | Error::StepUnderflow { .. }
        | Error::TooManySteps { .. }
        | Error::CurvatureEvaluationFailed { .. } => IgdynStatus::IntegrationFailed,
        Error::ConfigParse { .. } => IgdynStatus::ConfigParse,
        Error::InvalidArgument(_) | Error::InconsistentCutoff { .. } => IgdynStatus::InvalidArgument,
        _ => IgdynStatus::Other,
    }
}

/// Runs `f`, recording errors and panics in the last-error slot.
fn guard(f: impl FnOnce() -> Result<(), (IgdynStatus, String)>) -> IgdynStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => IgdynStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            IgdynStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (IgdynStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(name: &str) -> (IgdynStatus, String) {
    (IgdynStatus::NullPointer, format!("`{name}` is null"))
}

/// # Safety
/// `p` must be null or point to `len` readable doubles.
unsafe fn slice<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64], (IgdynStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn emit_model(model: igdyn::Result<StatisticalModel>, out: *mut *mut IgdynModel) -> Result<(), (IgdynStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    let inner = model.map_err(lib_err)?;
    // SAFETY: `out` checked non-null above; caller guarantees it is writable.
    unsafe { *out = Box::into_raw(Box::new(IgdynModel { inner })) };
    Ok(())
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn igdyn_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn igdyn_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Product of `3 n_particles` univariate Gaussian pairs.
///
/// # Safety
/// `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn igdyn_model_gaussian_product(n_particles: usize, out: *mut *mut IgdynModel) -> IgdynStatus {
    guard(|| emit_model(StatisticalModel::gaussian_product(n_particles), out))
}

/// Bivariate Gaussian with fixed correlation `r` in (-1, 1).
///
/// # Safety
/// `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn igdyn_model_correlated_gaussian(r: f64, out: *mut *mut IgdynModel) -> IgdynStatus {
    guard(|| emit_model(StatisticalModel::correlated_gaussian(r), out))
}

/// Inverted oscillators with the given frequencies.
///
/// # Safety
/// `frequencies` must point to `len` doubles; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn igdyn_model_iho(frequencies: *const f64, len: usize, out: *mut *mut IgdynModel) -> IgdynStatus {
    guard(|| {
        let f = slice(frequencies, len, "frequencies")?;
        emit_model(StatisticalModel::iho(f.to_vec()), out)
    })
}

/// Releases a model; null is ignored.
///
/// # Safety
/// `model` must come from a constructor above and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn igdyn_model_free(model: *mut IgdynModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of manifold coordinates.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn igdyn_model_dimension(model: *const IgdynModel, out: *mut usize) -> IgdynStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = m.inner.dimension();
        Ok(())
    })
}

/// Metric at `x`, written row-major into `out` of capacity `out_len`.
///
/// # Safety
/// `x` must hold `dim` doubles and `out` `out_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn igdyn_metric(
    model: *const IgdynModel,
    x: *const f64,
    dim: usize,
    out: *mut f64,
    out_len: usize,
) -> IgdynStatus {
    guard(|| {
        let m = &model.as_ref().ok_or_else(|| null("model"))?.inner;
        let x = slice(x, dim, "x")?;
        let g = m.metric_at(&m.point(x).map_err(lib_err)?).map_err(lib_err)?;
        let n = g.dim();
        if out_len < n * n {
            return Err((IgdynStatus::BufferTooSmall, format!("need {} doubles, got {out_len}", n * n)));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let dst = std::slice::from_raw_parts_mut(out, n * n);
        for i in 0..n {
            for j in 0..n {
                dst[i * n + j] = g.components[(i, j)];
            }
        }
        Ok(())
    })
}

/// Scalar curvature at `x`; finite differences when `finite_diff` is true.
///
/// # Safety
/// `x` must hold `dim` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn igdyn_ricci_scalar(
    model: *const IgdynModel,
    x: *const f64,
    dim: usize,
    finite_diff: bool,
    out: *mut f64,
) -> IgdynStatus {
    guard(|| {
        let m = &model.as_ref().ok_or_else(|| null("model"))?.inner;
        let x = slice(x, dim, "x")?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let backend = if finite_diff { Backend::default() } else { Backend::Analytic };
        *out = geometry::ricci_scalar(m, x, backend).map_err(lib_err)?;
        Ok(())
    })
}

/// Integrates a geodesic from `(theta, velocity)` to `tau_end`, sampled
/// every `output_step` (every accepted step when `output_step <= 0`).
///
/// # Safety
/// `theta` and `velocity` must hold `dim` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn igdyn_geodesic(
    model: *const IgdynModel,
    theta: *const f64,
    velocity: *const f64,
    dim: usize,
    tau_end: f64,
    output_step: f64,
    out: *mut *mut IgdynTrajectory,
) -> IgdynStatus {
    guard(|| {
        let m = &model.as_ref().ok_or_else(|| null("model"))?.inner;
        let init = GeodesicState {
            tau: 0.0,
            theta: slice(theta, dim, "theta")?.to_vec(),
            velocity: slice(velocity, dim, "velocity")?.to_vec(),
        };
        if out.is_null() {
            return Err(null("out"));
        }
        let mut opts = FlowOptions::default();
        if output_step > 0.0 {
            opts = opts.with_output_step(output_step);
        }
        let inner = integrate_geodesic(m, &init, tau_end, &opts).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(IgdynTrajectory { inner }));
        Ok(())
    })
}

/// Number of samples in a trajectory.
///
/// # Safety
/// `trajectory` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn igdyn_trajectory_len(trajectory: *const IgdynTrajectory, out: *mut usize) -> IgdynStatus {
    guard(|| {
        let t = trajectory.as_ref().ok_or_else(|| null("trajectory"))?;
        *out.as_mut().ok_or_else(|| null("out"))? = t.inner.states.len();
        Ok(())
    })
}

/// Sample `index`: its time, and position and velocity written into
/// buffers of `dim` doubles each.
///
/// # Safety
/// `tau` must be writable; `theta` and `velocity` must hold `dim` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn igdyn_trajectory_sample(
    trajectory: *const IgdynTrajectory,
    index: usize,
    tau: *mut f64,
    theta: *mut f64,
    velocity: *mut f64,
    dim: usize,
) -> IgdynStatus {
    guard(|| {
        let t = trajectory.as_ref().ok_or_else(|| null("trajectory"))?;
        let s = t.inner.states.get(index).ok_or_else(|| {
            (
                IgdynStatus::InvalidArgument,
                format!("index {index} out of range {}", t.inner.states.len()),
            )
        })?;
        if dim < s.theta.len() {
            return Err((IgdynStatus::BufferTooSmall, format!("need {} doubles, got {dim}", s.theta.len())));
        }
        if tau.is_null() || theta.is_null() || velocity.is_null() {
            return Err(null("output buffer"));
        }
        *tau = s.tau;
        ptr::copy_nonoverlapping(s.theta.as_ptr(), theta, s.theta.len());
        ptr::copy_nonoverlapping(s.velocity.as_ptr(), velocity, s.velocity.len());
        Ok(())
    })
}

/// Releases a trajectory; null is ignored.
///
/// # Safety
/// `trajectory` must come from [`igdyn_geodesic`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn igdyn_trajectory_free(trajectory: *mut IgdynTrajectory) {
    if !trajectory.is_null() {
        drop(Box::from_raw(trajectory));
    }
}

/// Runs a scenario given as config text and returns the JSON report as a
/// string owned by the library; `all_pass` receives whether every claim held.
///
/// # Safety
/// `config` must be a nul-terminated string; `report_json` and `all_pass`
/// must be writable. Free the report with [`igdyn_string_free`].
#[no_mangle]
pub unsafe extern "C" fn igdyn_run_scenario(
    config: *const c_char,
    report_json: *mut *mut c_char,
    all_pass: *mut bool,
) -> IgdynStatus {
    guard(|| {
        if config.is_null() {
            return Err(null("config"));
        }
        if report_json.is_null() || all_pass.is_null() {
            return Err(null("output"));
        }
        let text = CStr::from_ptr(config)
            .to_str()
            .map_err(|_| (IgdynStatus::InvalidArgument, "config is not UTF-8".to_string()))?;
        let cfg = ScenarioConfig::parse(text).map_err(lib_err)?;
        let report = Report::new(vec![igdyn::cli::run_scenario(&cfg)]);
        let json = CString::new(report.to_json()).expect("json has no nul");
        *all_pass = report.pass;
        *report_json = json.into_raw();
        Ok(())
    })
}

/// Releases a string returned by this library; null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn igdyn_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
