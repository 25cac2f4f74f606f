//! C ABI over the gridsweep library.
//!
//! Every fallible function returns a [`GsStatus`]; on failure a message is
//! available from [`gs_last_error`] on the same thread until the next call.
//! Objects are opaque handles created by `gs_*_new`/`gs_sample_hosts` and
//! released by the matching `*_free`. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use gridsweep::gridsim::{scaled_runtime, ReferenceHost, TaskMode, TaskSpec};
use gridsweep::hosts::{sample_hosts, HostPopulation, HostSpec, PopulationParams};
use gridsweep::stats::{self, Distribution, FitResult, KsMode, KsModeKind, Sample};
use gridsweep::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    DegenerateSample = 3,
    DomainError = 4,
    NotConverged = 5,
    OutOfRange = 6,
    Internal = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GsFamily {
    Normal = 0,
    Weibull = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GsKsMode {
    Asymptotic = 0,
    ParametricBootstrap = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GsPreset {
    /// All hosts registered with the project.
    Registered = 0,
    /// Hosts that ran the MD application.
    Lammps = 1,
}

/// Normal: `param1` = mean, `param2` = sd. Weibull: shape, scale.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GsFit {
    pub family: GsFamily,
    pub param1: f64,
    pub param2: f64,
    pub log_likelihood: f64,
    pub converged: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GsKsOutcome {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
    pub mode: GsKsMode,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GsMoments {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub kurtosis: f64,
    pub beta1: f64,
    pub beta2: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GsHost {
    pub id: u32,
    pub gflops: f64,
    pub n_cpus: u32,
    pub ram_gb: f64,
    pub hdd_gb: f64,
    pub on_rate: f64,
    pub off_rate: f64,
}

/// Opaque sample of finite values.
pub struct GsSample(Sample);

/// Opaque host population.
pub struct GsPopulation(HostPopulation);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> GsStatus {
    match e {
        Error::Parameter(_) => GsStatus::InvalidParameter,
        Error::DegenerateSample => GsStatus::DegenerateSample,
        Error::Domain(_) => GsStatus::DomainError,
        _ => GsStatus::Internal,
    }
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), (GsStatus, String)>) -> GsStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GsStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            GsStatus::Internal
        }
    }
}

fn lib_err(e: Error) -> (GsStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (GsStatus, String) {
    (GsStatus::NullPointer, format!("{what} is null"))
}

/// Writes `value` through `out`, failing on a null pointer.
unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), (GsStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn sample_ref<'a>(s: *const GsSample) -> Result<&'a Sample, (GsStatus, String)> {
    s.as_ref().map(|s| &s.0).ok_or_else(|| null("sample"))
}

fn to_fit(f: &FitResult) -> GsFit {
    let (param1, param2) = f.params();
    GsFit {
        family: match f.family() {
            stats::Family::Normal => GsFamily::Normal,
            stats::Family::Weibull => GsFamily::Weibull,
        },
        param1,
        param2,
        log_likelihood: f.log_likelihood,
        converged: f.converged,
    }
}

fn from_fit(f: &GsFit) -> FitResult {
    let law = match f.family {
        GsFamily::Normal => Distribution::Normal {
            mean: f.param1,
            sd: f.param2,
        },
        GsFamily::Weibull => Distribution::Weibull {
            shape: f.param1,
            scale: f.param2,
        },
    };
    FitResult {
        law,
        log_likelihood: f.log_likelihood,
        converged: f.converged,
        iterations: 0,
    }
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next gridsweep call on the same thread.
#[no_mangle]
pub extern "C" fn gs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Copies `n` values into a new sample handle.
///
/// # Safety
/// `values` must point to `n` readable doubles (may be NULL when `n == 0`);
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn gs_sample_new(values: *const f64, n: usize, out: *mut *mut GsSample) -> GsStatus {
    guard(|| {
        if values.is_null() && n > 0 {
            return Err(null("values"));
        }
        let v = if n == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(values, n).to_vec()
        };
        let sample = Sample::new(v, "ffi").map_err(lib_err)?;
        put(out, Box::into_raw(Box::new(GsSample(sample))), "out")
    })
}

/// # Safety
/// `sample` must be NULL or a handle from [`gs_sample_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gs_sample_free(sample: *mut GsSample) {
    if !sample.is_null() {
        drop(Box::from_raw(sample));
    }
}

/// # Safety
/// `sample` must be a live sample handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gs_fit_normal(sample: *const GsSample, out: *mut GsFit) -> GsStatus {
    guard(|| {
        let fit = stats::fit_normal(sample_ref(sample)?).map_err(lib_err)?;
        put(out, to_fit(&fit), "out")
    })
}

/// Two-parameter Weibull MLE. A fit that ran out of iterations is still
/// written to `out` (with `converged = false`) and reported as
/// `NotConverged`.
///
/// # Safety
/// `sample` must be a live sample handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gs_fit_weibull(sample: *const GsSample, out: *mut GsFit) -> GsStatus {
    guard(|| {
        let fit = stats::fit_weibull(sample_ref(sample)?).map_err(lib_err)?;
        put(out, to_fit(&fit), "out")?;
        if fit.converged {
            Ok(())
        } else {
            Err((GsStatus::NotConverged, "Weibull fit did not converge".into()))
        }
    })
}

/// Kolmogorov-Smirnov test of `sample` against `fit`. `resamples` and
/// `seed` are used only in parametric-bootstrap mode.
///
/// # Safety
/// `sample` must be a live sample handle; `fit` readable; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gs_ks_test(
    sample: *const GsSample,
    fit: *const GsFit,
    mode: GsKsMode,
    resamples: usize,
    seed: u64,
    out: *mut GsKsOutcome,
) -> GsStatus {
    guard(|| {
        let sample = sample_ref(sample)?;
        let fit = fit.as_ref().ok_or_else(|| null("fit"))?;
        let mode = match mode {
            GsKsMode::Asymptotic => KsMode::Asymptotic,
            GsKsMode::ParametricBootstrap => KsMode::ParametricBootstrap { resamples, seed },
        };
        let r = stats::ks_test(sample, &from_fit(fit), mode).map_err(lib_err)?;
        put(
            out,
            GsKsOutcome {
                statistic: r.statistic,
                p_value: r.p_value,
                n: r.n,
                mode: match r.mode {
                    KsModeKind::Asymptotic => GsKsMode::Asymptotic,
                    KsModeKind::ParametricBootstrap => GsKsMode::ParametricBootstrap,
                },
            },
            "out",
        )
    })
}

/// # Safety
/// `sample` must be a live sample handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gs_moment_summary(sample: *const GsSample, out: *mut GsMoments) -> GsStatus {
    guard(|| {
        let m = stats::moment_summary(sample_ref(sample)?).map_err(lib_err)?;
        put(
            out,
            GsMoments {
                mean: m.mean,
                variance: m.variance,
                skewness: m.skewness,
                kurtosis: m.kurtosis,
                beta1: m.beta1,
                beta2: m.beta2,
            },
            "out",
        )
    })
}

/// Pearson-plane point `(β1, β2)` of a Weibull law with shape `k`.
///
/// # Safety
/// `beta1` and `beta2` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gs_weibull_locus(k: f64, beta1: *mut f64, beta2: *mut f64) -> GsStatus {
    guard(|| {
        let (b1, b2) = stats::weibull_locus(k).map_err(lib_err)?;
        put(beta1, b1, "beta1")?;
        put(beta2, b2, "beta2")
    })
}

/// Job runtime on a host of `host_gflops`, given its runtime `t_ref_s` on
/// the reference host of `reference_gflops` (pass 0 for the default).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gs_scaled_runtime(
    t_ref_s: f64,
    host_gflops: f64,
    reference_gflops: f64,
    out: *mut f64,
) -> GsStatus {
    guard(|| {
        let reference = if reference_gflops == 0.0 {
            ReferenceHost::default()
        } else {
            ReferenceHost { gflops: reference_gflops }
        };
        let valid = |x: f64| x > 0.0 && x.is_finite();
        if !(t_ref_s >= 0.0 && t_ref_s.is_finite() && valid(host_gflops) && valid(reference.gflops)) {
            return Err((GsStatus::InvalidParameter, "runtimes must be >= 0 and FLOP rates > 0".into()));
        }
        let task = TaskSpec::new("ffi", t_ref_s, 1, TaskMode::Shared);
        let host = HostSpec::dedicated(0, host_gflops, 1);
        put(out, scaled_runtime(&task, &host, &reference), "out")
    })
}

/// Samples `n_hosts` hosts from a preset population law.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn gs_sample_hosts(
    preset: GsPreset,
    n_hosts: usize,
    seed: u64,
    out: *mut *mut GsPopulation,
) -> GsStatus {
    guard(|| {
        let base = match preset {
            GsPreset::Registered => PopulationParams::registered(),
            GsPreset::Lammps => PopulationParams::used_in_lammps(),
        };
        let params = PopulationParams { n_hosts, seed, ..base };
        let pop = sample_hosts(&params).map_err(lib_err)?;
        put(out, Box::into_raw(Box::new(GsPopulation(pop))), "out")
    })
}

/// Number of hosts; 0 for a NULL handle.
///
/// # Safety
/// `pop` must be NULL or a live population handle.
#[no_mangle]
pub unsafe extern "C" fn gs_population_len(pop: *const GsPopulation) -> usize {
    pop.as_ref().map_or(0, |p| p.0.len())
}

/// # Safety
/// `pop` must be a live population handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gs_population_host(pop: *const GsPopulation, index: usize, out: *mut GsHost) -> GsStatus {
    guard(|| {
        let pop = pop.as_ref().ok_or_else(|| null("population"))?;
        let h = pop.0.hosts.get(index).ok_or_else(|| {
            (
                GsStatus::OutOfRange,
                format!("host index {index} out of range (len {})", pop.0.len()),
            )
        })?;
        put(
            out,
            GsHost {
                id: h.id,
                gflops: h.gflops,
                n_cpus: h.n_cpus,
                ram_gb: h.ram_gb,
                hdd_gb: h.hdd_gb,
                on_rate: h.on_rate,
                off_rate: h.off_rate,
            },
            "out",
        )
    })
}

/// # Safety
/// `pop` must be NULL or a handle from [`gs_sample_hosts`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gs_population_free(pop: *mut GsPopulation) {
    if !pop.is_null() {
        drop(Box::from_raw(pop));
    }
}
