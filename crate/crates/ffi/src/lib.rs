//! C interface to the herdsim simulator.
//!
//! Every function returns an [`HsStatus`] and writes its result through an
//! out-pointer. On failure the message is available from
//! [`hs_last_error_message`] on the same thread until the next failing call.
//! Objects are opaque handles released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use herdsim::herding::{self, simulate_path, PricePath};
use herdsim::noise::{self, NoiseSpec, SeasonalityProfile};
use herdsim::series::{build_returns, ReturnSeries};
use herdsim::{stats, Error, ModelParams};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParam = 2,
    Domain = 3,
    Integration = 4,
    InsufficientData = 5,
    ZeroVariance = 6,
    BufferTooSmall = 7,
    Panic = 8,
    Other = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HsNoiseKind {
    Gaussian = 0,
    QGaussian = 1,
}

/// Model parameters, field for field the same as the TOML `[model]` table.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct HsParams {
    pub eps_cf: f64,
    pub eps_fc: f64,
    pub eps_cc: f64,
    pub herd_ratio: f64,
    pub herding_rate: f64,
    pub feedback_weight: f64,
    pub noise_scale: f64,
    pub feedback_exponent: f64,
    pub tail_exponent: f64,
    pub precision: f64,
    pub boundary_margin: f64,
}

impl From<ModelParams> for HsParams {
    fn from(p: ModelParams) -> Self {
        Self {
            eps_cf: p.eps_cf,
            eps_fc: p.eps_fc,
            eps_cc: p.eps_cc,
            herd_ratio: p.herd_ratio,
            herding_rate: p.herding_rate,
            feedback_weight: p.feedback_weight,
            noise_scale: p.noise_scale,
            feedback_exponent: p.feedback_exponent,
            tail_exponent: p.tail_exponent,
            precision: p.precision,
            boundary_margin: p.boundary_margin,
        }
    }
}

impl From<HsParams> for ModelParams {
    fn from(p: HsParams) -> Self {
        Self {
            eps_cf: p.eps_cf,
            eps_fc: p.eps_fc,
            eps_cc: p.eps_cc,
            herd_ratio: p.herd_ratio,
            herding_rate: p.herding_rate,
            feedback_weight: p.feedback_weight,
            noise_scale: p.noise_scale,
            feedback_exponent: p.feedback_exponent,
            tail_exponent: p.tail_exponent,
            precision: p.precision,
            boundary_margin: p.boundary_margin,
        }
    }
}

/// Simulated minute-grid path.
pub struct HsPricePath(PricePath);

/// Return series for one window.
pub struct HsReturnSeries(ReturnSeries);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> HsStatus {
    match e.root() {
        Error::InvalidParam { .. } => HsStatus::InvalidParam,
        Error::Domain(_) => HsStatus::Domain,
        Error::Integration { .. } => HsStatus::Integration,
        Error::InsufficientData(_) => HsStatus::InsufficientData,
        Error::ZeroVariance => HsStatus::ZeroVariance,
        _ => HsStatus::Other,
    }
}

enum Fail {
    Null(&'static str),
    Small { need: usize, got: usize },
    Core(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> HsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HsStatus::Ok,
        Ok(Err(Fail::Null(arg))) => {
            set_error(format!("null pointer passed for `{arg}`"));
            HsStatus::NullPointer
        }
        Ok(Err(Fail::Small { need, got })) => {
            set_error(format!("buffer holds {got} values, {need} required"));
            HsStatus::BufferTooSmall
        }
        Ok(Err(Fail::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            HsStatus::Panic
        }
    }
}

unsafe fn out<'a, T>(p: *mut T, name: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(name))
}

unsafe fn arg<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(name))
}

/// Copies `src` into `buf`, or fails with `BufferTooSmall`.
unsafe fn copy_out(src: &[f64], buf: *mut f64, cap: usize) -> Result<(), Fail> {
    if src.len() > cap {
        return Err(Fail::Small { need: src.len(), got: cap });
    }
    if src.is_empty() {
        return Ok(());
    }
    if buf.is_null() {
        return Err(Fail::Null("buf"));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(())
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn hs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `out` must be null or point to writable memory for one `HsParams`.
#[no_mangle]
pub unsafe extern "C" fn hs_params_default(out_params: *mut HsParams) -> HsStatus {
    guard(|| {
        *out(out_params, "out_params")? = ModelParams::default().into();
        Ok(())
    })
}

/// # Safety
/// `params` must be null or point to a valid `HsParams`.
#[no_mangle]
pub unsafe extern "C" fn hs_params_validate(params: *const HsParams) -> HsStatus {
    guard(|| {
        ModelParams::from(*arg(params, "params")?).validate()?;
        Ok(())
    })
}

/// Width scale of the q-Gaussian noise for a window of `window` minutes.
///
/// # Safety
/// `out_value` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn hs_sigma_q(window: f64, lambda: f64, out_value: *mut f64) -> HsStatus {
    guard(|| {
        *out(out_value, "out_value")? = noise::sigma_q(window, lambda)?;
        Ok(())
    })
}

/// # Safety
/// `out_value` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn hs_log_price(n_f: f64, xi: f64, out_value: *mut f64) -> HsStatus {
    guard(|| {
        *out(out_value, "out_value")? = herding::log_price(n_f, xi)?;
        Ok(())
    })
}

/// Inverse time scale `(1 + a|p|)^alpha`.
///
/// # Safety
/// `out_value` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn hs_transaction_rate(
    n_f: f64,
    xi: f64,
    a: f64,
    alpha: f64,
    out_value: *mut f64,
) -> HsStatus {
    guard(|| {
        *out(out_value, "out_value")? = herding::transaction_rate(n_f, xi, a, alpha)?;
        Ok(())
    })
}

/// # Safety
/// `values` must point to `len` readable doubles; `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hs_hill_tail_exponent(
    values: *const f64,
    len: usize,
    top_fraction: f64,
    out_value: *mut f64,
) -> HsStatus {
    guard(|| {
        let xs = if len == 0 { &[][..] } else { std::slice::from_raw_parts(arg(values, "values")?, len) };
        *out(out_value, "out_value")? = stats::hill_tail_exponent(xs, top_fraction)?;
        Ok(())
    })
}

/// Simulates `duration` minutes after discarding `burn_in` minutes.
///
/// # Safety
/// `params` must point to a valid `HsParams`; `out_path` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hs_simulate_path(
    params: *const HsParams,
    duration: u64,
    burn_in: u64,
    seed: u64,
    out_path: *mut *mut HsPricePath,
) -> HsStatus {
    guard(|| {
        let slot = out(out_path, "out_path")?;
        *slot = ptr::null_mut();
        let p = ModelParams::from(*arg(params, "params")?);
        let path = simulate_path(&p, duration, burn_in, seed)?;
        *slot = Box::into_raw(Box::new(HsPricePath(path)));
        Ok(())
    })
}

/// # Safety
/// `path` must be null or a handle from `hs_simulate_path`.
#[no_mangle]
pub unsafe extern "C" fn hs_price_path_len(path: *const HsPricePath, out_len: *mut usize) -> HsStatus {
    guard(|| {
        *out(out_len, "out_len")? = arg(path, "path")?.0.len();
        Ok(())
    })
}

/// Copies the log-price of every minute into `buf`.
///
/// # Safety
/// `path` must be a live handle; `buf` must hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn hs_price_path_log_prices(
    path: *const HsPricePath,
    buf: *mut f64,
    cap: usize,
) -> HsStatus {
    guard(|| {
        let ps: Vec<f64> = arg(path, "path")?.0.log_prices().collect();
        copy_out(&ps, buf, cap)
    })
}

/// # Safety
/// `path` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn hs_price_path_free(path: *mut HsPricePath) {
    if !path.is_null() {
        drop(Box::from_raw(path));
    }
}

/// One-minute returns of `path` with constant noise scale, normalized to
/// unit variance.
///
/// # Safety
/// `path` must be a live handle; `out_series` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hs_returns_from_path(
    path: *const HsPricePath,
    kind: HsNoiseKind,
    seed: u64,
    out_series: *mut *mut HsReturnSeries,
) -> HsStatus {
    guard(|| {
        let slot = out(out_series, "out_series")?;
        *slot = ptr::null_mut();
        let path = &arg(path, "path")?.0;
        let spec = match kind {
            HsNoiseKind::Gaussian => NoiseSpec::gaussian(1.0),
            HsNoiseKind::QGaussian => NoiseSpec::q_gaussian(path.params.tail_exponent, 1.0),
        };
        let profile = SeasonalityProfile::Constant { b: path.params.noise_scale };
        let raw = build_returns(path, &spec, path.params.feedback_weight, &profile, seed)?;
        *slot = Box::into_raw(Box::new(HsReturnSeries(raw.normalize_unit_variance()?)));
        Ok(())
    })
}

/// Non-overlapping sums of `m` consecutive returns within each session.
///
/// # Safety
/// `series` must be a live handle; `out_series` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hs_return_series_aggregate(
    series: *const HsReturnSeries,
    m: usize,
    out_series: *mut *mut HsReturnSeries,
) -> HsStatus {
    guard(|| {
        let slot = out(out_series, "out_series")?;
        *slot = ptr::null_mut();
        let agg = arg(series, "series")?.0.aggregate(m)?;
        *slot = Box::into_raw(Box::new(HsReturnSeries(agg)));
        Ok(())
    })
}

/// # Safety
/// `series` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hs_return_series_len(series: *const HsReturnSeries, out_len: *mut usize) -> HsStatus {
    guard(|| {
        *out(out_len, "out_len")? = arg(series, "series")?.0.len();
        Ok(())
    })
}

/// # Safety
/// `series` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hs_return_series_window(series: *const HsReturnSeries, out_window: *mut u32) -> HsStatus {
    guard(|| {
        *out(out_window, "out_window")? = arg(series, "series")?.0.window;
        Ok(())
    })
}

/// # Safety
/// `series` must be a live handle; `buf` must hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn hs_return_series_values(
    series: *const HsReturnSeries,
    buf: *mut f64,
    cap: usize,
) -> HsStatus {
    guard(|| copy_out(&arg(series, "series")?.0.values, buf, cap))
}

/// # Safety
/// `series` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn hs_return_series_free(series: *mut HsReturnSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}
