//! C ABI for the quantrl library.
//!
//! Every function returns a [`QrlStatus`]. On failure the thread's last error message is
//! set and can be read with [`qrl_last_error_message`]. Handles are opaque, created by a
//! `*_new`/`*_load` function and released with the matching `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;
use std::sync::Arc;

use quantrl::agents::{self, argmax, AgentError, Mlp};
use quantrl::backtest::{self, BacktestError};
use quantrl::market_data::{self, DataError, OhlcvSeries};
use quantrl::runner::{self, ExperimentConfig, RunnerError};
use quantrl::trading_env::{Action, EnvError, TradingEnv};

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QrlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Data = 4,
    Config = 5,
    Runtime = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// Price series handle.
pub struct QrlSeries {
    inner: Arc<OhlcvSeries>,
}

/// Trading environment handle; keeps the latest observation.
pub struct QrlEnv {
    env: TradingEnv,
}

/// Trained network handle.
pub struct QrlPolicy {
    net: Mlp,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure {
    status: QrlStatus,
    message: String,
}

impl Failure {
    fn new(status: QrlStatus, message: impl Into<String>) -> Self {
        Self { status, message: message.into() }
    }
}

impl From<DataError> for Failure {
    fn from(e: DataError) -> Self {
        let status = if matches!(e, DataError::Io { .. }) { QrlStatus::Io } else { QrlStatus::Data };
        Failure::new(status, e.to_string())
    }
}

impl From<EnvError> for Failure {
    fn from(e: EnvError) -> Self {
        let status = match e {
            EnvError::InvalidConfig(_) => QrlStatus::Config,
            EnvError::InvalidAction(_) => QrlStatus::InvalidArgument,
            _ => QrlStatus::Runtime,
        };
        Failure::new(status, e.to_string())
    }
}

impl From<AgentError> for Failure {
    fn from(e: AgentError) -> Self {
        let status = match e {
            AgentError::Io(_) => QrlStatus::Io,
            AgentError::CorruptFile(_) => QrlStatus::Data,
            AgentError::ShapeMismatch(_) => QrlStatus::InvalidArgument,
            _ => QrlStatus::Runtime,
        };
        Failure::new(status, e.to_string())
    }
}

impl From<BacktestError> for Failure {
    fn from(e: BacktestError) -> Self {
        let status = match e {
            BacktestError::TooFewSamples { .. } | BacktestError::InvalidCurve => QrlStatus::InvalidArgument,
            _ => QrlStatus::Runtime,
        };
        Failure::new(status, e.to_string())
    }
}

impl From<RunnerError> for Failure {
    fn from(e: RunnerError) -> Self {
        let status = match e.exit_code() {
            2 => QrlStatus::Config,
            3 => QrlStatus::Data,
            _ => QrlStatus::Runtime,
        };
        Failure::new(status, e.to_string())
    }
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard<F>(f: F) -> QrlStatus
where
    F: FnOnce() -> Result<(), Failure>,
{
    match panic::catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QrlStatus::Ok,
        Ok(Err(e)) => {
            set_error(&e.message);
            e.status
        }
        Err(_) => {
            set_error("internal panic");
            QrlStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure::new(QrlStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::new(QrlStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn slice_arg<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], Failure> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn handle_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Copies `src` into a caller buffer of `cap` values; `written` receives `src.len()` even
/// when the buffer is too small.
unsafe fn copy_out(src: &[f64], buf: *mut f64, cap: usize, written: *mut usize) -> Result<(), Failure> {
    if let Some(w) = written.as_mut() {
        *w = src.len();
    }
    if cap < src.len() {
        return Err(Failure::new(
            QrlStatus::BufferTooSmall,
            format!("buffer holds {cap} values, need {}", src.len()),
        ));
    }
    if !src.is_empty() {
        if buf.is_null() {
            return Err(null("buffer"));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    }
    Ok(())
}

/// Message of the last failed call on this thread, or null. Valid until the next failing
/// call on the same thread.
#[no_mangle]
pub extern "C" fn qrl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qrl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads an OHLCV CSV file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qrl_series_load_csv(path: *const c_char, out: *mut *mut QrlSeries) -> QrlStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let path = PathBuf::from(str_arg(path, "path")?);
        let series = market_data::load_csv(&path)?;
        *out = Box::into_raw(Box::new(QrlSeries { inner: Arc::new(series) }));
        Ok(())
    })
}

/// Builds a flat-bar daily series from closing prices (consecutive calendar days from
/// 2000-01-01, constant volume).
///
/// # Safety
/// `closes` must point to `n` values and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qrl_series_from_closes(closes: *const f64, n: usize, out: *mut *mut QrlSeries) -> QrlStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let closes = slice_arg(closes, n, "closes")?;
        if closes.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
            return Err(Failure::new(QrlStatus::Data, "closes must be positive and finite"));
        }
        if closes.is_empty() {
            return Err(Failure::new(QrlStatus::Data, "closes is empty"));
        }
        let series = quantrl::synthetic::bars_from_closes(closes, 1_000.0);
        *out = Box::into_raw(Box::new(QrlSeries { inner: Arc::new(series) }));
        Ok(())
    })
}

/// # Safety
/// `series` must come from this library and `out_len` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qrl_series_len(series: *const QrlSeries, out_len: *mut usize) -> QrlStatus {
    guard(|| {
        *out_arg(out_len, "out_len")? = handle(series, "series")?.inner.len();
        Ok(())
    })
}

/// Copies closing prices into `buf` (capacity `cap`); `written` receives the series length.
///
/// # Safety
/// `buf` must hold `cap` values.
#[no_mangle]
pub unsafe extern "C" fn qrl_series_closes(
    series: *const QrlSeries,
    buf: *mut f64,
    cap: usize,
    written: *mut usize,
) -> QrlStatus {
    guard(|| copy_out(&handle(series, "series")?.inner.closes(), buf, cap, written))
}

/// # Safety
/// `series` must come from this library or be null; it must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qrl_series_free(series: *mut QrlSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}

/// Creates an environment over `series`. `config_json` is an experiment config document
/// (its `features`, `normalization` and `env` sections are used); null means defaults.
///
/// # Safety
/// `series` must be a live handle; `config_json` null or NUL-terminated; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn qrl_env_new(
    series: *const QrlSeries,
    config_json: *const c_char,
    out: *mut *mut QrlEnv,
) -> QrlStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let series = handle(series, "series")?.inner.clone();
        let cfg = if config_json.is_null() {
            ExperimentConfig::default()
        } else {
            ExperimentConfig::from_json(str_arg(config_json, "config_json")?)?
        };
        let features = Arc::new(runner::build_features(&cfg, &series)?);
        let env = TradingEnv::new(
            series,
            features,
            cfg.env.clone(),
            cfg.normalization.kind,
            &cfg.normalization.overrides,
        )?;
        *out = Box::into_raw(Box::new(QrlEnv { env }));
        Ok(())
    })
}

/// Number of values in a flattened observation.
///
/// # Safety
/// `env` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn qrl_env_observation_len(env: *const QrlEnv, out_len: *mut usize) -> QrlStatus {
    guard(|| {
        *out_arg(out_len, "out_len")? = handle(env, "env")?.env.observation_len();
        Ok(())
    })
}

/// Number of steps in one episode.
///
/// # Safety
/// `env` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn qrl_env_episode_len(env: *const QrlEnv, out_len: *mut usize) -> QrlStatus {
    guard(|| {
        *out_arg(out_len, "out_len")? = handle(env, "env")?.env.episode_len();
        Ok(())
    })
}

/// Starts an episode and writes the first observation.
///
/// # Safety
/// `obs` must hold `cap` values.
#[no_mangle]
pub unsafe extern "C" fn qrl_env_reset(
    env: *mut QrlEnv,
    seed: u64,
    obs: *mut f64,
    cap: usize,
    written: *mut usize,
) -> QrlStatus {
    guard(|| {
        let env = handle_mut(env, "env")?;
        let o = env.env.reset(seed)?.flatten();
        copy_out(&o, obs, cap, written)
    })
}

/// Applies `action` (0 = sell/short, 1 = buy/long) and writes the next observation,
/// the reward and whether the episode ended.
///
/// # Safety
/// `obs` must hold `cap` values; `reward` and `done` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qrl_env_step(
    env: *mut QrlEnv,
    action: u32,
    obs: *mut f64,
    cap: usize,
    reward: *mut f64,
    done: *mut bool,
) -> QrlStatus {
    guard(|| {
        let env = handle_mut(env, "env")?;
        let reward = out_arg(reward, "reward")?;
        let done = out_arg(done, "done")?;
        let action = Action::from_index(action as usize)?;
        let step = env.env.step(action)?;
        copy_out(&step.observation.flatten(), obs, cap, ptr::null_mut())?;
        *reward = step.reward;
        *done = step.done;
        Ok(())
    })
}

/// Current equity of the running episode.
///
/// # Safety
/// `env` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn qrl_env_equity(env: *const QrlEnv, out: *mut f64) -> QrlStatus {
    guard(|| {
        let env = handle(env, "env")?;
        *out_arg(out, "out")? = env.env.equity().ok_or(EnvError::NotReset)?;
        Ok(())
    })
}

/// # Safety
/// `env` must come from this library or be null; it must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qrl_env_free(env: *mut QrlEnv) {
    if !env.is_null() {
        drop(Box::from_raw(env));
    }
}

/// Loads a policy file written by `quantrl train`.
///
/// # Safety
/// `path` must be NUL-terminated and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn qrl_policy_load(path: *const c_char, out: *mut *mut QrlPolicy) -> QrlStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let net = agents::load_policy(str_arg(path, "path")?)?;
        *out = Box::into_raw(Box::new(QrlPolicy { net }));
        Ok(())
    })
}

/// Saves a policy in the same format.
///
/// # Safety
/// `policy` must be live and `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn qrl_policy_save(policy: *const QrlPolicy, path: *const c_char) -> QrlStatus {
    guard(|| {
        let p = handle(policy, "policy")?;
        agents::save_policy(&p.net, str_arg(path, "path")?)?;
        Ok(())
    })
}

/// Input and output widths of the network.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qrl_policy_dims(policy: *const QrlPolicy, input: *mut usize, output: *mut usize) -> QrlStatus {
    guard(|| {
        let p = handle(policy, "policy")?;
        *out_arg(input, "input")? = p.net.input_dim();
        *out_arg(output, "output")? = p.net.output_dim();
        Ok(())
    })
}

/// Network outputs for one observation.
///
/// # Safety
/// `obs` must hold `n` values and `out` `cap` values.
#[no_mangle]
pub unsafe extern "C" fn qrl_policy_forward(
    policy: *const QrlPolicy,
    obs: *const f64,
    n: usize,
    out: *mut f64,
    cap: usize,
) -> QrlStatus {
    guard(|| {
        let p = handle(policy, "policy")?;
        let y = p.net.forward(slice_arg(obs, n, "obs")?)?;
        copy_out(&y, out, cap, ptr::null_mut())
    })
}

/// Greedy action (ties go to 0) for one observation.
///
/// # Safety
/// `obs` must hold `n` values.
#[no_mangle]
pub unsafe extern "C" fn qrl_policy_act(policy: *const QrlPolicy, obs: *const f64, n: usize, action: *mut u32) -> QrlStatus {
    guard(|| {
        let p = handle(policy, "policy")?;
        let y = p.net.forward(slice_arg(obs, n, "obs")?)?;
        *out_arg(action, "action")? = argmax(&y) as u32;
        Ok(())
    })
}

/// # Safety
/// `policy` must come from this library or be null; it must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qrl_policy_free(policy: *mut QrlPolicy) {
    if !policy.is_null() {
        drop(Box::from_raw(policy));
    }
}

/// Annualized Sharpe ratio of per-period returns (population σ; 0 when σ is 0).
///
/// # Safety
/// `returns` must hold `n` values.
#[no_mangle]
pub unsafe extern "C" fn qrl_sharpe(returns: *const f64, n: usize, rf: f64, periods_per_year: f64, out: *mut f64) -> QrlStatus {
    guard(|| {
        *out_arg(out, "out")? = backtest::sharpe(slice_arg(returns, n, "returns")?, rf, periods_per_year)?;
        Ok(())
    })
}

/// Annualized Sortino ratio of per-period returns.
///
/// # Safety
/// `returns` must hold `n` values.
#[no_mangle]
pub unsafe extern "C" fn qrl_sortino(returns: *const f64, n: usize, rf: f64, periods_per_year: f64, out: *mut f64) -> QrlStatus {
    guard(|| {
        *out_arg(out, "out")? = backtest::sortino(slice_arg(returns, n, "returns")?, rf, periods_per_year)?;
        Ok(())
    })
}

/// Maximum drawdown of an equity curve, as a fraction.
///
/// # Safety
/// `curve` must hold `n` values.
#[no_mangle]
pub unsafe extern "C" fn qrl_max_drawdown(curve: *const f64, n: usize, out: *mut f64) -> QrlStatus {
    guard(|| {
        let curve = slice_arg(curve, n, "curve")?;
        if curve.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(Failure::new(QrlStatus::InvalidArgument, "curve must be positive and finite"));
        }
        *out_arg(out, "out")? = backtest::max_drawdown(curve);
        Ok(())
    })
}

/// Geometric annualized return in percent.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qrl_annualize(total_return: f64, n_periods: usize, periods_per_year: f64, out: *mut f64) -> QrlStatus {
    guard(|| {
        *out_arg(out, "out")? = backtest::annualize(total_return, n_periods, periods_per_year)?;
        Ok(())
    })
}

/// Writes the full report for an equity curve as a JSON object into `buf` (NUL-terminated,
/// capacity `cap` bytes). `needed` receives the required size including the NUL. Trades
/// are not available from a bare curve, so `n_trades` is 0.
///
/// # Safety
/// `curve` must hold `n` values and `buf` `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn qrl_report_json(
    curve: *const f64,
    n: usize,
    rf: f64,
    periods_per_year: f64,
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
) -> QrlStatus {
    guard(|| {
        let values = slice_arg(curve, n, "curve")?.to_vec();
        let curve = backtest::EquityCurve { initial_cash: values.first().copied().unwrap_or(0.0), values };
        let report = backtest::compute_report(&curve, &[], rf, periods_per_year)?;
        let json = serde_json::to_string(&report)
            .map_err(|e| Failure::new(QrlStatus::Runtime, e.to_string()))?;
        let bytes = json.as_bytes();
        if let Some(nd) = needed.as_mut() {
            *nd = bytes.len() + 1;
        }
        if cap < bytes.len() + 1 {
            return Err(Failure::new(QrlStatus::BufferTooSmall, format!("need {} bytes", bytes.len() + 1)));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, bytes.len());
        *buf.add(bytes.len()) = 0;
        Ok(())
    })
}
