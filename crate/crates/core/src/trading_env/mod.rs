//! Always-in-market long/short trading environment.
//!
//! The agent holds exactly one of two positions at all times. A step whose action differs from
//! the held side executes a trade at the current bar's close, charging a proportional
//! commission. The cursor then advances one bar and equity compounds by the bar's return in
//! the direction held: `p_i / p_{i-1}` long, `p_{i-1} / p_i` short.

mod ledger;
mod rewards;
mod vec_env;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::indicators::FeatureMatrix;
use crate::market_data::OhlcvSeries;
use crate::normalize::{FamilyOverrides, FeatureScaler, NormalizationKind, NormalizeError};

pub use ledger::{EpisodeLedger, LedgerRecord};
pub use rewards::{reward_immediate, reward_on_flip, reward_terminal};
pub use vec_env::{VecEnv, VecEnvError};

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("series too short: warm-up {warmup} + window {window} needs more than {len} - 1 bars")]
    SeriesTooShort {
        warmup: usize,
        window: usize,
        len: usize,
    },
    #[error("step called after the episode finished")]
    SteppedAfterDone,
    #[error("step called before reset")]
    NotReset,
    #[error("price must be positive, got {0}")]
    NonPositivePrice(f64),
    #[error("equity must be positive, got {0}")]
    NonPositiveEquity(f64),
    #[error("invalid env config: {0}")]
    InvalidConfig(String),
    #[error("feature matrix has {features} rows but series has {series}")]
    LengthMismatch { features: usize, series: usize },
    #[error("invalid action index {0}")]
    InvalidAction(usize),
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
    #[error("ledger csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("ledger csv line {line}: {reason}")]
    BadLedger { line: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, EnvError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Sell = 0,
    Buy = 1,
}

impl Action {
    pub const COUNT: usize = 2;

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Result<Self> {
        match i {
            0 => Ok(Action::Sell),
            1 => Ok(Action::Buy),
            other => Err(EnvError::InvalidAction(other)),
        }
    }

    /// The side this action leaves the agent on.
    pub fn target(self) -> Position {
        match self {
            Action::Sell => Position::Short,
            Action::Buy => Position::Long,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Action::Sell => "sell",
            Action::Buy => "buy",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Position {
    Short,
    Long,
}

impl Position {
    /// +1 long, −1 short.
    pub fn sign(self) -> f64 {
        match self {
            Position::Long => 1.0,
            Position::Short => -1.0,
        }
    }

    pub fn flag(self) -> f64 {
        match self {
            Position::Long => 1.0,
            Position::Short => 0.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Position::Short => "short",
            Position::Long => "long",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardKind {
    /// Signed per-bar log return of the held side.
    #[default]
    ImmediateLogReturn,
    /// Log return since the previous flip, paid only when the position flips.
    FlipLogReturn,
    /// `ln(final / initial equity)` on the last step, 0 elsewhere.
    TerminalEquity,
}

fn default_window() -> usize {
    10
}
fn default_flag() -> bool {
    true
}
fn default_cash() -> f64 {
    10_000.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvConfig {
    #[serde(default = "default_window")]
    pub window_size: usize,
    /// Fraction of equity charged on every position flip.
    #[serde(default)]
    pub commission: f64,
    #[serde(default)]
    pub reward_kind: RewardKind,
    #[serde(default = "default_flag")]
    pub include_position_flag: bool,
    #[serde(default = "default_cash")]
    pub initial_cash: f64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            window_size: default_window(),
            commission: 0.0,
            reward_kind: RewardKind::default(),
            include_position_flag: true,
            initial_cash: default_cash(),
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window_size == 0 {
            return Err(EnvError::InvalidConfig("window_size must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.commission) {
            return Err(EnvError::InvalidConfig("commission must be in [0, 1)".into()));
        }
        if !(self.initial_cash > 0.0 && self.initial_cash.is_finite()) {
            return Err(EnvError::InvalidConfig("initial_cash must be positive".into()));
        }
        Ok(())
    }
}

/// A `window × K` block of normalized features plus the optional position flag.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationWindow {
    pub rows: usize,
    pub cols: usize,
    /// Row-major `s_ij`: row `i` is the time offset, column `j` the feature.
    pub values: Vec<f64>,
    /// 0 = short, 1 = long.
    pub position_flag: Option<f64>,
}

impl ObservationWindow {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    pub fn len(&self) -> usize {
        self.values.len() + usize::from(self.position_flag.is_some())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Network input: the window followed by the flag.
    pub fn flatten(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.len());
        v.extend_from_slice(&self.values);
        v.extend(self.position_flag);
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    pub equity: f64,
    pub position: Position,
    pub last_trade_price: f64,
    pub trade_executed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: ObservationWindow,
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

#[derive(Debug, Clone)]
struct EpisodeState {
    cursor: usize,
    position: Position,
    equity: f64,
    last_trade_price: f64,
    done: bool,
    ledger: EpisodeLedger,
}

/// One environment instance; single-owner mutable state.
#[derive(Debug, Clone)]
pub struct TradingEnv {
    series: Arc<OhlcvSeries>,
    closes: Arc<Vec<f64>>,
    features: Arc<FeatureMatrix>,
    scaler: Arc<FeatureScaler>,
    config: EnvConfig,
    state: Option<EpisodeState>,
    seed: u64,
}

impl TradingEnv {
    /// Builds an env whose scaler is fitted on the whole defined region of `features`.
    pub fn new(
        series: Arc<OhlcvSeries>,
        features: Arc<FeatureMatrix>,
        config: EnvConfig,
        normalization: NormalizationKind,
        overrides: &FamilyOverrides,
    ) -> Result<Self> {
        let scaler =
            FeatureScaler::fit(&features, normalization, overrides, 0..features.n_rows())?;
        Self::with_scaler(series, features, Arc::new(scaler), config)
    }

    /// Builds an env around an already fitted (frozen) scaler.
    pub fn with_scaler(
        series: Arc<OhlcvSeries>,
        features: Arc<FeatureMatrix>,
        scaler: Arc<FeatureScaler>,
        config: EnvConfig,
    ) -> Result<Self> {
        config.validate()?;
        if features.n_rows() != series.len() {
            return Err(EnvError::LengthMismatch {
                features: features.n_rows(),
                series: series.len(),
            });
        }
        scaler.check_matrix(&features)?;
        if features.warmup() + config.window_size > series.len() - 1 {
            return Err(EnvError::SeriesTooShort {
                warmup: features.warmup(),
                window: config.window_size,
                len: series.len(),
            });
        }
        let closes = Arc::new(series.closes());
        Ok(Self {
            series,
            closes,
            features,
            scaler,
            config,
            state: None,
            seed: 0,
        })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn series(&self) -> &OhlcvSeries {
        &self.series
    }

    pub fn features(&self) -> &FeatureMatrix {
        &self.features
    }

    pub fn scaler(&self) -> &FeatureScaler {
        &self.scaler
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Bar index of the first observation.
    pub fn start_index(&self) -> usize {
        self.features.warmup() + self.config.window_size - 1
    }

    /// Number of steps in one episode.
    pub fn episode_len(&self) -> usize {
        self.series.len() - 1 - self.start_index()
    }

    /// Flattened observation length.
    pub fn observation_len(&self) -> usize {
        self.config.window_size * self.features.n_cols()
            + usize::from(self.config.include_position_flag)
    }

    pub fn cursor(&self) -> Option<usize> {
        self.state.as_ref().map(|s| s.cursor)
    }

    pub fn position(&self) -> Option<Position> {
        self.state.as_ref().map(|s| s.position)
    }

    pub fn equity(&self) -> Option<f64> {
        self.state.as_ref().map(|s| s.equity)
    }

    pub fn is_done(&self) -> bool {
        self.state.as_ref().is_some_and(|s| s.done)
    }

    pub fn ledger(&self) -> Option<&EpisodeLedger> {
        self.state.as_ref().map(|s| &s.ledger)
    }

    /// Starts an episode at the first fully defined window, short, with the initial cash.
    /// Episodes are deterministic; the seed is recorded for bookkeeping.
    pub fn reset(&mut self, seed: u64) -> Result<ObservationWindow> {
        self.seed = seed;
        let cursor = self.start_index();
        let price = self.closes[cursor];
        self.state = Some(EpisodeState {
            cursor,
            position: Position::Short,
            equity: self.config.initial_cash,
            last_trade_price: price,
            done: false,
            ledger: EpisodeLedger::new(cursor, price, self.config.initial_cash),
        });
        self.observe(cursor, Position::Short)
    }

    fn observe(&self, cursor: usize, position: Position) -> Result<ObservationWindow> {
        let values =
            self.scaler
                .transform_window(&self.features, cursor, self.config.window_size)?;
        Ok(ObservationWindow {
            rows: self.config.window_size,
            cols: self.features.n_cols(),
            values,
            position_flag: self.config.include_position_flag.then(|| position.flag()),
        })
    }

    pub fn step(&mut self, action: Action) -> Result<StepResult> {
        let commission = self.config.commission;
        let kind = self.config.reward_kind;
        let last = self.series.len() - 1;
        let state = self.state.as_mut().ok_or(EnvError::NotReset)?;
        if state.done {
            return Err(EnvError::SteppedAfterDone);
        }
        let t = state.cursor;
        let p_now = self.closes[t];
        let target = action.target();
        let flipped = target != state.position;
        let mut realized = 0.0;
        if flipped {
            realized = reward_on_flip(true, state.position, state.last_trade_price, p_now)?;
            state.equity *= 1.0 - commission;
            state.position = target;
            state.last_trade_price = p_now;
        }
        let cost = if flipped { (1.0 - commission).ln() } else { 0.0 };

        state.cursor = t + 1;
        let p_next = self.closes[t + 1];
        state.equity *= match state.position {
            Position::Long => p_next / p_now,
            Position::Short => p_now / p_next,
        };
        state.done = state.cursor == last;

        let reward = match kind {
            RewardKind::ImmediateLogReturn => {
                reward_immediate(state.position, p_now, p_next)? + cost
            }
            RewardKind::FlipLogReturn => {
                if flipped {
                    realized + cost
                } else {
                    0.0
                }
            }
            RewardKind::TerminalEquity => {
                reward_terminal(state.done, self.config.initial_cash, state.equity)?
            }
        };
        let info = StepInfo {
            equity: state.equity,
            position: state.position,
            last_trade_price: state.last_trade_price,
            trade_executed: flipped,
        };
        state.ledger.records.push(LedgerRecord {
            step: t + 1,
            action,
            position: state.position,
            price: p_next,
            reward,
            equity: state.equity,
            trade_executed: flipped,
        });
        let done = state.done;
        let position = state.position;
        let observation = self.observe(t + 1, position)?;
        Ok(StepResult {
            observation,
            reward,
            done,
            info,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indicators::{compute_feature_matrix, IndicatorSpec};
    use crate::synthetic;

    fn env_on(closes: &[f64], config: EnvConfig) -> TradingEnv {
        let s = Arc::new(synthetic::bars_from_closes(closes, 1.0));
        let f = Arc::new(compute_feature_matrix(&s, &[IndicatorSpec::Sma { period: 1 }]).unwrap());
        TradingEnv::new(s, f, config, NormalizationKind::MinMax, &FamilyOverrides::new()).unwrap()
    }

    fn cfg(window: usize, commission: f64, kind: RewardKind) -> EnvConfig {
        EnvConfig {
            window_size: window,
            commission,
            reward_kind: kind,
            ..EnvConfig::default()
        }
    }

    #[test]
    fn minimal_window_observation() {
        let mut env = env_on(&[100.0, 101.0], cfg(1, 0.0, RewardKind::ImmediateLogReturn));
        let obs = env.reset(0).unwrap();
        assert_eq!(obs.rows, 1);
        assert_eq!(obs.values, vec![0.0]);
        assert_eq!(obs.position_flag, Some(0.0));
        assert_eq!(obs.flatten(), vec![0.0, 0.0]);
        assert_eq!(env.equity(), Some(10_000.0));
        assert_eq!(env.position(), Some(Position::Short));
    }

    #[test]
    fn long_step_reward_and_done() {
        let mut env = env_on(&[100.0, 101.0], cfg(1, 0.0, RewardKind::ImmediateLogReturn));
        env.reset(0).unwrap();
        let r = env.step(Action::Buy).unwrap();
        assert!((r.reward - 1.01f64.ln()).abs() < 1e-15);
        assert!((r.reward - 0.00995).abs() < 1e-5);
        assert!(r.done);
        assert!(r.info.trade_executed);
        assert_eq!(r.info.last_trade_price, 100.0);
        assert!(matches!(env.step(Action::Buy), Err(EnvError::SteppedAfterDone)));
    }

    #[test]
    fn flat_price_flip_costs_commission() {
        let mut env = env_on(&[100.0, 100.0, 100.0], cfg(1, 0.001, RewardKind::ImmediateLogReturn));
        env.reset(0).unwrap();
        let r = env.step(Action::Sell).unwrap();
        assert_eq!(r.reward, 0.0);
        assert_eq!(r.info.equity, 10_000.0);
        let r = env.step(Action::Buy).unwrap();
        assert!((r.info.equity - 9_990.0).abs() < 1e-9);
    }

    #[test]
    fn too_short_series_rejected() {
        let s = Arc::new(synthetic::bars_from_closes(&[1.0, 2.0, 3.0, 4.0], 1.0));
        let f = Arc::new(compute_feature_matrix(&s, &[IndicatorSpec::Sma { period: 3 }]).unwrap());
        let e = TradingEnv::new(s, f, cfg(2, 0.0, RewardKind::ImmediateLogReturn), NormalizationKind::MinMax, &FamilyOverrides::new());
        assert!(matches!(e, Err(EnvError::SeriesTooShort { .. })));
    }

    #[test]
    fn flip_and_terminal_rewards() {
        let mut env = env_on(&[100.0, 110.0, 121.0, 110.0], cfg(1, 0.0, RewardKind::FlipLogReturn));
        env.reset(0).unwrap();
        assert_eq!(env.step(Action::Buy).unwrap().reward, 0.0); // closes the initial short at entry
        assert_eq!(env.step(Action::Buy).unwrap().reward, 0.0);
        let r = env.step(Action::Sell).unwrap();
        assert!((r.reward - 1.21f64.ln()).abs() < 1e-12);

        let mut env = env_on(&[100.0, 110.0, 121.0], cfg(1, 0.0, RewardKind::TerminalEquity));
        env.reset(0).unwrap();
        assert_eq!(env.step(Action::Buy).unwrap().reward, 0.0);
        let r = env.step(Action::Buy).unwrap();
        assert!((r.reward - 1.21f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn reset_cursor_is_warmup_plus_window() {
        let s = Arc::new(synthetic::two_year_daily(4));
        let f = Arc::new(compute_feature_matrix(&s, &crate::indicators::default_specs()).unwrap());
        let mut env = TradingEnv::new(s, f, EnvConfig::default(), NormalizationKind::MinMax, &FamilyOverrides::new()).unwrap();
        env.reset(1).unwrap();
        assert_eq!(env.cursor(), Some(87 + 9));
        assert_eq!(env.observation_len(), 201);
        assert_eq!(env.episode_len(), 505 - 1 - 96);
    }
}
