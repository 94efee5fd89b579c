pub mod agents;
pub mod backtest;
pub mod indicators;
pub mod market_data;
pub mod normalize;
pub mod runner;
pub mod synthetic;
pub mod trading_env;
