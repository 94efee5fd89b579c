use thiserror::Error;

use super::{Action, EnvError, ObservationWindow, StepResult, TradingEnv};

#[derive(Debug, Error)]
#[error("env {index}: {source}")]
pub struct VecEnvError {
    pub index: usize,
    #[source]
    pub source: EnvError,
}

/// Runs several environments one after another, in list order, on the calling thread.
#[derive(Debug, Clone)]
pub struct VecEnv {
    envs: Vec<TradingEnv>,
}

impl VecEnv {
    pub fn new(envs: Vec<TradingEnv>) -> Self {
        Self { envs }
    }

    pub fn len(&self) -> usize {
        self.envs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.envs.is_empty()
    }

    pub fn envs(&self) -> &[TradingEnv] {
        &self.envs
    }

    pub fn into_inner(self) -> Vec<TradingEnv> {
        self.envs
    }

    /// Resets env `i` with `seeds[i]`.
    pub fn reset(&mut self, seeds: &[u64]) -> Result<Vec<ObservationWindow>, VecEnvError> {
        self.check_len(seeds.len())?;
        self.envs
            .iter_mut()
            .zip(seeds)
            .enumerate()
            .map(|(index, (env, &seed))| {
                env.reset(seed).map_err(|source| VecEnvError { index, source })
            })
            .collect()
    }

    pub fn step(&mut self, actions: &[Action]) -> Result<Vec<StepResult>, VecEnvError> {
        self.check_len(actions.len())?;
        self.envs
            .iter_mut()
            .zip(actions)
            .enumerate()
            .map(|(index, (env, &a))| env.step(a).map_err(|source| VecEnvError { index, source }))
            .collect()
    }

    fn check_len(&self, n: usize) -> Result<(), VecEnvError> {
        if n != self.envs.len() {
            return Err(VecEnvError {
                index: n.min(self.envs.len()),
                source: EnvError::InvalidConfig(format!(
                    "expected {} entries, got {n}",
                    self.envs.len()
                )),
            });
        }
        Ok(())
    }
}
