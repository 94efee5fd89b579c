use serde::{Deserialize, Serialize};

use super::{AgentError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Algorithm {
    #[default]
    #[serde(rename = "DQN", alias = "dqn")]
    Dqn,
    #[serde(rename = "A2C", alias = "a2c")]
    A2c,
    #[serde(rename = "PPO", alias = "ppo")]
    Ppo,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Dqn => "DQN",
            Algorithm::A2c => "A2C",
            Algorithm::Ppo => "PPO",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    #[default]
    Sgd,
    Adam,
}

/// Training settings shared by all three algorithms. Fields that only apply to one
/// algorithm are ignored by the others.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparams {
    pub learning_rate: f64,
    pub buffer_size: usize,
    pub batch_size: usize,
    pub gamma: f64,
    pub target_update_interval: usize,
    pub total_timesteps: usize,
    pub exploration_initial_eps: f64,
    pub exploration_final_eps: f64,
    pub exploration_fraction: f64,
    /// Transitions stored before DQN updates begin; `None` means `batch_size`.
    pub learning_starts: Option<usize>,
    /// Rollout length; `None` means 5 for A2C and 2048 for PPO.
    pub n_steps: Option<usize>,
    pub n_epochs: usize,
    pub clip_range: f64,
    /// `None` means 1.0 for A2C (plain n-step returns) and 0.95 for PPO.
    pub gae_lambda: Option<f64>,
    pub entropy_coef: f64,
    pub value_coef: f64,
    /// Global gradient-norm clip; 0 disables it.
    pub max_grad_norm: f64,
    pub optimizer: OptimizerKind,
    pub hidden_sizes: Vec<usize>,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            learning_rate: 1e-4,
            buffer_size: 100_000,
            batch_size: 128,
            gamma: 0.99,
            target_update_interval: 1000,
            total_timesteps: 1_000_000,
            exploration_initial_eps: 1.0,
            exploration_final_eps: 0.05,
            exploration_fraction: 0.1,
            learning_starts: None,
            n_steps: None,
            n_epochs: 10,
            clip_range: 0.2,
            gae_lambda: None,
            entropy_coef: 0.0,
            value_coef: 0.5,
            max_grad_norm: 10.0,
            optimizer: OptimizerKind::Sgd,
            hidden_sizes: vec![64, 64],
        }
    }
}

fn invalid(key: &'static str, reason: impl Into<String>) -> AgentError {
    AgentError::InvalidHyperparams {
        key,
        reason: reason.into(),
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(invalid("learning_rate", "must be positive"));
        }
        if self.buffer_size == 0 {
            return Err(invalid("buffer_size", "must be positive"));
        }
        if self.batch_size == 0 {
            return Err(invalid("batch_size", "must be positive"));
        }
        if self.batch_size > self.buffer_size {
            return Err(invalid("batch_size", "must not exceed buffer_size"));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(invalid("gamma", "must lie in [0, 1]"));
        }
        if self.target_update_interval == 0 {
            return Err(invalid("target_update_interval", "must be positive"));
        }
        if self.total_timesteps == 0 {
            return Err(invalid("total_timesteps", "must be positive"));
        }
        for (key, v) in [
            ("exploration_initial_eps", self.exploration_initial_eps),
            ("exploration_final_eps", self.exploration_final_eps),
            ("exploration_fraction", self.exploration_fraction),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(invalid(key, "must lie in [0, 1]"));
            }
        }
        if self.n_steps == Some(0) {
            return Err(invalid("n_steps", "must be positive"));
        }
        if self.n_epochs == 0 {
            return Err(invalid("n_epochs", "must be positive"));
        }
        if !(self.clip_range > 0.0 && self.clip_range.is_finite()) {
            return Err(invalid("clip_range", "must be positive"));
        }
        if let Some(l) = self.gae_lambda {
            if !(0.0..=1.0).contains(&l) {
                return Err(invalid("gae_lambda", "must lie in [0, 1]"));
            }
        }
        if !(self.entropy_coef >= 0.0 && self.entropy_coef.is_finite()) {
            return Err(invalid("entropy_coef", "must be non-negative"));
        }
        if !(self.value_coef >= 0.0 && self.value_coef.is_finite()) {
            return Err(invalid("value_coef", "must be non-negative"));
        }
        if !(self.max_grad_norm >= 0.0) {
            return Err(invalid("max_grad_norm", "must be non-negative"));
        }
        if self.hidden_sizes.contains(&0) {
            return Err(invalid("hidden_sizes", "layer widths must be positive"));
        }
        Ok(())
    }

    pub fn learning_starts(&self) -> usize {
        self.learning_starts.unwrap_or(self.batch_size).max(self.batch_size)
    }

    pub fn n_steps_for(&self, algorithm: super::Algorithm) -> usize {
        self.n_steps.unwrap_or(match algorithm {
            super::Algorithm::Ppo => 2048,
            _ => 5,
        })
    }

    pub fn gae_lambda_for(&self, algorithm: super::Algorithm) -> f64 {
        self.gae_lambda.unwrap_or(match algorithm {
            super::Algorithm::Ppo => 0.95,
            _ => 1.0,
        })
    }
}
