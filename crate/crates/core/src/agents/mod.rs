//! Small MLP function approximators and the DQN, A2C and PPO training loops.

pub mod a2c;
pub mod dqn;
pub mod explore;
mod hyperparams;
pub mod log;
pub mod loss;
pub mod mlp;
pub mod optim;
pub mod policy_io;
pub mod ppo;
pub mod replay;
mod rollout;

use thiserror::Error;

use crate::trading_env::{Action, EnvError, TradingEnv};

pub use a2c::a2c_train;
pub use dqn::{dqn_train, Dqn};
pub use explore::{argmax, epsilon_greedy, LinearSchedule};
pub use hyperparams::{Algorithm, Hyperparams, OptimizerKind};
pub use log::{LogRecord, TrainingLog};
pub use mlp::{ForwardCache, Gradients, Layer, Mlp};
pub use optim::Optimizer;
pub use policy_io::{load_policy, policy_from_bytes, policy_to_bytes, save_policy};
pub use ppo::ppo_train;
pub use replay::{ReplayBatch, ReplayBuffer, Transition};
pub use rollout::{gae, Rollout};

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("replay buffer holds {size} transitions, batch needs {batch}")]
    BufferTooSmall { size: usize, batch: usize },
    #[error("invalid hyperparameter `{key}`: {reason}")]
    InvalidHyperparams { key: &'static str, reason: String },
    #[error("corrupt policy file: {0}")]
    CorruptFile(String),
    #[error("training diverged: non-finite {0}")]
    NonFinite(&'static str),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, AgentError>;

/// A trained actor-critic pair: the actor emits action logits, the critic a state value.
#[derive(Debug, Clone)]
pub struct ActorCritic {
    pub actor: Mlp,
    pub critic: Mlp,
}

/// Output of any of the three training loops. `value` is present for A2C and PPO.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub policy: Mlp,
    pub value: Option<Mlp>,
    pub log: TrainingLog,
}

pub fn train<F>(algorithm: Algorithm, make_env: F, hp: &Hyperparams, seed: u64) -> Result<TrainOutcome>
where
    F: FnMut() -> std::result::Result<TradingEnv, EnvError>,
{
    match algorithm {
        Algorithm::Dqn => {
            let (policy, log) = dqn_train(make_env, hp, seed)?;
            Ok(TrainOutcome { policy, value: None, log })
        }
        Algorithm::A2c => {
            let (ac, log) = a2c_train(make_env, hp, seed)?;
            Ok(TrainOutcome { policy: ac.actor, value: Some(ac.critic), log })
        }
        Algorithm::Ppo => {
            let (ac, log) = ppo_train(make_env, hp, seed)?;
            Ok(TrainOutcome { policy: ac.actor, value: Some(ac.critic), log })
        }
    }
}

/// Argmax action of `policy` for a flattened observation.
pub fn greedy_action(policy: &Mlp, obs: &[f64]) -> Result<Action> {
    let out = policy.forward(obs)?;
    Ok(Action::from_index(argmax(&out))?)
}

/// Sum of rewards from one greedy episode.
pub fn evaluate_greedy(policy: &Mlp, env: &mut TradingEnv, seed: u64) -> Result<f64> {
    let mut obs = env.reset(seed)?.flatten();
    let mut total = 0.0;
    loop {
        let step = env.step(greedy_action(policy, &obs)?)?;
        total += step.reward;
        if step.done {
            return Ok(total);
        }
        obs = step.observation.flatten();
    }
}

fn network_sizes(input: usize, hidden: &[usize], output: usize) -> Vec<usize> {
    std::iter::once(input)
        .chain(hidden.iter().copied())
        .chain(std::iter::once(output))
        .collect()
}
