use rand::Rng;

use super::log::{LogRecord, LossMeter, TrainingLog};
use super::loss::log_softmax;
use super::{evaluate_greedy, Mlp, Result};
use crate::trading_env::{Action, TradingEnv};

/// On-policy experience for one actor-critic update.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Rollout {
    pub state_dim: usize,
    /// Row-major `len × state_dim`.
    pub states: Vec<f64>,
    pub actions: Vec<usize>,
    pub rewards: Vec<f64>,
    pub dones: Vec<bool>,
    pub log_probs: Vec<f64>,
    /// Value of the state following the last step (ignored if that step ended an episode).
    pub last_value: f64,
}

impl Rollout {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

/// Generalized advantage estimates and the matching value targets (`A + V`).
pub fn gae(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    last_value: f64,
    gamma: f64,
    lambda: f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = rewards.len();
    assert!(values.len() == n && dones.len() == n);
    let mut adv = vec![0.0; n];
    let mut next_adv = 0.0;
    for k in (0..n).rev() {
        let live = if dones[k] { 0.0 } else { 1.0 };
        let next_v = if k + 1 < n { values[k + 1] } else { last_value };
        let delta = rewards[k] + gamma * live * next_v - values[k];
        next_adv = delta + gamma * lambda * live * next_adv;
        adv[k] = next_adv;
    }
    let returns = adv.iter().zip(values).map(|(a, v)| a + v).collect();
    (adv, returns)
}

/// Samples an action index from softmax(logits); returns it with its log-probability.
pub(crate) fn sample_action<R: Rng + ?Sized>(logits: &[f64], rng: &mut R) -> (usize, f64) {
    let logp = log_softmax(logits);
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, lp) in logp.iter().enumerate() {
        acc += lp.exp();
        if u < acc {
            return (i, *lp);
        }
    }
    let last = logp.len() - 1;
    (last, logp[last])
}

/// Drives one training env across episode boundaries and logs finished episodes.
pub(crate) struct Driver {
    env: TradingEnv,
    eval_env: TradingEnv,
    seed: u64,
    pub obs: Vec<f64>,
    ep_return: f64,
    pub episodes: usize,
    pub timestep: usize,
    pub log: TrainingLog,
    pub losses: LossMeter,
}

pub(crate) struct Step {
    pub next_obs: Vec<f64>,
    pub reward: f64,
    pub done: bool,
}

impl Driver {
    pub fn new(mut env: TradingEnv, eval_env: TradingEnv, seed: u64) -> Result<Self> {
        let obs = env.reset(seed)?.flatten();
        Ok(Self {
            env,
            eval_env,
            seed,
            obs,
            ep_return: 0.0,
            episodes: 0,
            timestep: 0,
            log: TrainingLog::default(),
            losses: LossMeter::default(),
        })
    }

    pub fn obs_dim(&self) -> usize {
        self.obs.len()
    }

    /// Steps the env. On episode end `obs` moves to the next episode's first observation,
    /// while the returned `next_obs` is the terminal one. `epsilon` and `policy` feed the
    /// log record written at episode end.
    pub fn step(&mut self, action: Action, epsilon: Option<f64>, policy: &Mlp) -> Result<Step> {
        let r = self.env.step(action)?;
        self.timestep += 1;
        self.ep_return += r.reward;
        let next_obs = r.observation.flatten();
        if r.done {
            self.episodes += 1;
            let eval_return = evaluate_greedy(policy, &mut self.eval_env, self.seed)?;
            self.log.push(LogRecord {
                timestep: self.timestep,
                episode: self.episodes,
                episode_return: self.ep_return,
                loss: self.losses.take(),
                epsilon,
                eval_return,
            });
            self.ep_return = 0.0;
            self.obs = self
                .env
                .reset(self.seed.wrapping_add(self.episodes as u64))?
                .flatten();
        } else {
            self.obs.clone_from(&next_obs);
        }
        Ok(Step { next_obs, reward: r.reward, done: r.done })
    }
}
