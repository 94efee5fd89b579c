use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::explore::{epsilon_greedy, LinearSchedule};
use super::loss::{td_loss, td_target};
use super::rollout::Driver;
use super::{
    network_sizes, AgentError, Gradients, Hyperparams, Mlp, Optimizer, ReplayBuffer, Result,
    TrainingLog, Transition,
};
use crate::trading_env::{Action, EnvError, TradingEnv};

/// Q-learning state: online and target networks, replay memory and the step counter.
#[derive(Debug, Clone)]
pub struct Dqn {
    pub online: Mlp,
    pub target: Mlp,
    pub buffer: ReplayBuffer,
    optimizer: Optimizer,
    schedule: LinearSchedule,
    hp: Hyperparams,
    rng: ChaCha8Rng,
    t: usize,
}

impl Dqn {
    pub fn new(obs_dim: usize, hp: &Hyperparams, seed: u64) -> Result<Self> {
        hp.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let online = Mlp::new(&network_sizes(obs_dim, &hp.hidden_sizes, Action::COUNT), 1.0, &mut rng);
        Ok(Self {
            target: online.clone(),
            online,
            buffer: ReplayBuffer::new(hp.buffer_size, obs_dim),
            optimizer: Optimizer::new(hp.optimizer, hp.learning_rate, hp.max_grad_norm),
            schedule: LinearSchedule {
                initial: hp.exploration_initial_eps,
                final_value: hp.exploration_final_eps,
                fraction: hp.exploration_fraction,
                total: hp.total_timesteps,
            },
            hp: hp.clone(),
            rng,
            t: 0,
        })
    }

    /// Env steps observed so far.
    pub fn timestep(&self) -> usize {
        self.t
    }

    pub fn epsilon(&self) -> f64 {
        self.schedule.value(self.t)
    }

    pub fn act(&mut self, obs: &[f64]) -> Result<Action> {
        let q = self.online.forward(obs)?;
        let eps = self.epsilon();
        Ok(epsilon_greedy(&q, eps, &mut self.rng))
    }

    /// Stores a transition and advances the clock by one env step. Runs one gradient step
    /// once the buffer holds `learning_starts` transitions, then syncs the target network
    /// when the step count reaches a multiple of `target_update_interval`.
    pub fn observe(&mut self, transition: Transition) -> Result<Option<f64>> {
        self.buffer.push(transition)?;
        self.t += 1;
        let loss = if self.buffer.len() >= self.hp.learning_starts() {
            Some(self.train_step()?)
        } else {
            None
        };
        if self.t % self.hp.target_update_interval == 0 {
            self.target.copy_from(&self.online);
        }
        Ok(loss)
    }

    fn train_step(&mut self) -> Result<f64> {
        let batch = self.buffer.sample(self.hp.batch_size, &mut self.rng)?;
        let n = batch.len();
        let n_actions = Action::COUNT;
        let next = self.target.forward_batch(&batch.next_states, n)?;
        let targets: Vec<f64> = (0..n)
            .map(|b| {
                let row = &next.output()[b * n_actions..(b + 1) * n_actions];
                let max_next = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                td_target(batch.rewards[b], batch.dones[b], self.hp.gamma, max_next)
            })
            .collect();
        let cache = self.online.forward_batch(&batch.states, n)?;
        let (loss, grad_out) = td_loss(cache.output(), n_actions, &batch.actions, &targets);
        if !loss.is_finite() {
            return Err(AgentError::NonFinite("TD loss"));
        }
        let mut grads = Gradients::zeros_like(&self.online);
        self.online.backward(&cache, &grad_out, &mut grads);
        self.optimizer.step(&mut self.online, &mut grads);
        Ok(loss)
    }
}

/// Trains a Q-network for `total_timesteps` env steps, looping over episodes. The factory
/// is called twice: once for the training env and once for the greedy evaluation env.
pub fn dqn_train<F>(mut make_env: F, hp: &Hyperparams, seed: u64) -> Result<(Mlp, TrainingLog)>
where
    F: FnMut() -> std::result::Result<TradingEnv, EnvError>,
{
    hp.validate()?;
    let mut driver = Driver::new(make_env()?, make_env()?, seed)?;
    let mut agent = Dqn::new(driver.obs_dim(), hp, seed)?;
    for _ in 0..hp.total_timesteps {
        let state = driver.obs.clone();
        let action = agent.act(&state)?;
        let eps = agent.schedule.value(agent.t + 1);
        let s = driver.step(action, Some(eps), &agent.online)?;
        let loss = agent.observe(Transition {
            state,
            action: action.index(),
            reward: s.reward,
            next_state: s.next_obs,
            done: s.done,
        })?;
        if let Some(loss) = loss {
            driver.losses.add(loss);
        }
    }
    log::info!("dqn finished {} steps over {} episodes", driver.timestep, driver.episodes);
    Ok((agent.online, driver.log))
}
