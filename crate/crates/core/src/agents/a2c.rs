use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::loss::{actor_loss, critic_loss};
use super::rollout::{sample_action, Driver};
use super::{
    gae, network_sizes, ActorCritic, AgentError, Algorithm, Gradients, Hyperparams, Mlp,
    Optimizer, Result, Rollout, TrainingLog,
};
use crate::trading_env::{Action, EnvError, TradingEnv};

pub(crate) fn new_actor_critic<R: Rng + ?Sized>(obs_dim: usize, hp: &Hyperparams, rng: &mut R) -> ActorCritic {
    // small policy-head init keeps the starting policy close to uniform
    let actor = Mlp::new(&network_sizes(obs_dim, &hp.hidden_sizes, Action::COUNT), 0.01, rng);
    let critic = Mlp::new(&network_sizes(obs_dim, &hp.hidden_sizes, 1), 1.0, rng);
    ActorCritic { actor, critic }
}

/// Runs `n` env steps with actions sampled from the actor.
pub(crate) fn collect<R: Rng + ?Sized>(
    driver: &mut Driver,
    ac: &ActorCritic,
    n: usize,
    rng: &mut R,
) -> Result<Rollout> {
    let mut ro = Rollout { state_dim: driver.obs_dim(), ..Rollout::default() };
    for _ in 0..n {
        let logits = ac.actor.forward(&driver.obs)?;
        let (a, logp) = sample_action(&logits, rng);
        ro.states.extend_from_slice(&driver.obs);
        let s = driver.step(Action::from_index(a)?, None, &ac.actor)?;
        ro.actions.push(a);
        ro.log_probs.push(logp);
        ro.rewards.push(s.reward);
        ro.dones.push(s.done);
    }
    // `obs` already points past any terminal step; done flags cut the bootstrap there
    ro.last_value = ac.critic.forward(&driver.obs)?[0];
    Ok(ro)
}

/// Advantages and value targets for a rollout under the current critic.
pub fn rollout_targets(critic: &Mlp, ro: &Rollout, gamma: f64, lambda: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let values = critic.forward_batch(&ro.states, ro.len())?;
    Ok(gae(&ro.rewards, values.output(), &ro.dones, ro.last_value, gamma, lambda))
}

/// Actor loss `mean(−log π·A − c_H·H)` and critic loss `mean((V − R)²)` for one rollout,
/// where A and R come from n-step returns under the current critic.
pub fn a2c_losses(ac: &ActorCritic, ro: &Rollout, hp: &Hyperparams) -> Result<(f64, f64)> {
    let (adv, ret) = rollout_targets(&ac.critic, ro, hp.gamma, hp.gae_lambda_for(Algorithm::A2c))?;
    let logits = ac.actor.forward_batch(&ro.states, ro.len())?;
    let (la, _) = actor_loss(logits.output(), Action::COUNT, &ro.actions, &adv, hp.entropy_coef);
    let values = ac.critic.forward_batch(&ro.states, ro.len())?;
    let (lc, _) = critic_loss(values.output(), &ret);
    Ok((la, lc))
}

fn a2c_update(
    ac: &mut ActorCritic,
    opt_actor: &mut Optimizer,
    opt_critic: &mut Optimizer,
    ro: &Rollout,
    hp: &Hyperparams,
) -> Result<f64> {
    let n = ro.len();
    let (adv, ret) = rollout_targets(&ac.critic, ro, hp.gamma, hp.gae_lambda_for(Algorithm::A2c))?;

    let cache = ac.actor.forward_batch(&ro.states, n)?;
    let (la, g_out) = actor_loss(cache.output(), Action::COUNT, &ro.actions, &adv, hp.entropy_coef);
    let mut g = Gradients::zeros_like(&ac.actor);
    ac.actor.backward(&cache, &g_out, &mut g);

    let vcache = ac.critic.forward_batch(&ro.states, n)?;
    let (lc, mut gv_out) = critic_loss(vcache.output(), &ret);
    gv_out.iter_mut().for_each(|x| *x *= hp.value_coef);
    let mut gv = Gradients::zeros_like(&ac.critic);
    ac.critic.backward(&vcache, &gv_out, &mut gv);

    let total = la + hp.value_coef * lc;
    if !total.is_finite() {
        return Err(AgentError::NonFinite("A2C loss"));
    }
    opt_actor.step(&mut ac.actor, &mut g);
    opt_critic.step(&mut ac.critic, &mut gv);
    Ok(total)
}

/// Synchronous advantage actor-critic: one update per `n_steps` rollout.
pub fn a2c_train<F>(mut make_env: F, hp: &Hyperparams, seed: u64) -> Result<(ActorCritic, TrainingLog)>
where
    F: FnMut() -> std::result::Result<TradingEnv, EnvError>,
{
    hp.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut driver = Driver::new(make_env()?, make_env()?, seed)?;
    let mut ac = new_actor_critic(driver.obs_dim(), hp, &mut rng);
    let mut opt_actor = Optimizer::new(hp.optimizer, hp.learning_rate, hp.max_grad_norm);
    let mut opt_critic = Optimizer::new(hp.optimizer, hp.learning_rate, hp.max_grad_norm);
    let n_steps = hp.n_steps_for(Algorithm::A2c);
    while driver.timestep < hp.total_timesteps {
        let n = n_steps.min(hp.total_timesteps - driver.timestep);
        let ro = collect(&mut driver, &ac, n, &mut rng)?;
        let loss = a2c_update(&mut ac, &mut opt_actor, &mut opt_critic, &ro, hp)?;
        driver.losses.add(loss);
    }
    log::info!("a2c finished {} steps over {} episodes", driver.timestep, driver.episodes);
    Ok((ac, driver.log))
}
