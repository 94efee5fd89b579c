use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::a2c::{collect, new_actor_critic, rollout_targets};
use super::loss::{critic_loss, ppo_loss};
use super::rollout::Driver;
use super::{ActorCritic, AgentError, Algorithm, Gradients, Hyperparams, Optimizer, Result, Rollout, TrainingLog};
use crate::trading_env::{Action, EnvError, TradingEnv};

fn gather(src: &[f64], width: usize, idx: &[usize]) -> Vec<f64> {
    let mut out = Vec::with_capacity(idx.len() * width);
    for &i in idx {
        out.extend_from_slice(&src[i * width..(i + 1) * width]);
    }
    out
}

fn ppo_update<R: rand::Rng + ?Sized>(
    ac: &mut ActorCritic,
    opt_actor: &mut Optimizer,
    opt_critic: &mut Optimizer,
    ro: &Rollout,
    hp: &Hyperparams,
    rng: &mut R,
) -> Result<f64> {
    let n = ro.len();
    let (adv, ret) = rollout_targets(&ac.critic, ro, hp.gamma, hp.gae_lambda_for(Algorithm::Ppo))?;
    let mb = hp.batch_size.min(n);
    let mut order: Vec<usize> = (0..n).collect();
    let mut last = 0.0;
    for _ in 0..hp.n_epochs {
        order.shuffle(rng);
        for chunk in order.chunks(mb) {
            let states = gather(&ro.states, ro.state_dim, chunk);
            let actions: Vec<usize> = chunk.iter().map(|&i| ro.actions[i]).collect();
            let old: Vec<f64> = chunk.iter().map(|&i| ro.log_probs[i]).collect();
            let a: Vec<f64> = chunk.iter().map(|&i| adv[i]).collect();
            let r: Vec<f64> = chunk.iter().map(|&i| ret[i]).collect();
            let k = chunk.len();

            let cache = ac.actor.forward_batch(&states, k)?;
            let (lp, g_out) = ppo_loss(cache.output(), Action::COUNT, &actions, &old, &a, hp.clip_range, hp.entropy_coef);
            let mut g = Gradients::zeros_like(&ac.actor);
            ac.actor.backward(&cache, &g_out, &mut g);

            let vcache = ac.critic.forward_batch(&states, k)?;
            let (lc, mut gv_out) = critic_loss(vcache.output(), &r);
            gv_out.iter_mut().for_each(|x| *x *= hp.value_coef);
            let mut gv = Gradients::zeros_like(&ac.critic);
            ac.critic.backward(&vcache, &gv_out, &mut gv);

            last = lp + hp.value_coef * lc;
            if !last.is_finite() {
                return Err(AgentError::NonFinite("PPO loss"));
            }
            opt_actor.step(&mut ac.actor, &mut g);
            opt_critic.step(&mut ac.critic, &mut gv);
        }
    }
    Ok(last)
}

/// Proximal policy optimization: `n_steps` rollouts, GAE advantages, `n_epochs` passes of
/// clipped-surrogate minibatch updates per rollout.
pub fn ppo_train<F>(mut make_env: F, hp: &Hyperparams, seed: u64) -> Result<(ActorCritic, TrainingLog)>
where
    F: FnMut() -> std::result::Result<TradingEnv, EnvError>,
{
    hp.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut driver = Driver::new(make_env()?, make_env()?, seed)?;
    let mut ac = new_actor_critic(driver.obs_dim(), hp, &mut rng);
    let mut opt_actor = Optimizer::new(hp.optimizer, hp.learning_rate, hp.max_grad_norm);
    let mut opt_critic = Optimizer::new(hp.optimizer, hp.learning_rate, hp.max_grad_norm);
    let n_steps = hp.n_steps_for(Algorithm::Ppo);
    while driver.timestep < hp.total_timesteps {
        let n = n_steps.min(hp.total_timesteps - driver.timestep);
        let ro = collect(&mut driver, &ac, n, &mut rng)?;
        let loss = ppo_update(&mut ac, &mut opt_actor, &mut opt_critic, &ro, hp, &mut rng)?;
        driver.losses.add(loss);
    }
    log::info!("ppo finished {} steps over {} episodes", driver.timestep, driver.episodes);
    Ok((ac, driver.log))
}
