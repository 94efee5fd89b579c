//! Central finite differences over every network parameter.

use quantrl::agents::loss::{actor_loss, critic_loss, log_softmax, ppo_loss, td_loss};
use quantrl::agents::{Gradients, Mlp};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const H: f64 = 1e-5;
pub const FLOOR: f64 = 1e-6;

/// Largest `|analytic − numeric| / max(|analytic|, |numeric|, FLOOR)` over all parameters.
pub fn max_rel_error<F>(net: &Mlp, xs: &[f64], batch: usize, loss: F) -> f64
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let cache = net.forward_batch(xs, batch).unwrap();
    let (_, g_out) = loss(cache.output());
    let mut g = Gradients::zeros_like(net);
    net.backward(&cache, &g_out, &mut g);

    let eval = |n: &Mlp| loss(n.forward_batch(xs, batch).unwrap().output()).0;
    let mut probe = net.clone();
    let mut worst: f64 = 0.0;
    for i in 0..net.n_params() {
        let p = net.param(i);
        probe.set_param(i, p + H);
        let up = eval(&probe);
        probe.set_param(i, p - H);
        let down = eval(&probe);
        probe.set_param(i, p);
        let numeric = (up - down) / (2.0 * H);
        let analytic = g.flat(i);
        let denom = analytic.abs().max(numeric.abs()).max(FLOOR);
        worst = worst.max((analytic - numeric).abs() / denom);
    }
    worst
}

pub struct Case {
    pub net: Mlp,
    pub xs: Vec<f64>,
    pub batch: usize,
    pub rng: ChaCha8Rng,
}

/// A random small tanh network, a random input batch and a generator for loss inputs.
pub fn random_case(seed: u64, outputs: usize) -> Case {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inputs = rng.gen_range(2..6);
    let mut sizes = vec![inputs];
    for _ in 0..rng.gen_range(1..3) {
        sizes.push(rng.gen_range(2..7));
    }
    sizes.push(outputs);
    let net = Mlp::new(&sizes, 1.0, &mut rng);
    let batch = rng.gen_range(2..7);
    let xs = (0..batch * inputs).map(|_| rng.gen_range(-1.5..1.5)).collect();
    Case { net, xs, batch, rng }
}

pub fn td_case(seed: u64) -> f64 {
    let mut c = random_case(seed, 2);
    let actions: Vec<usize> = (0..c.batch).map(|_| c.rng.gen_range(0..2)).collect();
    let targets: Vec<f64> = (0..c.batch).map(|_| c.rng.gen_range(-2.0..2.0)).collect();
    max_rel_error(&c.net, &c.xs, c.batch, |q| td_loss(q, 2, &actions, &targets))
}

pub fn critic_case(seed: u64) -> f64 {
    let mut c = random_case(seed, 1);
    let returns: Vec<f64> = (0..c.batch).map(|_| c.rng.gen_range(-2.0..2.0)).collect();
    max_rel_error(&c.net, &c.xs, c.batch, |v| critic_loss(v, &returns))
}

pub fn actor_case(seed: u64) -> f64 {
    let mut c = random_case(seed, 2);
    let actions: Vec<usize> = (0..c.batch).map(|_| c.rng.gen_range(0..2)).collect();
    let adv: Vec<f64> = (0..c.batch).map(|_| c.rng.gen_range(-2.0..2.0)).collect();
    let ent = c.rng.gen_range(0.0..0.1);
    max_rel_error(&c.net, &c.xs, c.batch, |z| actor_loss(z, 2, &actions, &adv, ent))
}

/// Old log-probabilities are drawn so every ratio stays clear of the clip kinks.
pub fn ppo_case(seed: u64) -> f64 {
    let mut c = random_case(seed, 2);
    let clip = 0.2;
    let logits = c.net.forward_batch(&c.xs, c.batch).unwrap().output().to_vec();
    let actions: Vec<usize> = (0..c.batch).map(|_| c.rng.gen_range(0..2)).collect();
    let adv: Vec<f64> = (0..c.batch).map(|_| c.rng.gen_range(-2.0..2.0)).collect();
    let old: Vec<f64> = (0..c.batch)
        .map(|b| {
            let lp = log_softmax(&logits[b * 2..b * 2 + 2])[actions[b]];
            loop {
                let shift: f64 = c.rng.gen_range(-0.5..0.5);
                let ratio = (-shift).exp();
                if (ratio - (1.0 - clip)).abs() > 1e-2 && (ratio - (1.0 + clip)).abs() > 1e-2 {
                    return lp + shift;
                }
            }
        })
        .collect();
    let ent = 0.01;
    max_rel_error(&c.net, &c.xs, c.batch, |z| ppo_loss(z, 2, &actions, &old, &adv, clip, ent))
}
