mod common;

use std::sync::Arc;

use common::gradcheck;
use proptest::prelude::*;
use quantrl::agents::a2c::a2c_losses;
use quantrl::agents::loss::{ppo_loss, ppo_surrogate};
use quantrl::agents::{
    gae, policy_from_bytes, policy_to_bytes, train, ActorCritic, Algorithm, Hyperparams, Layer, Mlp,
    OptimizerKind, Rollout,
};
use quantrl::indicators::{compute_feature_matrix, IndicatorSpec};
use quantrl::normalize::NormalizationKind;
use quantrl::synthetic;
use quantrl::trading_env::{EnvConfig, EnvError, TradingEnv};
use rand::SeedableRng;

const TOL: f64 = 1e-4;

#[test]
fn td_gradients_match_finite_differences() {
    for seed in 0..20 {
        let e = gradcheck::td_case(seed);
        assert!(e <= TOL, "seed {seed}: {e}");
    }
}

#[test]
fn critic_gradients_match_finite_differences() {
    for seed in 100..120 {
        let e = gradcheck::critic_case(seed);
        assert!(e <= TOL, "seed {seed}: {e}");
    }
}

#[test]
fn actor_gradients_match_finite_differences() {
    for seed in 200..220 {
        let e = gradcheck::actor_case(seed);
        assert!(e <= TOL, "seed {seed}: {e}");
    }
}

#[test]
fn ppo_gradients_match_finite_differences() {
    for seed in 300..320 {
        let e = gradcheck::ppo_case(seed);
        assert!(e <= TOL, "seed {seed}: {e}");
    }
}

fn linear(weights: Vec<f64>, bias: Vec<f64>) -> Mlp {
    let outputs = bias.len();
    let inputs = weights.len() / outputs;
    Mlp::from_layers(vec![Layer { inputs, outputs, weights, bias }]).unwrap()
}

#[test]
fn a2c_losses_on_a_hand_rollout() {
    // π = (1/4, 3/4) everywhere, V(s) = s[0]
    let ac = ActorCritic {
        actor: linear(vec![0.0; 4], vec![0.0, 3f64.ln()]),
        critic: linear(vec![1.0, 0.0], vec![0.0]),
    };
    let ro = Rollout {
        state_dim: 2,
        states: vec![1.0, 0.0, 2.0, 0.0, 0.5, 0.0],
        actions: vec![1, 0, 1],
        rewards: vec![1.0, -1.0, 2.0],
        dones: vec![false, false, true],
        log_probs: vec![0.0; 3],
        last_value: 10.0,
    };
    let hp = Hyperparams { gamma: 0.9, ..Hyperparams::default() };
    let (la, lc) = a2c_losses(&ac, &ro, &hp).unwrap();
    // returns 1.72, 0.8, 2; advantages 0.72, -1.2, 1.5
    let expect_a = (-(0.75f64).ln() * 0.72 - (0.25f64).ln() * -1.2 - (0.75f64).ln() * 1.5) / 3.0;
    let expect_c = (0.72f64 * 0.72 + 1.2 * 1.2 + 1.5 * 1.5) / 3.0;
    assert!((la - expect_a).abs() < 1e-12, "{la} vs {expect_a}");
    assert!((lc - expect_c).abs() < 1e-12, "{lc} vs {expect_c}");

    // bootstrapping from the last value when the rollout is cut mid-episode
    let ro = Rollout { dones: vec![false, true, false], ..ro };
    let (la, lc) = a2c_losses(&ac, &ro, &hp).unwrap();
    // returns 1 + 0.9·(−1) = 0.1, −1, 2 + 0.9·10 = 11; advantages −0.9, −3, 10.5
    let expect_a = (-(0.75f64).ln() * -0.9 - (0.25f64).ln() * -3.0 - (0.75f64).ln() * 10.5) / 3.0;
    let expect_c = (0.81 + 9.0 + 110.25) / 3.0;
    assert!((la - expect_a).abs() < 1e-12);
    assert!((lc - expect_c).abs() < 1e-12);

    let hp = Hyperparams { gamma: 0.9, entropy_coef: 0.5, ..Hyperparams::default() };
    let (la_h, _) = a2c_losses(&ac, &ro, &hp).unwrap();
    let h = -(0.25f64 * 0.25f64.ln() + 0.75 * 0.75f64.ln());
    assert!((la_h - (expect_a - 0.5 * h)).abs() < 1e-12);
}

#[test]
fn gae_reduces_to_discounted_returns_and_td_errors() {
    let r = [1.0, 0.5, -2.0, 3.0];
    let v = [0.2, -0.4, 1.0, 0.7];
    let d = [false, false, false, false];
    let (adv, ret) = gae(&r, &v, &d, 1.5, 0.95, 1.0);
    let mut g = 1.5;
    for k in (0..4).rev() {
        g = r[k] + 0.95 * g;
        assert!((ret[k] - g).abs() < 1e-12);
        assert!((adv[k] - (g - v[k])).abs() < 1e-12);
    }
    let (adv, _) = gae(&r, &v, &d, 1.5, 0.95, 0.0);
    for k in 0..4 {
        let next = if k == 3 { 1.5 } else { v[k + 1] };
        assert!((adv[k] - (r[k] + 0.95 * next - v[k])).abs() < 1e-12);
    }
}

#[test]
fn ppo_clipping_freezes_gradients_outside_the_trust_region() {
    assert_eq!(ppo_surrogate(1.5, 2.0, 0.2), 1.2 * 2.0);
    assert_eq!(ppo_surrogate(0.5, 2.0, 0.2), 0.5 * 2.0);
    assert_eq!(ppo_surrogate(0.5, -2.0, 0.2), 0.8 * -2.0);
    assert_eq!(ppo_surrogate(1.5, -2.0, 0.2), 1.5 * -2.0);
    assert_eq!(ppo_surrogate(1.1, 3.0, 0.2), 1.1 * 3.0);

    let logits = [0.0, 0.0];
    let lp = 0.5f64.ln();
    // ρ = 2 with positive advantage: clipped, no gradient
    let (l, g) = ppo_loss(&logits, 2, &[0], &[lp - 2f64.ln()], &[1.0], 0.2, 0.0);
    assert!((l + 1.2).abs() < 1e-12);
    assert!(g.iter().all(|&x| x == 0.0));
    // ρ = 2 with negative advantage: unclipped branch is the minimum, gradient flows
    let (_, g) = ppo_loss(&logits, 2, &[0], &[lp - 2f64.ln()], &[-1.0], 0.2, 0.0);
    assert!(g.iter().any(|&x| x != 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn surrogate_is_pessimistic(ratio in 0.0f64..3.0, adv in -5.0f64..5.0, clip in 0.05f64..0.5) {
        let s = ppo_surrogate(ratio, adv, clip);
        prop_assert!(s <= ratio * adv + 1e-12);
        let lo = (1.0 - clip) * adv;
        let hi = (1.0 + clip) * adv;
        prop_assert!(s <= lo.max(hi) + 1e-12);
    }

    #[test]
    fn policy_bytes_round_trip(seed in any::<u64>(), hidden in 1usize..8, inputs in 1usize..6) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let net = Mlp::new(&[inputs, hidden, 2], 1.0, &mut rng);
        let bytes = policy_to_bytes(&net);
        prop_assert_eq!(policy_from_bytes(&bytes).unwrap(), net);
        prop_assert!(policy_from_bytes(&bytes[..bytes.len() - 1]).is_err());
    }
}

fn tiny_env() -> impl FnMut() -> Result<TradingEnv, EnvError> {
    let series = Arc::new(synthetic::random_walk(60, 4));
    let fm = Arc::new(compute_feature_matrix(&series, &[IndicatorSpec::Sma { period: 1 }]).unwrap());
    let cfg = EnvConfig { window_size: 3, ..EnvConfig::default() };
    move || TradingEnv::new(series.clone(), fm.clone(), cfg.clone(), NormalizationKind::WindowLog, &Default::default())
}

fn small_hp() -> Hyperparams {
    Hyperparams {
        total_timesteps: 600,
        batch_size: 16,
        buffer_size: 500,
        target_update_interval: 50,
        hidden_sizes: vec![8],
        n_steps: Some(20),
        n_epochs: 2,
        optimizer: OptimizerKind::Adam,
        learning_rate: 1e-3,
        ..Hyperparams::default()
    }
}

#[test]
fn training_is_deterministic_per_seed() {
    for alg in [Algorithm::Dqn, Algorithm::A2c, Algorithm::Ppo] {
        let a = train(alg, tiny_env(), &small_hp(), 3).unwrap();
        let b = train(alg, tiny_env(), &small_hp(), 3).unwrap();
        let c = train(alg, tiny_env(), &small_hp(), 4).unwrap();
        assert_eq!(a.log, b.log, "{alg:?}");
        assert_eq!(a.policy, b.policy, "{alg:?}");
        assert_ne!(a.policy, c.policy, "{alg:?}");
        assert!(!a.log.records.is_empty());
        assert!(a.log.records.windows(2).all(|w| w[0].timestep < w[1].timestep));
        assert_eq!(a.value.is_some(), alg != Algorithm::Dqn);
    }
}

#[test]
fn dqn_log_tracks_exploration_and_loss() {
    let out = train(Algorithm::Dqn, tiny_env(), &small_hp(), 0).unwrap();
    let recs = &out.log.records;
    assert!(recs.iter().all(|r| r.epsilon.is_some()));
    assert!(recs.windows(2).all(|w| w[0].epsilon >= w[1].epsilon));
    assert!(recs.last().unwrap().loss.is_some());
    let mut csv = Vec::new();
    out.log.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("timestep,episode,episode_return,loss,epsilon,eval_return\n"));
    assert_eq!(text.lines().count(), recs.len() + 1);
}

#[test]
fn invalid_hyperparams_are_rejected() {
    let hp = Hyperparams { batch_size: 0, ..small_hp() };
    assert!(train(Algorithm::Dqn, tiny_env(), &hp, 0).is_err());
    let hp = Hyperparams { gamma: 1.5, ..small_hp() };
    assert!(hp.validate().is_err());
}

#[test]
fn gradient_check_detects_a_wrong_gradient() {
    use quantrl::agents::loss::critic_loss;
    let c = gradcheck::random_case(7, 1);
    let returns = vec![0.3; c.batch];
    let good = gradcheck::max_rel_error(&c.net, &c.xs, c.batch, |v| critic_loss(v, &returns));
    let bad = gradcheck::max_rel_error(&c.net, &c.xs, c.batch, |v| {
        let (l, g) = critic_loss(v, &returns);
        (l, g.iter().map(|x| x * 1.01).collect())
    });
    assert!(good < 1e-6, "{good}");
    assert!(bad > 5e-3, "{bad}");
}
