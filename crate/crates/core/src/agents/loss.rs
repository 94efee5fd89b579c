//! Scalar losses over a batch of network outputs. Each returns the loss and its gradient
//! with respect to the outputs, laid out like the outputs (`batch × width`, row-major).

/// Bootstrap target `r + γ·max_next`, cut off at episode end.
pub fn td_target(reward: f64, done: bool, gamma: f64, max_next: f64) -> f64 {
    if done {
        reward
    } else {
        reward + gamma * max_next
    }
}

/// Mean squared TD error of the taken actions' values against fixed targets.
pub fn td_loss(q: &[f64], n_actions: usize, actions: &[usize], targets: &[f64]) -> (f64, Vec<f64>) {
    let batch = actions.len();
    assert_eq!(q.len(), batch * n_actions);
    assert_eq!(targets.len(), batch);
    let mut grad = vec![0.0; q.len()];
    let mut loss = 0.0;
    let n = batch as f64;
    for b in 0..batch {
        let k = b * n_actions + actions[b];
        let err = q[k] - targets[b];
        loss += err * err;
        grad[k] = 2.0 * err / n;
    }
    (loss / n, grad)
}

/// Mean squared error of value predictions (one output per row).
pub fn critic_loss(values: &[f64], returns: &[f64]) -> (f64, Vec<f64>) {
    assert_eq!(values.len(), returns.len());
    let n = values.len() as f64;
    let mut loss = 0.0;
    let grad = values
        .iter()
        .zip(returns)
        .map(|(v, r)| {
            let e = v - r;
            loss += e * e;
            2.0 * e / n
        })
        .collect();
    (loss / n, grad)
}

/// Numerically stable log-softmax of one row.
pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + logits.iter().map(|z| (z - m).exp()).sum::<f64>().ln();
    logits.iter().map(|z| z - lse).collect()
}

/// Entropy of the softmax distribution of one row.
pub fn entropy(logits: &[f64]) -> f64 {
    log_softmax(logits).iter().map(|lp| -lp.exp() * lp).sum()
}

/// Adds `coef · dH/dz` for one row into `grad` and returns H.
fn entropy_grad(logp: &[f64], coef: f64, grad: &mut [f64]) -> f64 {
    let h: f64 = logp.iter().map(|lp| -lp.exp() * lp).sum();
    for (g, lp) in grad.iter_mut().zip(logp) {
        // dH/dz_k = −π_k (log π_k + H)
        *g += coef * (-lp.exp() * (lp + h));
    }
    h
}

/// `mean(−log π(a|s)·A − entropy_coef·H)`.
pub fn actor_loss(
    logits: &[f64],
    n_actions: usize,
    actions: &[usize],
    advantages: &[f64],
    entropy_coef: f64,
) -> (f64, Vec<f64>) {
    let batch = actions.len();
    assert_eq!(logits.len(), batch * n_actions);
    assert_eq!(advantages.len(), batch);
    let n = batch as f64;
    let mut grad = vec![0.0; logits.len()];
    let mut loss = 0.0;
    for b in 0..batch {
        let row = &logits[b * n_actions..(b + 1) * n_actions];
        let g = &mut grad[b * n_actions..(b + 1) * n_actions];
        let logp = log_softmax(row);
        let a = actions[b];
        let adv = advantages[b];
        loss -= logp[a] * adv;
        if adv != 0.0 {
            for (k, gk) in g.iter_mut().enumerate() {
                let onehot = if k == a { 1.0 } else { 0.0 };
                *gk += adv * (logp[k].exp() - onehot) / n;
            }
        }
        if entropy_coef != 0.0 {
            let h = entropy_grad(&logp, -entropy_coef / n, g);
            loss -= entropy_coef * h;
        }
    }
    (loss / n, grad)
}

/// Per-sample clipped surrogate `min(ρA, clip(ρ, 1−ε, 1+ε)A)`.
pub fn ppo_surrogate(ratio: f64, advantage: f64, clip: f64) -> f64 {
    let clipped = ratio.clamp(1.0 - clip, 1.0 + clip);
    (ratio * advantage).min(clipped * advantage)
}

/// `−mean(surrogate) − entropy_coef·mean(H)`, with ρ = exp(log π(a|s) − old_log_prob).
pub fn ppo_loss(
    logits: &[f64],
    n_actions: usize,
    actions: &[usize],
    old_log_probs: &[f64],
    advantages: &[f64],
    clip: f64,
    entropy_coef: f64,
) -> (f64, Vec<f64>) {
    let batch = actions.len();
    assert_eq!(logits.len(), batch * n_actions);
    assert_eq!(old_log_probs.len(), batch);
    assert_eq!(advantages.len(), batch);
    let n = batch as f64;
    let mut grad = vec![0.0; logits.len()];
    let mut loss = 0.0;
    for b in 0..batch {
        let row = &logits[b * n_actions..(b + 1) * n_actions];
        let g = &mut grad[b * n_actions..(b + 1) * n_actions];
        let logp = log_softmax(row);
        let a = actions[b];
        let adv = advantages[b];
        let ratio = (logp[a] - old_log_probs[b]).exp();
        let surr = ppo_surrogate(ratio, adv, clip);
        loss -= surr;
        // the unclipped branch is active when it is the minimum; otherwise the clipped
        // term is constant in the parameters
        let unclipped_active = ratio * adv <= ratio.clamp(1.0 - clip, 1.0 + clip) * adv;
        if unclipped_active && adv != 0.0 {
            for (k, gk) in g.iter_mut().enumerate() {
                let onehot = if k == a { 1.0 } else { 0.0 };
                *gk -= adv * ratio * (onehot - logp[k].exp()) / n;
            }
        }
        if entropy_coef != 0.0 {
            let h = entropy_grad(&logp, -entropy_coef / n, g);
            loss -= entropy_coef * h;
        }
    }
    (loss / n, grad)
}
