use rand::Rng;

use crate::trading_env::Action;

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// With probability `eps` a uniformly random action, otherwise the greedy one.
pub fn epsilon_greedy<R: Rng + ?Sized>(values: &[f64], eps: f64, rng: &mut R) -> Action {
    debug_assert!((0.0..=1.0).contains(&eps));
    let idx = if eps > 0.0 && rng.gen::<f64>() < eps {
        rng.gen_range(0..Action::COUNT)
    } else {
        argmax(values)
    };
    Action::from_index(idx).expect("action index in range")
}

/// Linear interpolation from `initial` to `final_value` over the first `fraction · total`
/// steps, constant afterwards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearSchedule {
    pub initial: f64,
    pub final_value: f64,
    pub fraction: f64,
    pub total: usize,
}

impl LinearSchedule {
    pub fn value(&self, t: usize) -> f64 {
        let horizon = self.fraction * self.total as f64;
        if horizon <= 0.0 || t as f64 >= horizon {
            return self.final_value;
        }
        self.initial + (self.final_value - self.initial) * (t as f64 / horizon)
    }
}
