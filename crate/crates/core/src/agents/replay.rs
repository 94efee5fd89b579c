use rand::Rng;

use super::{AgentError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub done: bool,
}

/// A sampled minibatch; states are row-major `len × state_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayBatch {
    pub states: Vec<f64>,
    pub actions: Vec<usize>,
    pub rewards: Vec<f64>,
    pub next_states: Vec<f64>,
    pub dones: Vec<bool>,
    /// Slot each row came from.
    pub indices: Vec<usize>,
}

impl ReplayBatch {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

/// Fixed-capacity ring of transitions; the oldest is overwritten first.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    state_dim: usize,
    states: Vec<f64>,
    next_states: Vec<f64>,
    actions: Vec<usize>,
    rewards: Vec<f64>,
    dones: Vec<bool>,
    inserted: u64,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, state_dim: usize) -> Self {
        assert!(capacity > 0, "capacity must be positive");
        Self {
            capacity,
            state_dim,
            states: Vec::new(),
            next_states: Vec::new(),
            actions: Vec::new(),
            rewards: Vec::new(),
            dones: Vec::new(),
            inserted: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    /// Total transitions ever pushed.
    pub fn inserted(&self) -> u64 {
        self.inserted
    }

    pub fn push(&mut self, t: Transition) -> Result<()> {
        if t.state.len() != self.state_dim || t.next_state.len() != self.state_dim {
            return Err(AgentError::ShapeMismatch(format!(
                "transition states have {} and {} values, buffer expects {}",
                t.state.len(),
                t.next_state.len(),
                self.state_dim
            )));
        }
        let d = self.state_dim;
        if self.len() < self.capacity {
            self.states.extend_from_slice(&t.state);
            self.next_states.extend_from_slice(&t.next_state);
            self.actions.push(t.action);
            self.rewards.push(t.reward);
            self.dones.push(t.done);
        } else {
            let slot = (self.inserted % self.capacity as u64) as usize;
            self.states[slot * d..(slot + 1) * d].copy_from_slice(&t.state);
            self.next_states[slot * d..(slot + 1) * d].copy_from_slice(&t.next_state);
            self.actions[slot] = t.action;
            self.rewards[slot] = t.reward;
            self.dones[slot] = t.done;
        }
        self.inserted += 1;
        Ok(())
    }

    pub fn get(&self, slot: usize) -> Option<Transition> {
        if slot >= self.len() {
            return None;
        }
        let d = self.state_dim;
        Some(Transition {
            state: self.states[slot * d..(slot + 1) * d].to_vec(),
            action: self.actions[slot],
            reward: self.rewards[slot],
            next_state: self.next_states[slot * d..(slot + 1) * d].to_vec(),
            done: self.dones[slot],
        })
    }

    /// Uniform sample with replacement.
    pub fn sample<R: Rng + ?Sized>(&self, batch: usize, rng: &mut R) -> Result<ReplayBatch> {
        if batch == 0 || self.len() < batch {
            return Err(AgentError::BufferTooSmall { size: self.len(), batch });
        }
        let d = self.state_dim;
        let mut out = ReplayBatch {
            states: Vec::with_capacity(batch * d),
            actions: Vec::with_capacity(batch),
            rewards: Vec::with_capacity(batch),
            next_states: Vec::with_capacity(batch * d),
            dones: Vec::with_capacity(batch),
            indices: Vec::with_capacity(batch),
        };
        for _ in 0..batch {
            let i = rng.gen_range(0..self.len());
            out.states.extend_from_slice(&self.states[i * d..(i + 1) * d]);
            out.next_states.extend_from_slice(&self.next_states[i * d..(i + 1) * d]);
            out.actions.push(self.actions[i]);
            out.rewards.push(self.rewards[i]);
            out.dones.push(self.dones[i]);
            out.indices.push(i);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tr(v: f64) -> Transition {
        Transition { state: vec![v], action: 0, reward: v, next_state: vec![v + 1.0], done: false }
    }

    #[test]
    fn evicts_oldest() {
        let mut b = ReplayBuffer::new(2, 1);
        for v in [1.0, 2.0, 3.0] {
            b.push(tr(v)).unwrap();
        }
        assert_eq!(b.len(), 2);
        let rewards: Vec<f64> = (0..2).map(|i| b.get(i).unwrap().reward).collect();
        assert!(!rewards.contains(&1.0));
        assert!(rewards.contains(&2.0) && rewards.contains(&3.0));
        assert_eq!(b.inserted(), 3);
    }

    #[test]
    fn too_small_and_shape() {
        let mut b = ReplayBuffer::new(10, 1);
        b.push(tr(1.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(b.sample(2, &mut rng), Err(AgentError::BufferTooSmall { size: 1, batch: 2 })));
        let bad = Transition { state: vec![1.0, 2.0], ..tr(0.0) };
        assert!(matches!(b.push(bad), Err(AgentError::ShapeMismatch(_))));
    }

    #[test]
    fn sampling_is_uniform() {
        let mut b = ReplayBuffer::new(10, 1);
        for v in 0..10 {
            b.push(tr(v as f64)).unwrap();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut counts = [0usize; 10];
        for _ in 0..10_000 {
            for i in b.sample(10, &mut rng).unwrap().indices {
                counts[i] += 1;
            }
        }
        for c in counts {
            let rel = (c as f64 - 10_000.0).abs() / 10_000.0;
            assert!(rel <= 0.05, "slot count {c}");
        }
    }
}
