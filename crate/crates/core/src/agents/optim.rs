use super::{Gradients, Mlp, OptimizerKind};

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// Gradient-descent step rule with optional global-norm clipping.
#[derive(Debug, Clone)]
pub struct Optimizer {
    kind: OptimizerKind,
    lr: f64,
    max_grad_norm: f64,
    m: Option<Gradients>,
    v: Option<Gradients>,
    t: u64,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, lr: f64, max_grad_norm: f64) -> Self {
        Self { kind, lr, max_grad_norm, m: None, v: None, t: 0 }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    /// Applies one descent step; `grads` may be rescaled by clipping.
    pub fn step(&mut self, net: &mut Mlp, grads: &mut Gradients) {
        if self.max_grad_norm > 0.0 {
            let norm = grads.norm();
            if norm > self.max_grad_norm {
                grads.scale(self.max_grad_norm / norm);
            }
        }
        self.t += 1;
        match self.kind {
            OptimizerKind::Sgd => {
                for (l, g) in net.layers_mut().iter_mut().zip(&grads.layers) {
                    for (p, d) in l.weights.iter_mut().zip(&g.weights) {
                        *p -= self.lr * d;
                    }
                    for (p, d) in l.bias.iter_mut().zip(&g.bias) {
                        *p -= self.lr * d;
                    }
                }
            }
            OptimizerKind::Adam => {
                let m = self.m.get_or_insert_with(|| Gradients::zeros_like(net));
                let v = self.v.get_or_insert_with(|| Gradients::zeros_like(net));
                let c1 = 1.0 - BETA1.powi(self.t as i32);
                let c2 = 1.0 - BETA2.powi(self.t as i32);
                let lr = self.lr;
                let update = |p: &mut f64, d: f64, m: &mut f64, v: &mut f64| {
                    *m = BETA1 * *m + (1.0 - BETA1) * d;
                    *v = BETA2 * *v + (1.0 - BETA2) * d * d;
                    *p -= lr * (*m / c1) / ((*v / c2).sqrt() + ADAM_EPS);
                };
                for (((l, g), ml), vl) in net
                    .layers_mut()
                    .iter_mut()
                    .zip(&grads.layers)
                    .zip(&mut m.layers)
                    .zip(&mut v.layers)
                {
                    for i in 0..l.weights.len() {
                        update(&mut l.weights[i], g.weights[i], &mut ml.weights[i], &mut vl.weights[i]);
                    }
                    for i in 0..l.bias.len() {
                        update(&mut l.bias[i], g.bias[i], &mut ml.bias[i], &mut vl.bias[i]);
                    }
                }
            }
        }
    }
}
