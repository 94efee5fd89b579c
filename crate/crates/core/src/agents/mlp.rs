//! Fully connected network: tanh hidden layers, linear output.
//!
//! Weights are stored per layer as `outputs × inputs`, row-major. Batched tensors are
//! row-major `batch × width`.

use rand::Rng;

use super::AgentError;

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layers: Vec<Layer>,
}

/// Post-activation outputs of every layer for one batch; `acts[0]` is the input.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub batch: usize,
    pub acts: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &[f64] {
        self.acts.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Parameter gradients, shaped like the network's layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Layer>,
}

impl Gradients {
    pub fn zeros_like(net: &Mlp) -> Self {
        Self {
            layers: net
                .layers
                .iter()
                .map(|l| Layer::zeros(l.inputs, l.outputs))
                .collect(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias))
            .map(|g| g * g)
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&mut self, k: f64) {
        for l in &mut self.layers {
            l.weights.iter_mut().chain(l.bias.iter_mut()).for_each(|g| *g *= k);
        }
    }

    /// Gradient entry in the same flat order as [`Mlp::param`].
    pub fn flat(&self, mut i: usize) -> f64 {
        for l in &self.layers {
            if i < l.weights.len() {
                return l.weights[i];
            }
            i -= l.weights.len();
            if i < l.bias.len() {
                return l.bias[i];
            }
            i -= l.bias.len();
        }
        panic!("gradient index out of range");
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let i = c * 4;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut tail = 0.0;
    for i in chunks * 4..a.len() {
        tail += a[i] * b[i];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

impl Mlp {
    /// Glorot-uniform hidden layers; the output layer's range is multiplied by `output_gain`.
    /// Biases start at zero.
    pub fn new<R: Rng + ?Sized>(sizes: &[usize], output_gain: f64, rng: &mut R) -> Self {
        assert!(sizes.len() >= 2, "need at least input and output sizes");
        assert!(sizes.iter().all(|&s| s > 0), "layer sizes must be positive");
        let last = sizes.len() - 2;
        let layers = sizes
            .windows(2)
            .enumerate()
            .map(|(idx, w)| {
                let (inputs, outputs) = (w[0], w[1]);
                let mut bound = (6.0 / (inputs + outputs) as f64).sqrt();
                if idx == last {
                    bound *= output_gain;
                }
                let mut layer = Layer::zeros(inputs, outputs);
                for wv in &mut layer.weights {
                    *wv = rng.gen_range(-1.0..1.0) * bound;
                }
                layer
            })
            .collect();
        Self { layers }
    }

    pub fn zeros(sizes: &[usize]) -> Self {
        assert!(sizes.len() >= 2, "need at least input and output sizes");
        Self {
            layers: sizes.windows(2).map(|w| Layer::zeros(w[0], w[1])).collect(),
        }
    }

    /// Builds a network from explicit layers, checking that shapes chain.
    pub fn from_layers(layers: Vec<Layer>) -> Result<Self, AgentError> {
        if layers.is_empty() {
            return Err(AgentError::ShapeMismatch("network has no layers".into()));
        }
        for l in &layers {
            if l.inputs == 0
                || l.outputs == 0
                || l.weights.len() != l.inputs * l.outputs
                || l.bias.len() != l.outputs
            {
                return Err(AgentError::ShapeMismatch(format!(
                    "layer {}x{} has {} weights and {} biases",
                    l.outputs,
                    l.inputs,
                    l.weights.len(),
                    l.bias.len()
                )));
            }
        }
        for w in layers.windows(2) {
            if w[0].outputs != w[1].inputs {
                return Err(AgentError::ShapeMismatch(format!(
                    "layer outputs {} do not feed next layer inputs {}",
                    w[0].outputs, w[1].inputs
                )));
            }
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn sizes(&self) -> Vec<usize> {
        std::iter::once(self.layers[0].inputs)
            .chain(self.layers.iter().map(|l| l.outputs))
            .collect()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.bias).all(|v| v.is_finite()))
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, AgentError> {
        if x.len() != self.input_dim() {
            return Err(AgentError::ShapeMismatch(format!(
                "observation has {} values, network expects {}",
                x.len(),
                self.input_dim()
            )));
        }
        let mut cur = x.to_vec();
        let last = self.layers.len() - 1;
        for (li, l) in self.layers.iter().enumerate() {
            let mut next = Vec::with_capacity(l.outputs);
            for o in 0..l.outputs {
                let z = l.bias[o] + dot(&l.weights[o * l.inputs..(o + 1) * l.inputs], &cur);
                next.push(if li == last { z } else { z.tanh() });
            }
            cur = next;
        }
        Ok(cur)
    }

    /// Forward pass over `batch` rows of `xs`, keeping activations for [`Mlp::backward`].
    pub fn forward_batch(&self, xs: &[f64], batch: usize) -> Result<ForwardCache, AgentError> {
        if xs.len() != batch * self.input_dim() {
            return Err(AgentError::ShapeMismatch(format!(
                "batch holds {} values, expected {batch} x {}",
                xs.len(),
                self.input_dim()
            )));
        }
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(xs.to_vec());
        let last = self.layers.len() - 1;
        for (li, l) in self.layers.iter().enumerate() {
            let prev = &acts[li];
            let mut out = vec![0.0; batch * l.outputs];
            for b in 0..batch {
                let a = &prev[b * l.inputs..(b + 1) * l.inputs];
                let row = &mut out[b * l.outputs..(b + 1) * l.outputs];
                for (o, z) in row.iter_mut().enumerate() {
                    *z = l.bias[o] + dot(&l.weights[o * l.inputs..(o + 1) * l.inputs], a);
                }
                if li != last {
                    row.iter_mut().for_each(|z| *z = z.tanh());
                }
            }
            acts.push(out);
        }
        Ok(ForwardCache { batch, acts })
    }

    /// Accumulates parameter gradients of a scalar loss into `grads`, given
    /// `grad_out = dLoss/dOutput` for every row of the cached batch.
    pub fn backward(&self, cache: &ForwardCache, grad_out: &[f64], grads: &mut Gradients) {
        let batch = cache.batch;
        assert_eq!(grad_out.len(), batch * self.output_dim(), "output gradient shape");
        let mut delta = grad_out.to_vec();
        for li in (0..self.layers.len()).rev() {
            let l = &self.layers[li];
            let g = &mut grads.layers[li];
            let input = &cache.acts[li];
            for b in 0..batch {
                let d = &delta[b * l.outputs..(b + 1) * l.outputs];
                let a = &input[b * l.inputs..(b + 1) * l.inputs];
                for (o, &dz) in d.iter().enumerate() {
                    if dz != 0.0 {
                        axpy(dz, a, &mut g.weights[o * l.inputs..(o + 1) * l.inputs]);
                        g.bias[o] += dz;
                    }
                }
            }
            if li == 0 {
                break;
            }
            // propagate into the previous (tanh) layer
            let mut prev = vec![0.0; batch * l.inputs];
            for b in 0..batch {
                let d = &delta[b * l.outputs..(b + 1) * l.outputs];
                let p = &mut prev[b * l.inputs..(b + 1) * l.inputs];
                for (o, &dz) in d.iter().enumerate() {
                    if dz != 0.0 {
                        axpy(dz, &l.weights[o * l.inputs..(o + 1) * l.inputs], p);
                    }
                }
                let a = &input[b * l.inputs..(b + 1) * l.inputs];
                for (pi, ai) in p.iter_mut().zip(a) {
                    *pi *= 1.0 - ai * ai;
                }
            }
            delta = prev;
        }
    }

    pub fn copy_from(&mut self, other: &Mlp) {
        debug_assert_eq!(self.sizes(), other.sizes());
        self.layers.clone_from(&other.layers);
    }

    pub fn n_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }

    fn param_slot(&mut self, mut i: usize) -> &mut f64 {
        for l in &mut self.layers {
            if i < l.weights.len() {
                return &mut l.weights[i];
            }
            i -= l.weights.len();
            if i < l.bias.len() {
                return &mut l.bias[i];
            }
            i -= l.bias.len();
        }
        panic!("parameter index out of range");
    }

    /// Parameter `i` in flat order: each layer's weights then its biases.
    pub fn param(&self, mut i: usize) -> f64 {
        for l in &self.layers {
            if i < l.weights.len() {
                return l.weights[i];
            }
            i -= l.weights.len();
            if i < l.bias.len() {
                return l.bias[i];
            }
            i -= l.bias.len();
        }
        panic!("parameter index out of range");
    }

    pub fn set_param(&mut self, i: usize, v: f64) {
        *self.param_slot(i) = v;
    }
}
