//! Binary policy files.
//!
//! Layout, all little-endian: the 8-byte magic `QRLMLP\0\0`, a `u32` format version,
//! a `u32` count of layer sizes, that many `u32` sizes, then for each layer its weight
//! matrix (`outputs × inputs`, row-major) followed by its bias vector, as `f64`.

use std::fs;
use std::path::Path;

use super::{AgentError, Layer, Mlp, Result};

pub const MAGIC: &[u8; 8] = b"QRLMLP\0\0";
pub const FORMAT_VERSION: u32 = 1;

pub fn policy_to_bytes(net: &Mlp) -> Vec<u8> {
    let sizes = net.sizes();
    let mut out = Vec::with_capacity(16 + 4 * sizes.len() + 8 * net.n_params());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(sizes.len() as u32).to_le_bytes());
    for s in &sizes {
        out.extend_from_slice(&(*s as u32).to_le_bytes());
    }
    for l in net.layers() {
        for v in l.weights.iter().chain(&l.bias) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or_else(|| {
            AgentError::CorruptFile(format!("truncated while reading {what} at byte {}", self.pos))
        })?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().expect("4 bytes")))
    }

    fn f64s(&mut self, n: usize, what: &str) -> Result<Vec<f64>> {
        let raw = self.take(n.checked_mul(8).unwrap_or(usize::MAX), what)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }
}

pub fn policy_from_bytes(buf: &[u8]) -> Result<Mlp> {
    let mut c = Cursor { buf, pos: 0 };
    if c.take(8, "magic")? != MAGIC {
        return Err(AgentError::CorruptFile("bad magic".into()));
    }
    let version = c.u32("version")?;
    if version != FORMAT_VERSION {
        return Err(AgentError::CorruptFile(format!("unsupported format version {version}")));
    }
    let n = c.u32("layer count")? as usize;
    if n < 2 {
        return Err(AgentError::ShapeMismatch(format!("{n} layer sizes, need at least 2")));
    }
    let mut sizes = Vec::with_capacity(n.min(64));
    for _ in 0..n {
        sizes.push(c.u32("layer size")? as usize);
    }
    if sizes.contains(&0) {
        return Err(AgentError::ShapeMismatch("zero-width layer in header".into()));
    }
    let mut layers = Vec::with_capacity(n - 1);
    for w in sizes.windows(2) {
        let (inputs, outputs) = (w[0], w[1]);
        let weights = c.f64s(inputs * outputs, "weights")?;
        let bias = c.f64s(outputs, "bias")?;
        layers.push(Layer { inputs, outputs, weights, bias });
    }
    if c.pos != buf.len() {
        return Err(AgentError::CorruptFile(format!(
            "{} trailing bytes after parameters",
            buf.len() - c.pos
        )));
    }
    let net = Mlp::from_layers(layers)?;
    if !net.is_finite() {
        return Err(AgentError::CorruptFile("non-finite parameter".into()));
    }
    Ok(net)
}

pub fn save_policy(net: &Mlp, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, policy_to_bytes(net))?;
    Ok(())
}

pub fn load_policy(path: impl AsRef<Path>) -> Result<Mlp> {
    policy_from_bytes(&fs::read(path)?)
}

/// Fails with `ShapeMismatch` unless the network maps `input` values to `output` values.
pub fn check_io(net: &Mlp, input: usize, output: usize) -> Result<()> {
    if net.input_dim() != input || net.output_dim() != output {
        return Err(AgentError::ShapeMismatch(format!(
            "policy maps {} -> {}, expected {input} -> {output}",
            net.input_dim(),
            net.output_dim()
        )));
    }
    Ok(())
}
