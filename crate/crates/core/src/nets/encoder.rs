use ndarray::{Array2, ArrayView2, Zip};
use rand::Rng;

use super::layer::{affine, Activation, Dense, Parameter};
use super::NetsError;
use crate::autodiff::{AutodiffError, NodeId, Tape};

pub const LOGVAR_MIN: f64 = -10.0;
pub const LOGVAR_MAX: f64 = 10.0;

/// Layer widths of an encoder.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderSpec {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub z_dim: usize,
    pub activation: Activation,
}

impl EncoderSpec {
    /// `input_dim → 128 → 128 → {μ, logvar}` with relu.
    pub fn standard(input_dim: usize, z_dim: usize) -> Self {
        Self {
            input_dim,
            hidden: vec![128, 128],
            z_dim,
            activation: Activation::Relu,
        }
    }
}

/// MLP trunk with two linear heads: the posterior mean and log-variance.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderParams {
    pub hidden: Vec<Dense>,
    pub mu: Dense,
    pub logvar: Dense,
    pub activation: Activation,
}

impl EncoderParams {
    pub fn init<R: Rng + ?Sized>(spec: &EncoderSpec, rng: &mut R) -> Self {
        let mut fan_in = spec.input_dim;
        let mut hidden = Vec::with_capacity(spec.hidden.len());
        for (i, &width) in spec.hidden.iter().enumerate() {
            hidden.push(Dense::init(&format!("encoder.hidden{i}"), fan_in, width, rng));
            fan_in = width;
        }
        let mu = Dense::init("encoder.mu", fan_in, spec.z_dim, rng);
        let logvar = Dense::init("encoder.logvar", fan_in, spec.z_dim, rng);
        Self {
            hidden,
            mu,
            logvar,
            activation: spec.activation,
        }
    }

    pub fn zeros(spec: &EncoderSpec) -> Self {
        let mut fan_in = spec.input_dim;
        let mut hidden = Vec::new();
        for (i, &width) in spec.hidden.iter().enumerate() {
            hidden.push(Dense::zeros(&format!("encoder.hidden{i}"), fan_in, width));
            fan_in = width;
        }
        Self {
            hidden,
            mu: Dense::zeros("encoder.mu", fan_in, spec.z_dim),
            logvar: Dense::zeros("encoder.logvar", fan_in, spec.z_dim),
            activation: spec.activation,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.hidden.first().unwrap_or(&self.mu).fan_in()
    }

    pub fn z_dim(&self) -> usize {
        self.mu.fan_out()
    }

    pub fn parameters(&self) -> Vec<&Parameter> {
        let mut out = Vec::new();
        for d in self.hidden.iter().chain([&self.mu, &self.logvar]) {
            out.push(&d.weight);
            out.push(&d.bias);
        }
        out
    }

    pub fn parameters_mut(&mut self) -> Vec<&mut Parameter> {
        let mut out = Vec::new();
        for d in self.hidden.iter_mut().chain([&mut self.mu, &mut self.logvar]) {
            out.push(&mut d.weight);
            out.push(&mut d.bias);
        }
        out
    }

    /// Last hidden representation for a batch (rows are samples).
    pub fn trunk(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let mut h = x.to_owned();
        for layer in &self.hidden {
            h = layer.forward(h.view());
            h.mapv_inplace(|v| self.activation.apply(v));
        }
        h
    }

    /// Posterior mean and clamped log-variance for a batch.
    pub fn encode_batch(&self, x: ArrayView2<f64>) -> Result<(Array2<f64>, Array2<f64>), NetsError> {
        let h = self.trunk(x);
        let mu = self.mu.forward(h.view());
        let mut logvar = self.logvar.forward(h.view());
        if let Some(what) = first_non_finite(&[("encoder mean", &mu), ("encoder log-variance", &logvar)]) {
            return Err(NetsError::NonFinite { what: what.into() });
        }
        logvar.mapv_inplace(|v| v.clamp(LOGVAR_MIN, LOGVAR_MAX));
        Ok((mu, logvar))
    }

    /// Single-sample convenience wrapper around [`encode_batch`](Self::encode_batch).
    pub fn encode(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>), NetsError> {
        if x.len() != self.input_dim() {
            return Err(NetsError::ShapeMismatch {
                param: "input".into(),
                expected: (1, self.input_dim()),
                got: (1, x.len()),
            });
        }
        let row = ArrayView2::from_shape((1, x.len()), x).expect("row view of a slice");
        let (mu, logvar) = self.encode_batch(row)?;
        Ok((mu.into_raw_vec_and_offset().0, logvar.into_raw_vec_and_offset().0))
    }

    /// Records the parameters on `tape` as trainable leaves.
    pub fn bind(&self, tape: &mut Tape) -> BoundEncoder {
        self.bind_with(tape, true)
    }

    /// Records the parameters as constants; derivatives then only flow to inputs.
    pub fn bind_frozen(&self, tape: &mut Tape) -> BoundEncoder {
        self.bind_with(tape, false)
    }

    fn bind_with(&self, tape: &mut Tape, trainable: bool) -> BoundEncoder {
        BoundEncoder {
            hidden: self.hidden.iter().map(|d| d.bind(tape, trainable)).collect(),
            mu: self.mu.bind(tape, trainable),
            logvar: self.logvar.bind(tape, trainable),
            activation: self.activation,
        }
    }
}

fn first_non_finite<'a>(arrays: &[(&'a str, &Array2<f64>)]) -> Option<&'a str> {
    arrays
        .iter()
        .find(|(_, a)| a.iter().any(|v| !v.is_finite()))
        .map(|(name, _)| *name)
}

/// `μ + exp(½·logvar) ⊙ eps`.
pub fn reparameterize(mu: &Array2<f64>, logvar: &Array2<f64>, eps: &Array2<f64>) -> Array2<f64> {
    let mut z = mu.clone();
    Zip::from(&mut z)
        .and(logvar)
        .and(eps)
        .for_each(|z, &lv, &e| *z += (0.5 * lv).exp() * e);
    z
}

/// Tape version of [`reparameterize`], differentiable in `mu` and `logvar`.
pub fn reparameterize_on_tape(tape: &mut Tape, mu: NodeId, logvar: NodeId, eps: NodeId) -> Result<NodeId, AutodiffError> {
    let half = tape.scale(logvar, 0.5)?;
    let sigma = tape.exp(half)?;
    let noise = tape.mul(sigma, eps)?;
    tape.add(mu, noise)
}

/// Encoder parameters living on a tape.
#[derive(Debug, Clone)]
pub struct BoundEncoder {
    pub hidden: Vec<(NodeId, NodeId)>,
    pub mu: (NodeId, NodeId),
    pub logvar: (NodeId, NodeId),
    pub activation: Activation,
}

/// Intermediate nodes of one encoder pass, kept for tangent propagation.
#[derive(Debug, Clone)]
pub struct EncoderTrace {
    pub pre_activations: Vec<NodeId>,
    pub mu: NodeId,
    pub logvar_raw: NodeId,
    pub logvar: NodeId,
}

impl BoundEncoder {
    pub fn parameters(&self) -> Vec<NodeId> {
        let mut out = Vec::new();
        for &(w, b) in self.hidden.iter().chain([&self.mu, &self.logvar]) {
            out.push(w);
            out.push(b);
        }
        out
    }

    pub fn forward(&self, tape: &mut Tape, x: NodeId) -> Result<EncoderTrace, AutodiffError> {
        let mut h = x;
        let mut pre_activations = Vec::with_capacity(self.hidden.len());
        for &layer in &self.hidden {
            let pre = affine(tape, h, layer)?;
            pre_activations.push(pre);
            h = self.activation.on_tape(tape, pre)?;
        }
        let mu = affine(tape, h, self.mu)?;
        let logvar_raw = affine(tape, h, self.logvar)?;
        let logvar = tape.clamp(logvar_raw, LOGVAR_MIN, LOGVAR_MAX)?;
        Ok(EncoderTrace {
            pre_activations,
            mu,
            logvar_raw,
            logvar,
        })
    }

    /// Pushes the input-space directions `probe` (one per row, matching the
    /// batch rows of `trace`) through the encoder Jacobian. Returns
    /// `(J_μ v, J_logvar v)` per row. The result is differentiable with
    /// respect to the parameters.
    pub fn tangent(&self, tape: &mut Tape, trace: &EncoderTrace, probe: NodeId) -> Result<(NodeId, NodeId), AutodiffError> {
        let mut t = probe;
        for (&(w, _), &pre) in self.hidden.iter().zip(&trace.pre_activations) {
            t = tape.matmul(t, w)?;
            if let Some(d) = self.activation.derivative_on_tape(tape, pre)? {
                t = tape.mul(t, d)?;
            }
        }
        let t_mu = tape.matmul(t, self.mu.0)?;
        let t_lv = tape.matmul(t, self.logvar.0)?;
        let mask = tape.clamp_mask(trace.logvar_raw, LOGVAR_MIN, LOGVAR_MAX)?;
        let t_lv = tape.mul(t_lv, mask)?;
        Ok((t_mu, t_lv))
    }
}
