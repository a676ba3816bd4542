use ndarray::{Array2, ArrayView2};
use rand::Rng;

use super::layer::{affine, Dense, Parameter};
use crate::autodiff::{AutodiffError, NodeId, Tape};

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierSpec {
    pub z_dim: usize,
    pub hidden: usize,
    pub classes: usize,
}

impl ClassifierSpec {
    /// `z_dim → 64 relu → 6`.
    pub fn standard(z_dim: usize) -> Self {
        Self {
            z_dim,
            hidden: 64,
            classes: 6,
        }
    }
}

/// Classifier head on the latent code; its softmax is the variational decoder q(y|z).
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierParams {
    pub hidden: Dense,
    pub out: Dense,
}

impl ClassifierParams {
    pub fn init<R: Rng + ?Sized>(spec: &ClassifierSpec, rng: &mut R) -> Self {
        Self {
            hidden: Dense::init("classifier.hidden", spec.z_dim, spec.hidden, rng),
            out: Dense::init("classifier.out", spec.hidden, spec.classes, rng),
        }
    }

    pub fn zeros(spec: &ClassifierSpec) -> Self {
        Self {
            hidden: Dense::zeros("classifier.hidden", spec.z_dim, spec.hidden),
            out: Dense::zeros("classifier.out", spec.hidden, spec.classes),
        }
    }

    pub fn classes(&self) -> usize {
        self.out.fan_out()
    }

    pub fn parameters(&self) -> Vec<&Parameter> {
        vec![&self.hidden.weight, &self.hidden.bias, &self.out.weight, &self.out.bias]
    }

    pub fn parameters_mut(&mut self) -> Vec<&mut Parameter> {
        vec![
            &mut self.hidden.weight,
            &mut self.hidden.bias,
            &mut self.out.weight,
            &mut self.out.bias,
        ]
    }

    pub fn logits_batch(&self, z: ArrayView2<f64>) -> Array2<f64> {
        let mut h = self.hidden.forward(z);
        h.mapv_inplace(|v| v.max(0.0));
        self.out.forward(h.view())
    }

    pub fn classify(&self, z: &[f64]) -> Vec<f64> {
        let row = ArrayView2::from_shape((1, z.len()), z).expect("row view of a slice");
        self.logits_batch(row).into_raw_vec_and_offset().0
    }

    pub fn bind(&self, tape: &mut Tape) -> BoundClassifier {
        BoundClassifier {
            hidden: self.hidden.bind(tape, true),
            out: self.out.bind(tape, true),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BoundClassifier {
    pub hidden: (NodeId, NodeId),
    pub out: (NodeId, NodeId),
}

impl BoundClassifier {
    pub fn parameters(&self) -> Vec<NodeId> {
        vec![self.hidden.0, self.hidden.1, self.out.0, self.out.1]
    }

    pub fn forward(&self, tape: &mut Tape, z: NodeId) -> Result<NodeId, AutodiffError> {
        let pre = affine(tape, z, self.hidden)?;
        let h = tape.relu(pre)?;
        affine(tape, h, self.out)
    }
}

/// Max-shifted softmax of one logit vector.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&l| (l - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}
