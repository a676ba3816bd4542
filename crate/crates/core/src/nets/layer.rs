use ndarray::{Array2, ArrayView2};
use rand::Rng;

use crate::autodiff::{AutodiffError, NodeId, Tape};

/// Hidden-layer nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Activation {
    #[default]
    Relu,
    /// Smooth stand-in for relu; used where second derivatives must not vanish.
    Softplus,
    Identity,
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Softplus => crate::autodiff::stable_softplus(x),
            Activation::Identity => x,
        }
    }

    pub fn on_tape(self, tape: &mut Tape, x: NodeId) -> Result<NodeId, AutodiffError> {
        match self {
            Activation::Relu => tape.relu(x),
            Activation::Softplus => tape.softplus(x),
            Activation::Identity => Ok(x),
        }
    }

    /// Derivative of the activation at the pre-activation `x`, as a node
    /// (`None` for the identity). Relu's is a constant mask.
    pub fn derivative_on_tape(self, tape: &mut Tape, x: NodeId) -> Result<Option<NodeId>, AutodiffError> {
        match self {
            Activation::Relu => tape.relu_mask(x).map(Some),
            Activation::Softplus => tape.sigmoid(x).map(Some),
            Activation::Identity => Ok(None),
        }
    }
}

/// A named array. Weights are `(fan_in, fan_out)`, biases `(1, fan_out)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Parameter {
    pub name: String,
    pub value: Array2<f64>,
}

impl Parameter {
    pub fn new(name: impl Into<String>, value: Array2<f64>) -> Self {
        Self {
            name: name.into(),
            value,
        }
    }
}

/// Affine layer `x W + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weight: Parameter,
    pub bias: Parameter,
}

impl Dense {
    /// Weights uniform in `±√(6 / fan_in)`, biases zero.
    pub fn init<R: Rng + ?Sized>(name: &str, fan_in: usize, fan_out: usize, rng: &mut R) -> Self {
        let bound = (6.0 / fan_in as f64).sqrt();
        let weight = Array2::from_shape_simple_fn((fan_in, fan_out), || rng.random_range(-bound..bound));
        Self {
            weight: Parameter::new(format!("{name}.weight"), weight),
            bias: Parameter::new(format!("{name}.bias"), Array2::zeros((1, fan_out))),
        }
    }

    pub fn zeros(name: &str, fan_in: usize, fan_out: usize) -> Self {
        Self {
            weight: Parameter::new(format!("{name}.weight"), Array2::zeros((fan_in, fan_out))),
            bias: Parameter::new(format!("{name}.bias"), Array2::zeros((1, fan_out))),
        }
    }

    pub fn fan_in(&self) -> usize {
        self.weight.value.nrows()
    }

    pub fn fan_out(&self) -> usize {
        self.weight.value.ncols()
    }

    pub fn forward(&self, x: ArrayView2<f64>) -> Array2<f64> {
        x.dot(&self.weight.value) + &self.bias.value
    }

    pub(crate) fn bind(&self, tape: &mut Tape, trainable: bool) -> (NodeId, NodeId) {
        let w = tape.input(&self.weight.name, self.weight.value.clone(), trainable);
        let b = tape.input(&self.bias.name, self.bias.value.clone(), trainable);
        (w, b)
    }
}

pub(crate) fn affine(tape: &mut Tape, x: NodeId, (w, b): (NodeId, NodeId)) -> Result<NodeId, AutodiffError> {
    let xw = tape.matmul(x, w)?;
    tape.add(xw, b)
}
