//! The model family: an MLP encoder with a diagonal-Gaussian bottleneck,
//! a small classifier head on the latent sample, parameter initialization,
//! Adam, and a text checkpoint format.

mod adam;
mod checkpoint;
mod classifier;
mod encoder;
mod layer;

pub use adam::{clip_global_norm, AdamConfig, AdamState};
pub use checkpoint::{load_checkpoint, parse_checkpoint, save_checkpoint, write_checkpoint};
pub use classifier::{softmax, BoundClassifier, ClassifierParams, ClassifierSpec};
pub use encoder::{
    reparameterize, reparameterize_on_tape, BoundEncoder, EncoderParams, EncoderSpec, EncoderTrace,
    LOGVAR_MAX, LOGVAR_MIN,
};
pub use layer::{Activation, Dense, Parameter};
pub(crate) use layer::affine;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::autodiff::AutodiffError;

#[derive(Debug, Error)]
pub enum NetsError {
    #[error("non-finite value in {what}")]
    NonFinite { what: String },
    #[error("non-finite gradient for parameter `{param}`")]
    NonFiniteGradient { param: String },
    #[error("parameter `{param}`: expected shape {expected:?}, got {got:?}")]
    ShapeMismatch {
        param: String,
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("expected {expected} gradients, got {got}")]
    GradientCount { expected: usize, got: usize },
    #[error("missing parameter `{0}` in checkpoint")]
    MissingParameter(String),
    #[error("checkpoint line {line}: {message}")]
    Checkpoint { line: usize, message: String },
    #[error(transparent)]
    Autodiff(#[from] AutodiffError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Encoder plus classifier, the unit that gets trained and checkpointed.
#[derive(Debug, Clone, PartialEq)]
pub struct VgibModel {
    pub encoder: EncoderParams,
    pub classifier: ClassifierParams,
}

impl VgibModel {
    /// Deterministic initialization: the encoder is drawn first, then the
    /// classifier, from one ChaCha stream seeded with `seed`.
    pub fn init(encoder: &EncoderSpec, classifier: &ClassifierSpec, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let encoder = EncoderParams::init(encoder, &mut rng);
        let classifier = ClassifierParams::init(classifier, &mut rng);
        Self { encoder, classifier }
    }

    pub fn parameters(&self) -> Vec<&Parameter> {
        let mut out = self.encoder.parameters();
        out.extend(self.classifier.parameters());
        out
    }

    pub fn parameters_mut(&mut self) -> Vec<&mut Parameter> {
        let mut out = self.encoder.parameters_mut();
        out.extend(self.classifier.parameters_mut());
        out
    }

    /// Overwrites parameter values by name, checking shapes.
    pub fn load_parameters(&mut self, loaded: &[Parameter]) -> Result<(), NetsError> {
        for p in self.parameters_mut() {
            let src = loaded
                .iter()
                .find(|l| l.name == p.name)
                .ok_or_else(|| NetsError::MissingParameter(p.name.clone()))?;
            if src.value.dim() != p.value.dim() {
                return Err(NetsError::ShapeMismatch {
                    param: p.name.clone(),
                    expected: p.value.dim(),
                    got: src.value.dim(),
                });
            }
            p.value.assign(&src.value);
        }
        Ok(())
    }

    pub fn all_finite(&self) -> bool {
        self.parameters().iter().all(|p| p.value.iter().all(|v| v.is_finite()))
    }
}
