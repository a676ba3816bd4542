//! Reverse-mode automatic differentiation over rank-2 `f64` tensors.
//!
//! The [`Tape`] records operations eagerly. [`Tape::grad`] writes the
//! adjoint computation back onto the same tape, which is what makes
//! Hessian-vector products possible: differentiate `⟨∇f(x), v⟩` again.
//!
//! ```
//! use vgib::autodiff::{GradMode, Tape};
//! use ndarray::array;
//!
//! let mut tape = Tape::new();
//! let x = tape.input("x", array![[3.0]], true);
//! let y = tape.mul(x, x).unwrap();
//! let g = tape.grad(y, &[x], GradMode::FirstOrder).unwrap();
//! assert_eq!(tape.value(g[0])[[0, 0]], 6.0);
//! ```

mod backward;
pub mod fd;
mod functional;
mod tape;

pub use backward::GradMode;
pub use functional::{hvp, jvp, value_and_grad, TapeFn};
pub use tape::{Checkpoint, GraphNode, NodeId, Op, Shape, Tape};
pub(crate) use tape::stable_softplus;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AutodiffError {
    #[error("{op}: shape mismatch between {left} {left_shape:?} and {right} {right_shape:?}")]
    ShapeMismatch {
        op: &'static str,
        left: String,
        right: String,
        left_shape: Shape,
        right_shape: Shape,
    },
    #[error("backward needs a scalar output, {node} has shape {shape:?}")]
    NonScalarOutput { node: String, shape: Shape },
    #[error("{node} does not depend on any input that requires grad")]
    Detached { node: String },
    #[error("{op} at {node} has no recorded second derivative")]
    NotTwiceDifferentiable { op: &'static str, node: String },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}
