//! Reverse sweep. Adjoints are recorded as ordinary tape nodes, so the
//! gradient graph can itself be differentiated (double backward).

use ndarray::Array2;

use super::tape::{Op, Tape};
use super::{AutodiffError, NodeId};

/// How the adjoint graph is recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradMode {
    /// Adjoint nodes are constants; cheapest, enough for training.
    FirstOrder,
    /// Adjoint nodes stay differentiable so the gradient can be differentiated again.
    SecondOrder,
}

type Contribs = Vec<(NodeId, NodeId)>;

impl Tape {
    /// Gradients of the scalar `output` with respect to each node in `wrt`,
    /// returned as nodes on this tape. Nodes `output` does not depend on get
    /// a zero constant of the right shape.
    pub fn grad(&mut self, output: NodeId, wrt: &[NodeId], mode: GradMode) -> Result<Vec<NodeId>, AutodiffError> {
        let shape = self.shape(output);
        if shape != (1, 1) {
            return Err(AutodiffError::NonScalarOutput {
                node: self.label(output),
                shape,
            });
        }
        if !self.requires_grad(output) {
            return Err(AutodiffError::Detached {
                node: self.label(output),
            });
        }
        let was_frozen = self.frozen;
        self.frozen = was_frozen || mode == GradMode::FirstOrder;
        let result = self.sweep(output, wrt, mode);
        self.frozen = was_frozen;
        result
    }

    fn sweep(&mut self, output: NodeId, wrt: &[NodeId], mode: GradMode) -> Result<Vec<NodeId>, AutodiffError> {
        let n = output.0 + 1;
        let mut adjoint: Vec<Option<NodeId>> = vec![None; n];
        adjoint[output.0] = Some(self.scalar(1.0));

        for i in (0..n).rev() {
            let Some(g) = adjoint[i] else { continue };
            let node = self.node(NodeId(i));
            if !node.requires_grad || node.op == Op::Leaf {
                continue;
            }
            let op = node.op;
            if mode == GradMode::SecondOrder && !op.twice_differentiable() {
                return Err(AutodiffError::NotTwiceDifferentiable {
                    op: op.name(),
                    node: self.label(NodeId(i)),
                });
            }
            for (parent, contrib) in self.vjp(NodeId(i), op, g)? {
                adjoint[parent.0] = Some(match adjoint[parent.0] {
                    None => contrib,
                    Some(prev) => self.add(prev, contrib)?,
                });
            }
        }

        wrt.iter()
            .map(|&w| match adjoint.get(w.0).copied().flatten() {
                Some(g) => Ok(g),
                None => {
                    let shape = self.shape(w);
                    Ok(self.constant(Array2::zeros(shape)))
                }
            })
            .collect()
    }

    fn wants(&self, id: NodeId) -> bool {
        self.requires_grad(id)
    }

    /// Adjoint contributions of node `y = op(...)` with incoming adjoint `g`.
    fn vjp(&mut self, y: NodeId, op: Op, g: NodeId) -> Result<Contribs, AutodiffError> {
        let mut out = Contribs::new();
        match op {
            Op::Leaf | Op::ReluMask(..) | Op::ClampMask { .. } | Op::Detach(..) => {}
            Op::MatMul { a, b, ta, tb } => {
                if self.wants(a) {
                    let ga = if ta {
                        self.matmul_t(b, g, tb, true)?
                    } else {
                        self.matmul_t(g, b, false, !tb)?
                    };
                    out.push((a, ga));
                }
                if self.wants(b) {
                    let gb = if tb {
                        self.matmul_t(g, a, true, ta)?
                    } else {
                        self.matmul_t(a, g, !ta, false)?
                    };
                    out.push((b, gb));
                }
            }
            Op::Add(a, b) => {
                if self.wants(a) {
                    let s = self.shape(a);
                    out.push((a, self.sum_to(g, s)?));
                }
                if self.wants(b) {
                    let s = self.shape(b);
                    out.push((b, self.sum_to(g, s)?));
                }
            }
            Op::Sub(a, b) => {
                if self.wants(a) {
                    let s = self.shape(a);
                    out.push((a, self.sum_to(g, s)?));
                }
                if self.wants(b) {
                    let s = self.shape(b);
                    let r = self.sum_to(g, s)?;
                    out.push((b, self.neg(r)?));
                }
            }
            Op::Mul(a, b) => {
                if self.wants(a) {
                    let s = self.shape(a);
                    let t = self.mul(g, b)?;
                    out.push((a, self.sum_to(t, s)?));
                }
                if self.wants(b) {
                    let s = self.shape(b);
                    let t = self.mul(g, a)?;
                    out.push((b, self.sum_to(t, s)?));
                }
            }
            Op::Neg(x) => out.push((x, self.neg(g)?)),
            Op::Scale(x, c) => out.push((x, self.scale(g, c)?)),
            Op::Offset(x, _) => out.push((x, g)),
            Op::Recip(x) => {
                let y2 = self.square(y)?;
                let t = self.mul(g, y2)?;
                out.push((x, self.neg(t)?));
            }
            Op::Exp(x) => out.push((x, self.mul(g, y)?)),
            Op::Log(x) => {
                let r = self.recip(x)?;
                out.push((x, self.mul(g, r)?));
            }
            Op::Relu(x) => {
                let m = self.relu_mask(x)?;
                out.push((x, self.mul(g, m)?));
            }
            Op::Sigmoid(x) => {
                // s' = s - s²
                let s2 = self.square(y)?;
                let ds = self.sub(y, s2)?;
                out.push((x, self.mul(g, ds)?));
            }
            Op::Softplus(x) => {
                let s = self.sigmoid(x)?;
                out.push((x, self.mul(g, s)?));
            }
            Op::Clamp { x, lo, hi } => {
                let m = self.clamp_mask(x, lo, hi)?;
                out.push((x, self.mul(g, m)?));
            }
            Op::Expand { x, .. } => {
                let s = self.shape(x);
                out.push((x, self.sum_to(g, s)?));
            }
            Op::SumTo { x, .. } => {
                let s = self.shape(x);
                out.push((x, self.expand(g, s)?));
            }
            Op::LogSumExpRows(x) => {
                // softmax(x) enters as a constant, hence first order only
                let v = self.value(x);
                let lse = self.value(y);
                let soft = Array2::from_shape_fn(v.dim(), |(i, j)| (v[[i, j]] - lse[[i, 0]]).exp());
                let soft = self.constant(soft);
                out.push((x, self.mul(g, soft)?));
            }
        }
        Ok(out)
    }

    /// Accumulates `∂output/∂leaf` into the grad slot of every leaf that
    /// requires grad. Gradient nodes are discarded afterwards, so the tape is
    /// left as it was apart from the grad slots.
    pub fn backward(&mut self, output: NodeId) -> Result<(), AutodiffError> {
        let leaves: Vec<NodeId> = (0..=output.0)
            .map(NodeId)
            .filter(|&id| {
                let node = self.node(id);
                node.op == Op::Leaf && node.requires_grad
            })
            .collect();
        let mark = self.checkpoint();
        let grads = self.grad(output, &leaves, GradMode::FirstOrder)?;
        let values: Vec<Array2<f64>> = grads.iter().map(|&g| self.value(g).clone()).collect();
        self.truncate(mark);
        for (leaf, value) in leaves.into_iter().zip(values) {
            let slot = &mut self.nodes[leaf.0].grad;
            match slot {
                Some(acc) => *acc += &value,
                None => *slot = Some(value),
            }
        }
        Ok(())
    }
}
