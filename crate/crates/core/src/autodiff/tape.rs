//! Eager define-by-run tape over rank-2 `f64` tensors.
//!
//! Every operation computes its value when it is recorded, so the tape is
//! always fully evaluated. Node ids are indices into the tape; a parent always
//! has a smaller id than its child, so index order is a topological order and
//! reverse index order is the replay order for backward.

use ndarray::{Array2, Axis};

use super::AutodiffError;

/// `(rows, cols)`. Scalars are `(1, 1)`.
pub type Shape = (usize, usize);

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub(crate) usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Position on the tape that [`Tape::truncate`] can roll back to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Checkpoint(usize);

/// Operation tag of a node.
///
/// Binary elementwise operations broadcast a `(1, 1)`, `(1, m)` or `(n, 1)`
/// operand against the other one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Op {
    Leaf,
    /// `op(a) · op(b)` where `op` transposes when the flag is set.
    MatMul { a: NodeId, b: NodeId, ta: bool, tb: bool },
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Mul(NodeId, NodeId),
    Neg(NodeId),
    Scale(NodeId, f64),
    Offset(NodeId, f64),
    Recip(NodeId),
    Exp(NodeId),
    Log(NodeId),
    Relu(NodeId),
    Sigmoid(NodeId),
    Softplus(NodeId),
    Clamp { x: NodeId, lo: f64, hi: f64 },
    Expand { x: NodeId, to: Shape },
    SumTo { x: NodeId, to: Shape },
    /// Row-wise `log Σ exp`, `(n, m) -> (n, 1)`, max-shifted. Fused, so its
    /// gradient is only available to first order.
    LogSumExpRows(NodeId),
    /// Constant `1[x > 0]`; no gradient flows through it.
    ReluMask(NodeId),
    /// Constant `1[lo < x < hi]`; no gradient flows through it.
    ClampMask { x: NodeId, lo: f64, hi: f64 },
    /// Copy of the value with the gradient path cut.
    Detach(NodeId),
}

impl Op {
    pub fn name(&self) -> &'static str {
        match self {
            Op::Leaf => "leaf",
            Op::MatMul { .. } => "matmul",
            Op::Add(..) => "add",
            Op::Sub(..) => "sub",
            Op::Mul(..) => "mul",
            Op::Neg(..) => "neg",
            Op::Scale(..) => "scale",
            Op::Offset(..) => "offset",
            Op::Recip(..) => "recip",
            Op::Exp(..) => "exp",
            Op::Log(..) => "log",
            Op::Relu(..) => "relu",
            Op::Sigmoid(..) => "sigmoid",
            Op::Softplus(..) => "softplus",
            Op::Clamp { .. } => "clamp",
            Op::Expand { .. } => "expand",
            Op::SumTo { .. } => "sum_to",
            Op::LogSumExpRows(..) => "logsumexp_rows",
            Op::ReluMask(..) => "relu_mask",
            Op::ClampMask { .. } => "clamp_mask",
            Op::Detach(..) => "detach",
        }
    }

    pub fn parents(&self) -> impl Iterator<Item = NodeId> {
        let pair = match *self {
            Op::Leaf => [None, None],
            Op::MatMul { a, b, .. } | Op::Add(a, b) | Op::Sub(a, b) | Op::Mul(a, b) => {
                [Some(a), Some(b)]
            }
            Op::Neg(x)
            | Op::Scale(x, _)
            | Op::Offset(x, _)
            | Op::Recip(x)
            | Op::Exp(x)
            | Op::Log(x)
            | Op::Relu(x)
            | Op::Sigmoid(x)
            | Op::Softplus(x)
            | Op::Clamp { x, .. }
            | Op::Expand { x, .. }
            | Op::SumTo { x, .. }
            | Op::LogSumExpRows(x)
            | Op::ReluMask(x)
            | Op::ClampMask { x, .. }
            | Op::Detach(x) => [Some(x), None],
        };
        pair.into_iter().flatten()
    }

    /// Whether gradients propagate through this op at all.
    pub fn propagates_grad(&self) -> bool {
        !matches!(
            self,
            Op::Leaf | Op::ReluMask(..) | Op::ClampMask { .. } | Op::Detach(..)
        )
    }

    /// Whether the backward rule is itself recorded with differentiable ops.
    pub fn twice_differentiable(&self) -> bool {
        !matches!(self, Op::LogSumExpRows(..))
    }
}

/// One entry on the tape.
#[derive(Debug, Clone)]
pub struct GraphNode {
    pub value: Array2<f64>,
    pub grad: Option<Array2<f64>>,
    pub op: Op,
    pub requires_grad: bool,
    pub name: Option<String>,
}

impl GraphNode {
    pub fn shape(&self) -> Shape {
        self.value.dim()
    }
}

/// Ordered node list; the computation graph and its values.
#[derive(Debug, Default, Clone)]
pub struct Tape {
    pub(crate) nodes: Vec<GraphNode>,
    /// While set, new nodes never require grad (first-order backward).
    pub(crate) frozen: bool,
}

pub(crate) fn broadcast_shape(a: Shape, b: Shape) -> Option<Shape> {
    fn dim(x: usize, y: usize) -> Option<usize> {
        if x == y {
            Some(x)
        } else if x == 1 {
            Some(y)
        } else if y == 1 {
            Some(x)
        } else {
            None
        }
    }
    Some((dim(a.0, b.0)?, dim(a.1, b.1)?))
}

fn reducible(from: Shape, to: Shape) -> bool {
    (to.0 == from.0 || to.0 == 1) && (to.1 == from.1 || to.1 == 1)
}

pub(crate) fn stable_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub(crate) fn stable_softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

pub(crate) fn sum_to(x: &Array2<f64>, to: Shape) -> Array2<f64> {
    let mut v = x.clone();
    if to.0 == 1 && v.nrows() != 1 {
        v = v.sum_axis(Axis(0)).insert_axis(Axis(0));
    }
    if to.1 == 1 && v.ncols() != 1 {
        v = v.sum_axis(Axis(1)).insert_axis(Axis(1));
    }
    v
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &GraphNode {
        &self.nodes[id.0]
    }

    pub fn value(&self, id: NodeId) -> &Array2<f64> {
        &self.nodes[id.0].value
    }

    /// Value of a `(1, 1)` node.
    pub fn scalar_value(&self, id: NodeId) -> f64 {
        self.nodes[id.0].value[[0, 0]]
    }

    pub fn shape(&self, id: NodeId) -> Shape {
        self.nodes[id.0].shape()
    }

    pub fn requires_grad(&self, id: NodeId) -> bool {
        self.nodes[id.0].requires_grad
    }

    /// Accumulated gradient from [`Tape::backward`], if any.
    pub fn grad_of(&self, id: NodeId) -> Option<&Array2<f64>> {
        self.nodes[id.0].grad.as_ref()
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint(self.nodes.len())
    }

    /// Drops every node recorded after `cp`. Ids past the checkpoint become invalid.
    pub fn truncate(&mut self, cp: Checkpoint) {
        self.nodes.truncate(cp.0);
    }

    pub(crate) fn label(&self, id: NodeId) -> String {
        let node = &self.nodes[id.0];
        match &node.name {
            Some(name) => format!("`{name}` (#{})", id.0),
            None => format!("#{} ({})", id.0, node.op.name()),
        }
    }

    fn push(&mut self, value: Array2<f64>, op: Op, requires_grad: bool, name: Option<String>) -> NodeId {
        self.nodes.push(GraphNode {
            value,
            grad: None,
            op,
            requires_grad,
            name,
        });
        NodeId(self.nodes.len() - 1)
    }

    // ---- leaves ----

    pub fn leaf(&mut self, value: Array2<f64>, requires_grad: bool) -> NodeId {
        self.push(value, Op::Leaf, requires_grad, None)
    }

    /// Named leaf; the name shows up in error messages.
    pub fn input(&mut self, name: &str, value: Array2<f64>, requires_grad: bool) -> NodeId {
        self.push(value, Op::Leaf, requires_grad, Some(name.to_string()))
    }

    pub fn param(&mut self, name: &str, value: Array2<f64>) -> NodeId {
        self.input(name, value, true)
    }

    pub fn constant(&mut self, value: Array2<f64>) -> NodeId {
        self.leaf(value, false)
    }

    pub fn scalar(&mut self, x: f64) -> NodeId {
        self.constant(Array2::from_elem((1, 1), x))
    }

    /// Replaces a leaf value. The shape must match the declared one.
    pub fn set_value(&mut self, id: NodeId, value: Array2<f64>) -> Result<(), AutodiffError> {
        let declared = self.shape(id);
        if value.dim() != declared {
            return Err(AutodiffError::ShapeMismatch {
                op: "set_value",
                left: self.label(id),
                right: "input".to_string(),
                left_shape: declared,
                right_shape: value.dim(),
            });
        }
        self.nodes[id.0].value = value;
        Ok(())
    }

    /// Re-evaluates every non-leaf node from the current leaf values.
    pub fn forward(&mut self) -> Result<(), AutodiffError> {
        for i in 0..self.nodes.len() {
            let op = self.nodes[i].op;
            if op != Op::Leaf {
                let value = self.eval(op)?;
                self.nodes[i].value = value;
            }
        }
        Ok(())
    }

    /// Clears accumulated gradients back to zero.
    pub fn reset_grads(&mut self) {
        for node in &mut self.nodes {
            if let Some(g) = node.grad.as_mut() {
                g.fill(0.0);
            }
        }
    }

    // ---- recording ----

    fn record(&mut self, op: Op) -> Result<NodeId, AutodiffError> {
        let value = self.eval(op)?;
        let requires_grad = !self.frozen
            && op.propagates_grad()
            && op.parents().any(|p| self.nodes[p.0].requires_grad);
        Ok(self.push(value, op, requires_grad, None))
    }

    fn mismatch(&self, op: &'static str, a: NodeId, b: NodeId) -> AutodiffError {
        AutodiffError::ShapeMismatch {
            op,
            left: self.label(a),
            right: self.label(b),
            left_shape: self.shape(a),
            right_shape: self.shape(b),
        }
    }

    fn target_mismatch(&self, op: &'static str, x: NodeId, to: Shape) -> AutodiffError {
        AutodiffError::ShapeMismatch {
            op,
            left: self.label(x),
            right: "target".to_string(),
            left_shape: self.shape(x),
            right_shape: to,
        }
    }

    fn binary(&self, name: &'static str, a: NodeId, b: NodeId) -> Result<(&Array2<f64>, &Array2<f64>), AutodiffError> {
        let (va, vb) = (self.value(a), self.value(b));
        if broadcast_shape(va.dim(), vb.dim()).is_none() {
            return Err(self.mismatch(name, a, b));
        }
        Ok((va, vb))
    }

    fn eval(&self, op: Op) -> Result<Array2<f64>, AutodiffError> {
        let map = |x: NodeId, f: &dyn Fn(f64) -> f64| self.value(x).mapv(f);
        Ok(match op {
            Op::Leaf => unreachable!("leaves are never re-evaluated"),
            Op::MatMul { a, b, ta, tb } => {
                let va = if ta { self.value(a).t() } else { self.value(a).view() };
                let vb = if tb { self.value(b).t() } else { self.value(b).view() };
                if va.ncols() != vb.nrows() {
                    return Err(self.mismatch("matmul", a, b));
                }
                va.dot(&vb)
            }
            Op::Add(a, b) => {
                let (va, vb) = self.binary("add", a, b)?;
                va + vb
            }
            Op::Sub(a, b) => {
                let (va, vb) = self.binary("sub", a, b)?;
                va - vb
            }
            Op::Mul(a, b) => {
                let (va, vb) = self.binary("mul", a, b)?;
                va * vb
            }
            Op::Neg(x) => map(x, &|v| -v),
            Op::Scale(x, c) => map(x, &|v| v * c),
            Op::Offset(x, c) => map(x, &|v| v + c),
            Op::Recip(x) => map(x, &|v| 1.0 / v),
            Op::Exp(x) => map(x, &f64::exp),
            Op::Log(x) => map(x, &f64::ln),
            Op::Relu(x) => map(x, &|v| if v > 0.0 { v } else { 0.0 }),
            Op::Sigmoid(x) => map(x, &stable_sigmoid),
            Op::Softplus(x) => map(x, &stable_softplus),
            Op::Clamp { x, lo, hi } => map(x, &|v| v.clamp(lo, hi)),
            Op::Expand { x, to } => match self.value(x).broadcast(to) {
                Some(v) => v.to_owned(),
                None => return Err(self.target_mismatch("expand", x, to)),
            },
            Op::SumTo { x, to } => {
                if !reducible(self.shape(x), to) {
                    return Err(self.target_mismatch("sum_to", x, to));
                }
                sum_to(self.value(x), to)
            }
            Op::LogSumExpRows(x) => {
                let v = self.value(x);
                let mut out = Array2::zeros((v.nrows(), 1));
                for (row, o) in v.rows().into_iter().zip(out.iter_mut()) {
                    let m = row.fold(f64::NEG_INFINITY, |acc, &e| acc.max(e));
                    let s: f64 = row.iter().map(|&e| (e - m).exp()).sum();
                    *o = m + s.ln();
                }
                out
            }
            Op::ReluMask(x) => map(x, &|v| if v > 0.0 { 1.0 } else { 0.0 }),
            Op::ClampMask { x, lo, hi } => map(x, &|v| if v > lo && v < hi { 1.0 } else { 0.0 }),
            Op::Detach(x) => self.value(x).clone(),
        })
    }

    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, AutodiffError> {
        self.record(Op::MatMul { a, b, ta: false, tb: false })
    }

    /// `op(a) · op(b)` with optional transposes, without materializing them.
    pub fn matmul_t(&mut self, a: NodeId, b: NodeId, ta: bool, tb: bool) -> Result<NodeId, AutodiffError> {
        self.record(Op::MatMul { a, b, ta, tb })
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, AutodiffError> {
        self.record(Op::Add(a, b))
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, AutodiffError> {
        self.record(Op::Sub(a, b))
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, AutodiffError> {
        self.record(Op::Mul(a, b))
    }

    pub fn div(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, AutodiffError> {
        let r = self.recip(b)?;
        self.mul(a, r)
    }

    pub fn square(&mut self, x: NodeId) -> Result<NodeId, AutodiffError> {
        self.mul(x, x)
    }

    pub fn neg(&mut self, x: NodeId) -> Result<NodeId, AutodiffError> {
        self.record(Op::Neg(x))
    }

    pub fn scale(&mut self, x: NodeId, c: f64) -> Result<NodeId, AutodiffError> {
        self.record(Op::Scale(x, c))
    }

    pub fn offset(&mut self, x: NodeId, c: f64) -> Result<NodeId, AutodiffError> {
        self.record(Op::Offset(x, c))
    }

    pub fn recip(&mut self, x: NodeId) -> Result<NodeId, AutodiffError> {
        self.record(Op::Recip(x))
    }

    pub fn exp(&mut self, x: NodeId) -> Result<NodeId, AutodiffError> {
        self.record(Op::Exp(x))
    }

    pub fn log(&mut self, x: NodeId) -> Result<NodeId, AutodiffError> {
        self.record(Op::Log(x))
    }

    pub fn relu(&mut self, x: NodeId) -> Result<NodeId, AutodiffError> {
        self.record(Op::Relu(x))
    }

    pub fn sigmoid(&mut self, x: NodeId) -> Result<NodeId, AutodiffError> {
        self.record(Op::Sigmoid(x))
    }

    pub fn softplus(&mut self, x: NodeId) -> Result<NodeId, AutodiffError> {
        self.record(Op::Softplus(x))
    }

    pub fn clamp(&mut self, x: NodeId, lo: f64, hi: f64) -> Result<NodeId, AutodiffError> {
        self.record(Op::Clamp { x, lo, hi })
    }

    pub fn expand(&mut self, x: NodeId, to: Shape) -> Result<NodeId, AutodiffError> {
        if self.shape(x) == to {
            return Ok(x);
        }
        self.record(Op::Expand { x, to })
    }

    pub fn sum_to(&mut self, x: NodeId, to: Shape) -> Result<NodeId, AutodiffError> {
        if self.shape(x) == to {
            return Ok(x);
        }
        self.record(Op::SumTo { x, to })
    }

    pub fn sum_all(&mut self, x: NodeId) -> Result<NodeId, AutodiffError> {
        self.sum_to(x, (1, 1))
    }

    pub fn mean_all(&mut self, x: NodeId) -> Result<NodeId, AutodiffError> {
        let (r, c) = self.shape(x);
        let s = self.sum_all(x)?;
        self.scale(s, 1.0 / (r * c) as f64)
    }

    /// Sum across columns within each row: `(n, m) -> (n, 1)`.
    pub fn row_sums(&mut self, x: NodeId) -> Result<NodeId, AutodiffError> {
        let n = self.shape(x).0;
        self.sum_to(x, (n, 1))
    }

    /// Sum across rows within each column: `(n, m) -> (1, m)`.
    pub fn col_sums(&mut self, x: NodeId) -> Result<NodeId, AutodiffError> {
        let m = self.shape(x).1;
        self.sum_to(x, (1, m))
    }

    pub fn log_sum_exp_rows(&mut self, x: NodeId) -> Result<NodeId, AutodiffError> {
        self.record(Op::LogSumExpRows(x))
    }

    pub fn relu_mask(&mut self, x: NodeId) -> Result<NodeId, AutodiffError> {
        self.record(Op::ReluMask(x))
    }

    pub fn clamp_mask(&mut self, x: NodeId, lo: f64, hi: f64) -> Result<NodeId, AutodiffError> {
        self.record(Op::ClampMask { x, lo, hi })
    }

    pub fn detach(&mut self, x: NodeId) -> Result<NodeId, AutodiffError> {
        self.record(Op::Detach(x))
    }

    /// Row-wise softmax, `exp(x - logsumexp(x))`.
    pub fn softmax_rows(&mut self, x: NodeId) -> Result<NodeId, AutodiffError> {
        let lse = self.log_sum_exp_rows(x)?;
        let shifted = self.sub(x, lse)?;
        self.exp(shifted)
    }
}
