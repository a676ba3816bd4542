//! Closure-level entry points: gradient, Jacobian-vector and Hessian-vector
//! products of maps written against a [`Tape`].

use ndarray::Array2;

use super::{AutodiffError, GradMode, NodeId, Tape};

/// A differentiable map recorded on a tape. Receives the `(1, n)` input node
/// and returns the output node.
pub trait TapeFn: Fn(&mut Tape, NodeId) -> Result<NodeId, AutodiffError> {}
impl<F> TapeFn for F where F: Fn(&mut Tape, NodeId) -> Result<NodeId, AutodiffError> {}

fn row(v: &[f64]) -> Array2<f64> {
    Array2::from_shape_vec((1, v.len()), v.to_vec()).expect("row vector")
}

fn check_dim(expected: usize, got: usize) -> Result<(), AutodiffError> {
    if expected == got {
        Ok(())
    } else {
        Err(AutodiffError::DimensionMismatch { expected, got })
    }
}

/// Value and gradient of a scalar map at `x`.
pub fn value_and_grad(f: impl TapeFn, x: &[f64]) -> Result<(f64, Vec<f64>), AutodiffError> {
    let mut tape = Tape::new();
    let xn = tape.input("x", row(x), true);
    let y = f(&mut tape, xn)?;
    let value = tape.scalar_value(y);
    if !tape.requires_grad(y) {
        return Ok((value, vec![0.0; x.len()]));
    }
    let g = tape.grad(y, &[xn], GradMode::FirstOrder)?[0];
    Ok((value, tape.value(g).iter().copied().collect()))
}

/// `J_f(x) · v` via the double-vjp construction: `J v = ∇_u ⟨Jᵀu, v⟩`.
pub fn jvp(f: impl TapeFn, x: &[f64], v: &[f64]) -> Result<Vec<f64>, AutodiffError> {
    check_dim(x.len(), v.len())?;
    let mut tape = Tape::new();
    let xn = tape.input("x", row(x), true);
    let y = f(&mut tape, xn)?;
    let out_shape = tape.shape(y);
    let out_len = out_shape.0 * out_shape.1;
    if !tape.requires_grad(y) {
        return Ok(vec![0.0; out_len]);
    }
    let u = tape.input("u", Array2::zeros(out_shape), true);
    let yu = tape.mul(y, u)?;
    let s = tape.sum_all(yu)?;
    let jt_u = tape.grad(s, &[xn], GradMode::SecondOrder)?[0];
    let vn = tape.constant(row(v));
    let prod = tape.mul(jt_u, vn)?;
    let t = tape.sum_all(prod)?;
    if !tape.requires_grad(t) {
        return Ok(vec![0.0; out_len]);
    }
    let jv = tape.grad(t, &[u], GradMode::FirstOrder)?[0];
    Ok(tape.value(jv).iter().copied().collect())
}

/// `H_f(x) · v` for scalar `f`, by differentiating `⟨∇f(x), v⟩`.
pub fn hvp(f: impl TapeFn, x: &[f64], v: &[f64]) -> Result<Vec<f64>, AutodiffError> {
    check_dim(x.len(), v.len())?;
    let mut tape = Tape::new();
    let xn = tape.input("x", row(x), true);
    let y = f(&mut tape, xn)?;
    if !tape.requires_grad(y) {
        return Ok(vec![0.0; x.len()]);
    }
    let g = tape.grad(y, &[xn], GradMode::SecondOrder)?[0];
    let vn = tape.constant(row(v));
    let gv = tape.mul(g, vn)?;
    let s = tape.sum_all(gv)?;
    if !tape.requires_grad(s) {
        return Ok(vec![0.0; x.len()]);
    }
    let hv = tape.grad(s, &[xn], GradMode::FirstOrder)?[0];
    Ok(tape.value(hv).iter().copied().collect())
}
