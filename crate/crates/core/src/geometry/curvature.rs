use ndarray::{Array2, ArrayView2};

use super::hutchinson::{draw_probes, ProbeConfig};
use super::GeometryError;
use crate::autodiff::{GradMode, NodeId, Tape};
use crate::nets::{BoundEncoder, EncoderParams, EncoderTrace};

/// Curvature proxies of an encoder over a batch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureReport {
    /// Mean Hutchinson estimate of `‖J_μ‖²_F + ‖J_σ‖²_F`.
    pub jacobian_proxy: f64,
    /// Mean Hutchinson estimate of `Σ_j ‖∇²_x μ_j‖²_F`.
    pub hessian_proxy: f64,
    pub probe_count: usize,
    pub sample_count: usize,
}

/// Differentiable Jacobian penalty
/// `(1/(K·B)) Σ_{i,k} ‖J_μ(x_i) v_ik‖² + ‖J_σ(x_i) v_ik‖²`.
///
/// Each entry of `probes` is a `B × D` matrix holding one probe per batch
/// row. `J_σ v = ½ σ ⊙ (J_logvar v)`, so by averaging over the
/// reparameterization noise this is the expected squared Frobenius norm of
/// the Jacobian of `z = μ + σ ⊙ ε`.
pub fn jacobian_penalty(
    tape: &mut Tape,
    encoder: &BoundEncoder,
    trace: &EncoderTrace,
    probes: &[Array2<f64>],
) -> Result<NodeId, GeometryError> {
    if probes.is_empty() {
        return Err(GeometryError::NoProbes);
    }
    let batch = tape.shape(trace.mu).0;
    let half_lv = tape.scale(trace.logvar, 0.5)?;
    let sigma = tape.exp(half_lv)?;
    let half_sigma = tape.scale(sigma, 0.5)?;
    let mut total: Option<NodeId> = None;
    for v in probes {
        let v = tape.constant(v.clone());
        let (t_mu, t_lv) = encoder.tangent(tape, trace, v)?;
        let t_sigma = tape.mul(t_lv, half_sigma)?;
        let a = tape.square(t_mu)?;
        let a = tape.sum_all(a)?;
        let b = tape.square(t_sigma)?;
        let b = tape.sum_all(b)?;
        let term = tape.add(a, b)?;
        total = Some(match total {
            None => term,
            Some(t) => tape.add(t, term)?,
        });
    }
    let total = total.expect("at least one probe");
    Ok(tape.scale(total, 1.0 / (probes.len() * batch) as f64)?)
}

/// Value of [`jacobian_penalty`] with probes drawn from `probes`.
pub fn jacobian_penalty_value(
    encoder: &EncoderParams,
    x: ArrayView2<f64>,
    probes: &ProbeConfig,
) -> Result<f64, GeometryError> {
    probes.check()?;
    check_input(encoder, x.ncols())?;
    let mut rng = probes.rng();
    let vs: Vec<Array2<f64>> = (0..probes.k)
        .map(|_| draw_probes(probes.distribution, x.nrows(), x.ncols(), &mut rng))
        .collect();
    jacobian_penalty_with_probes(encoder, x, &vs)
}

/// Value of [`jacobian_penalty`] for explicit `B × D` probe matrices.
pub fn jacobian_penalty_with_probes(
    encoder: &EncoderParams,
    x: ArrayView2<f64>,
    vs: &[Array2<f64>],
) -> Result<f64, GeometryError> {
    check_input(encoder, x.ncols())?;
    let mut tape = Tape::new();
    let bound = encoder.bind_frozen(&mut tape);
    let xn = tape.constant(x.to_owned());
    let trace = bound.forward(&mut tape, xn)?;
    let pen = jacobian_penalty(&mut tape, &bound, &trace, vs)?;
    Ok(tape.scalar_value(pen))
}

/// Hutchinson estimate of `Σ_j ‖∇²_x μ_j(x)‖²_F`, averaged over the batch:
/// `(1/(K·B)) Σ_{i,k} Σ_j ‖H_j(x_i) v_ik‖²`.
///
/// `H_j v` is obtained as the input gradient of the directional derivative
/// `(J_μ v)_j`. For a relu trunk the directional derivative is piecewise
/// constant in `x`, so the estimate is exactly zero.
pub fn hessian_curvature(encoder: &EncoderParams, x: ArrayView2<f64>, probes: &ProbeConfig) -> Result<f64, GeometryError> {
    probes.check()?;
    let mut rng = probes.rng();
    let vs: Vec<Array2<f64>> = (0..probes.k)
        .map(|_| draw_probes(probes.distribution, x.nrows(), x.ncols(), &mut rng))
        .collect();
    hessian_curvature_with_probes(encoder, x, &vs)
}

/// [`hessian_curvature`] for explicit `B × D` probe matrices.
pub fn hessian_curvature_with_probes(
    encoder: &EncoderParams,
    x: ArrayView2<f64>,
    vs: &[Array2<f64>],
) -> Result<f64, GeometryError> {
    if vs.is_empty() {
        return Err(GeometryError::NoProbes);
    }
    check_input(encoder, x.ncols())?;
    let z_dim = encoder.z_dim();
    let mut tape = Tape::new();
    let bound = encoder.bind_frozen(&mut tape);
    let xn = tape.input("x", x.to_owned(), true);
    let trace = bound.forward(&mut tape, xn)?;
    let mut total = 0.0;
    for v in vs {
        let mark = tape.checkpoint();
        let vn = tape.constant(v.clone());
        let (t_mu, _) = bound.tangent(&mut tape, &trace, vn)?;
        if tape.requires_grad(t_mu) {
            for j in 0..z_dim {
                let inner = tape.checkpoint();
                let mut onehot = Array2::zeros((1, z_dim));
                onehot[[0, j]] = 1.0;
                let sel = tape.constant(onehot);
                let col = tape.mul(t_mu, sel)?;
                let s = tape.sum_all(col)?;
                let g = tape.grad(s, &[xn], GradMode::FirstOrder)?;
                total += tape.value(g[0]).iter().map(|v| v * v).sum::<f64>();
                tape.truncate(inner);
            }
        }
        tape.truncate(mark);
    }
    Ok(total / (vs.len() * x.nrows()) as f64)
}

/// Both curvature proxies, drawing Jacobian and Hessian probes from
/// independent streams derived from `probes.seed`.
pub fn curvature_report(
    encoder: &EncoderParams,
    x: ArrayView2<f64>,
    probes: &ProbeConfig,
) -> Result<CurvatureReport, GeometryError> {
    let jacobian_proxy = jacobian_penalty_value(encoder, x, probes)?;
    let hess_probes = ProbeConfig {
        seed: probes.seed ^ 0x5851_f42d_4c95_7f2d,
        ..*probes
    };
    let hessian_proxy = hessian_curvature(encoder, x, &hess_probes)?;
    Ok(CurvatureReport {
        jacobian_proxy,
        hessian_proxy,
        probe_count: probes.k,
        sample_count: x.nrows(),
    })
}

/// Input Jacobian of the mean head at `x`, shape `z_dim × D`.
pub fn encoder_mu_jacobian(encoder: &EncoderParams, x: &[f64]) -> Result<Array2<f64>, GeometryError> {
    let d = x.len();
    check_input(encoder, d)?;
    let mut tape = Tape::new();
    let bound = encoder.bind_frozen(&mut tape);
    let rows = Array2::from_shape_fn((d, d), |(_, c)| x[c]);
    let xn = tape.constant(rows);
    let trace = bound.forward(&mut tape, xn)?;
    let eye = tape.constant(Array2::eye(d));
    let (t_mu, _) = bound.tangent(&mut tape, &trace, eye)?;
    Ok(tape.value(t_mu).t().to_owned())
}

/// `Σ_j ‖H_j‖²_F` where column `d` of every `H_j` is the central difference
/// `(J(x + h e_d) − J(x − h e_d)) / 2h` of the Jacobian map `jacobian`
/// (which returns `outputs × D`).
pub fn fd_hessian_frob_fn(jacobian: impl Fn(&[f64]) -> Array2<f64>, x: &[f64], h: f64) -> f64 {
    let mut total = 0.0;
    let mut xp = x.to_vec();
    for d in 0..x.len() {
        xp[d] = x[d] + h;
        let plus = jacobian(&xp);
        xp[d] = x[d] - h;
        let minus = jacobian(&xp);
        xp[d] = x[d];
        total += ((plus - minus) / (2.0 * h)).iter().map(|v| v * v).sum::<f64>();
    }
    total
}

/// Finite-difference `Σ_j ‖∇²_x μ_j(x)‖²_F` for one input point.
pub fn fd_hessian_frob(encoder: &EncoderParams, x: &[f64], h: f64) -> Result<f64, GeometryError> {
    check_input(encoder, x.len())?;
    Ok(fd_hessian_frob_fn(
        |p| encoder_mu_jacobian(encoder, p).expect("input dimension checked"),
        x,
        h,
    ))
}

fn check_input(encoder: &EncoderParams, got: usize) -> Result<(), GeometryError> {
    let expected = encoder.input_dim();
    if expected != got {
        return Err(GeometryError::DimensionMismatch { expected, got });
    }
    Ok(())
}
