use ndarray::{Array2, ArrayView2};

use crate::autodiff::{AutodiffError, NodeId, Tape};
use crate::geometry::{jacobian_penalty, GeometryError};
use crate::infometrics::first_principal_axis;
use crate::nets::{reparameterize_on_tape, BoundClassifier, BoundEncoder};

/// Weights of the training objective
/// `CE + β·KL + γ·JacobianPenalty − λ·SoftAlignmentMI`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Objective {
    pub beta: f64,
    pub gamma: f64,
    pub lambda_align: f64,
    /// Whether the Jacobian penalty is part of the differentiated loss.
    /// When false it is still evaluated (for logging) but gets weight 0.
    pub penalize: bool,
    pub classes: usize,
    pub align_bins: usize,
}

/// Nodes of one minibatch objective.
#[derive(Debug, Clone, Copy)]
pub struct ObjectiveTerms {
    pub loss: NodeId,
    pub ce: NodeId,
    pub kl: NodeId,
    pub curv: NodeId,
    pub align: Option<NodeId>,
}

pub struct Batch<'a> {
    pub x: Array2<f64>,
    pub labels: &'a [usize],
    pub concepts: &'a [usize],
    pub eps: Array2<f64>,
    pub probes: &'a [Array2<f64>],
}

impl Objective {
    pub fn build(
        &self,
        tape: &mut Tape,
        encoder: &BoundEncoder,
        classifier: &BoundClassifier,
        batch: Batch<'_>,
    ) -> Result<ObjectiveTerms, GeometryError> {
        let b = batch.x.nrows();
        let x = tape.constant(batch.x);
        let trace = encoder.forward(tape, x)?;
        let eps = tape.constant(batch.eps);
        let z = reparameterize_on_tape(tape, trace.mu, trace.logvar, eps)?;
        let logits = classifier.forward(tape, z)?;
        let ce = cross_entropy_on_tape(tape, logits, batch.labels, self.classes)?;

        let mu2 = tape.square(trace.mu)?;
        let var = tape.exp(trace.logvar)?;
        let t = tape.add(mu2, var)?;
        let t = tape.sub(t, trace.logvar)?;
        let t = tape.offset(t, -1.0)?;
        let t = tape.sum_all(t)?;
        let kl = tape.scale(t, 0.5 / b as f64)?;

        let curv = jacobian_penalty(tape, encoder, &trace, batch.probes)?;

        let weighted_kl = tape.scale(kl, self.beta)?;
        let mut loss = tape.add(ce, weighted_kl)?;
        if self.penalize {
            let weighted = tape.scale(curv, self.gamma)?;
            loss = tape.add(loss, weighted)?;
        }
        let mut align = None;
        if self.lambda_align > 0.0 {
            let mi = soft_alignment_mi(tape, trace.mu, batch.concepts, self.align_bins)?;
            let weighted = tape.scale(mi, -self.lambda_align)?;
            loss = tape.add(loss, weighted)?;
            align = Some(mi);
        }
        Ok(ObjectiveTerms {
            loss,
            ce,
            kl,
            curv,
            align,
        })
    }
}

/// Mean of `logsumexp(logits_i) − logits_i[y_i]`.
pub(crate) fn cross_entropy_on_tape(
    tape: &mut Tape,
    logits: NodeId,
    labels: &[usize],
    classes: usize,
) -> Result<NodeId, AutodiffError> {
    let onehot = tape.constant(one_hot(labels, classes));
    let lse = tape.log_sum_exp_rows(logits)?;
    let picked = tape.mul(logits, onehot)?;
    let picked = tape.row_sums(picked)?;
    let nll = tape.sub(lse, picked)?;
    tape.mean_all(nll)
}

fn one_hot(labels: &[usize], classes: usize) -> Array2<f64> {
    let mut m = Array2::zeros((labels.len(), classes));
    for (i, &y) in labels.iter().enumerate() {
        m[[i, y]] = 1.0;
    }
    m
}

/// Differentiable relaxation of the alignment probe on a batch.
///
/// The latent means are projected on their (detached) first principal axis
/// and standardized; each sample is softly assigned to `q` bins through
/// Gaussian-kernel responsibilities around the empirical bin-center
/// quantiles; the plug-in MI of the soft joint table with the concepts is
/// returned.
pub fn soft_alignment_mi(tape: &mut Tape, mu: NodeId, concepts: &[usize], q: usize) -> Result<NodeId, AutodiffError> {
    let values: Array2<f64> = tape.value(mu).clone();
    let b = values.nrows();
    let axis = first_principal_axis(values.view());
    let scores: Vec<f64> = values
        .rows()
        .into_iter()
        .map(|r| r.iter().zip(&axis).map(|(x, w)| x * w).sum())
        .collect();
    let mean = scores.iter().sum::<f64>() / b as f64;
    let sd = (scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / b as f64).sqrt().max(1e-12);
    let mut sorted: Vec<f64> = scores.iter().map(|s| (s - mean) / sd).collect();
    sorted.sort_by(f64::total_cmp);
    let centers: Vec<f64> = (0..q)
        .map(|k| sorted[(((k as f64 + 0.5) / q as f64) * b as f64) as usize % b])
        .collect();
    let spacing = if q > 1 { (centers[q - 1] - centers[0]) / (q - 1) as f64 } else { 1.0 };
    let h = (0.5 * spacing).max(1e-3);

    let w = tape.constant(Array2::from_shape_vec((axis.len(), 1), axis).expect("axis column"));
    let s = tape.matmul(mu, w)?;
    let s = tape.offset(s, -mean)?;
    let s = tape.scale(s, 1.0 / sd)?;
    let c = tape.constant(Array2::from_shape_vec((1, q), centers).expect("center row"));
    let d = tape.sub(s, c)?;
    let d2 = tape.square(d)?;
    let logits = tape.scale(d2, -1.0 / (2.0 * h * h))?;
    let resp = tape.softmax_rows(logits)?;

    let k = concepts.iter().copied().max().map_or(1, |m| m + 1);
    let onehot = tape.constant(one_hot(concepts, k));
    let joint = tape.matmul_t(resp, onehot, true, false)?;
    let joint = tape.scale(joint, 1.0 / b as f64)?;
    let pb = tape.row_sums(joint)?;
    let pc = tape.col_sums(joint)?;
    const DELTA: f64 = 1e-12;
    let lj = tape.offset(joint, DELTA)?;
    let lj = tape.log(lj)?;
    let lb = tape.offset(pb, DELTA)?;
    let lb = tape.log(lb)?;
    let lc = tape.offset(pc, DELTA)?;
    let lc = tape.log(lc)?;
    let ratio = tape.sub(lj, lb)?;
    let ratio = tape.sub(ratio, lc)?;
    let terms = tape.mul(joint, ratio)?;
    tape.sum_all(terms)
}

pub(crate) fn batch_rows(x: ArrayView2<f64>, idx: &[usize]) -> Array2<f64> {
    x.select(ndarray::Axis(0), idx)
}
