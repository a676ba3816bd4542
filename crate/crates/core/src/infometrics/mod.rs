//! Information quantities, all in nats.

use ndarray::{Array2, ArrayView2, Axis};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InfoError {
    #[error("label {label} at row {row} is outside 0..{classes}")]
    LabelOutOfRange { row: usize, label: usize, classes: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("empty input")]
    Empty,
    #[error("contingency table has no mass")]
    EmptyTable,
    #[error("contingency table entry ({row}, {col}) is negative or non-finite")]
    BadCount { row: usize, col: usize },
    #[error("series `{0}` has zero variance")]
    ZeroVariance(&'static str),
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("quantization needs at least 2 bins, got {0}")]
    TooFewBins(usize),
}

/// Per-evaluation information summary.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InfoReport {
    pub ce: f64,
    pub kl_mean: f64,
    pub mi_surrogate: f64,
    pub label_entropy: f64,
    pub align_mi: f64,
    pub efficiency: f64,
}

/// Per-row `log softmax(logits)[label]`, via max-shifted log-sum-exp.
pub fn log_likelihoods(logits: ArrayView2<f64>, labels: &[usize]) -> Result<Vec<f64>, InfoError> {
    if logits.nrows() != labels.len() {
        return Err(InfoError::LengthMismatch {
            left: logits.nrows(),
            right: labels.len(),
        });
    }
    let classes = logits.ncols();
    logits
        .rows()
        .into_iter()
        .zip(labels)
        .enumerate()
        .map(|(row, (l, &y))| {
            if y >= classes {
                return Err(InfoError::LabelOutOfRange { row, label: y, classes });
            }
            let max = l.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + l.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
            Ok(l[y] - lse)
        })
        .collect()
}

/// Mean negative log-likelihood of `labels` under `softmax(logits)`.
pub fn cross_entropy(logits: ArrayView2<f64>, labels: &[usize]) -> Result<f64, InfoError> {
    if labels.is_empty() {
        return Err(InfoError::Empty);
    }
    let ll = log_likelihoods(logits, labels)?;
    Ok(-ll.iter().sum::<f64>() / ll.len() as f64)
}

/// Fraction of rows whose arg-max logit equals the label (first index wins ties).
pub fn accuracy(logits: ArrayView2<f64>, labels: &[usize]) -> Result<f64, InfoError> {
    if logits.nrows() != labels.len() {
        return Err(InfoError::LengthMismatch {
            left: logits.nrows(),
            right: labels.len(),
        });
    }
    if labels.is_empty() {
        return Err(InfoError::Empty);
    }
    let hits = logits
        .rows()
        .into_iter()
        .zip(labels)
        .filter(|(l, &y)| argmax(l.iter().copied()) == y)
        .count();
    Ok(hits as f64 / labels.len() as f64)
}

fn argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

/// `KL(N(μ, diag e^logvar) ‖ N(0, I))` averaged over rows.
pub fn kl_diag_gaussian(mu: ArrayView2<f64>, logvar: ArrayView2<f64>) -> f64 {
    let n = mu.nrows().max(1);
    let total: f64 = mu
        .iter()
        .zip(logvar)
        .map(|(&m, &lv)| 0.5 * (m * m + lv.exp() - lv - 1.0))
        .sum();
    total / n as f64
}

/// Plug-in entropy of the empirical label distribution.
pub fn label_entropy(labels: &[usize]) -> f64 {
    let classes = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut counts = vec![0usize; classes];
    for &y in labels {
        counts[y] += 1;
    }
    let n = labels.len() as f64;
    -counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            p * p.ln()
        })
        .sum::<f64>()
}

/// Variational lower bound on `I(Z;Y)`: `Ĥ(Y) − CE`. Not clipped at zero.
pub fn mi_surrogate(ce: f64, label_entropy: f64) -> f64 {
    label_entropy - ce
}

/// Plug-in mutual information of a contingency table of counts.
pub fn discrete_mi(joint: ArrayView2<f64>) -> Result<f64, InfoError> {
    for ((row, col), &c) in joint.indexed_iter() {
        if !(c.is_finite() && c >= 0.0) {
            return Err(InfoError::BadCount { row, col });
        }
    }
    let total = joint.sum();
    if total <= 0.0 {
        return Err(InfoError::EmptyTable);
    }
    let rows = joint.sum_axis(Axis(1));
    let cols = joint.sum_axis(Axis(0));
    let mut mi = 0.0;
    for ((r, c), &n) in joint.indexed_iter() {
        if n > 0.0 {
            // p(h,z) log(p(h,z) / p(h)p(z)) with counts: n/T · log(n·T / (row·col))
            mi += n / total * (n * total / (rows[r] * cols[c])).ln();
        }
    }
    Ok(mi.max(0.0))
}

/// Joint count table of two label sequences.
pub fn contingency(a: &[usize], b: &[usize]) -> Result<Array2<f64>, InfoError> {
    if a.len() != b.len() {
        return Err(InfoError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let ra = a.iter().copied().max().map_or(0, |m| m + 1);
    let rb = b.iter().copied().max().map_or(0, |m| m + 1);
    let mut table = Array2::zeros((ra, rb));
    for (&i, &j) in a.iter().zip(b) {
        table[[i, j]] += 1.0;
    }
    Ok(table)
}

/// `q` equal-frequency bins of `values`: the stable rank `r` (ties by
/// index) goes to bin `⌊r·q/n⌋`.
pub fn equal_frequency_bins(values: &[f64], q: usize) -> Vec<usize> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)));
    let mut bins = vec![0; n];
    for (rank, &i) in order.iter().enumerate() {
        bins[i] = rank * q / n;
    }
    bins
}

/// Unit eigenvector of the largest eigenvalue of the covariance of `latents`
/// (rows are points). The sign is whatever the eigensolver returns.
pub fn first_principal_axis(latents: ArrayView2<f64>) -> Vec<f64> {
    let (n, d) = latents.dim();
    if d == 1 {
        return vec![1.0];
    }
    if n == 0 || d == 0 {
        return vec![0.0; d];
    }
    let mean = latents.mean_axis(Axis(0)).expect("non-empty");
    let centered = &latents - &mean;
    let cov = centered.t().dot(&centered);
    let eig = nalgebra::SymmetricEigen::new(nalgebra::DMatrix::from_fn(d, d, |i, j| cov[[i, j]]));
    let top = (0..d)
        .max_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(b.cmp(&a)))
        .expect("d > 0");
    eig.eigenvectors.column(top).iter().copied().collect()
}

/// Projection of the centered rows of `latents` onto their first principal axis.
pub fn first_principal_scores(latents: ArrayView2<f64>) -> Vec<f64> {
    let n = latents.nrows();
    if n == 0 || latents.ncols() == 0 {
        return vec![0.0; n];
    }
    let axis = first_principal_axis(latents);
    let mean = latents.mean_axis(Axis(0)).expect("non-empty");
    latents
        .rows()
        .into_iter()
        .map(|r| r.iter().zip(&mean).zip(&axis).map(|((x, m), w)| (x - m) * w).sum())
        .collect()
}

/// Alignment between a code and a ground-truth concept: the first principal
/// latent coordinate is cut into `q` equal-frequency bins and its plug-in MI
/// with `factor_bins` is returned.
pub fn alignment_probe(latents: ArrayView2<f64>, factor_bins: &[usize], q: usize) -> Result<f64, InfoError> {
    if q < 2 {
        return Err(InfoError::TooFewBins(q));
    }
    let n = latents.nrows();
    if n != factor_bins.len() {
        return Err(InfoError::LengthMismatch {
            left: n,
            right: factor_bins.len(),
        });
    }
    if n < q {
        return Err(InfoError::TooFewSamples { needed: q, got: n });
    }
    let codes = equal_frequency_bins(&first_principal_scores(latents), q);
    discrete_mi(contingency(&codes, factor_bins)?.view())
}

/// `E(φ; N) = (Î − β(Ĉ + γ·d̂)) / N`.
pub fn interpretive_efficiency(mi_surrogate: f64, curvature: f64, pr_dim: f64, beta: f64, gamma: f64, n: usize) -> f64 {
    (mi_surrogate - beta * (curvature + gamma * pr_dim)) / n as f64
}

/// Pearson correlation coefficient.
pub fn pearson_corr(a: &[f64], b: &[f64]) -> Result<f64, InfoError> {
    if a.len() != b.len() {
        return Err(InfoError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(InfoError::TooFewSamples { needed: 2, got: a.len() });
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 {
        return Err(InfoError::ZeroVariance("a"));
    }
    if sbb == 0.0 {
        return Err(InfoError::ZeroVariance("b"));
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}
