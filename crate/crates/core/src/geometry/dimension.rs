use ndarray::{Array2, ArrayView2, Axis};

use super::GeometryError;

/// `(Σλ)² / Σλ²`; an all-zero spectrum counts as one dimension.
pub fn participation_ratio_from_eigenvalues(eigenvalues: &[f64]) -> f64 {
    let sum: f64 = eigenvalues.iter().sum();
    let sum_sq: f64 = eigenvalues.iter().map(|l| l * l).sum();
    if sum_sq == 0.0 {
        1.0
    } else {
        sum * sum / sum_sq
    }
}

/// Participation ratio of the sample covariance of `latents` (rows are points).
///
/// For a symmetric matrix `Σλ = tr C` and `Σλ² = ‖C‖²_F`, so no
/// eigendecomposition is needed.
pub fn participation_ratio(latents: ArrayView2<f64>) -> Result<f64, GeometryError> {
    let n = latents.nrows();
    if n < 2 {
        return Err(GeometryError::TooFewPoints { n, k: 1 });
    }
    Ok(covariance_pr(latents))
}

fn covariance_pr(points: ArrayView2<f64>) -> f64 {
    let n = points.nrows();
    let mean = points.mean_axis(Axis(0)).expect("non-empty");
    let centered = &points - &mean;
    let cov: Array2<f64> = centered.t().dot(&centered) / (n - 1) as f64;
    let trace = cov.diag().sum();
    let frob_sq: f64 = cov.iter().map(|v| v * v).sum();
    if frob_sq == 0.0 {
        1.0
    } else {
        trace * trace / frob_sq
    }
}

fn sq_dist(a: ndarray::ArrayView1<f64>, b: ndarray::ArrayView1<f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Indices and distances of the `k` nearest other points of each point,
/// nearest first. Brute force, `O(n²D)`.
pub fn knn_distances(points: ArrayView2<f64>, k: usize) -> Result<Vec<Vec<(usize, f64)>>, GeometryError> {
    let n = points.nrows();
    if n <= k {
        return Err(GeometryError::TooFewPoints { n, k });
    }
    let mut out = Vec::with_capacity(n);
    let mut buf: Vec<(usize, f64)> = Vec::with_capacity(n);
    for i in 0..n {
        buf.clear();
        let pi = points.row(i);
        buf.extend((0..n).filter(|&j| j != i).map(|j| (j, sq_dist(pi, points.row(j)))));
        buf.select_nth_unstable_by(k - 1, |a, b| a.1.total_cmp(&b.1));
        let mut nearest: Vec<(usize, f64)> = buf[..k].iter().map(|&(j, d)| (j, d.sqrt())).collect();
        nearest.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        out.push(nearest);
    }
    Ok(out)
}

/// Mean local participation ratio: the PR of each point together with its
/// `k` nearest neighbors, averaged over points.
pub fn local_participation_ratio(latents: ArrayView2<f64>, k: usize) -> Result<f64, GeometryError> {
    if k < 2 {
        return Err(GeometryError::NeighborCount(k));
    }
    let neighbors = knn_distances(latents, k)?;
    let d = latents.ncols();
    let mut total = 0.0;
    for (i, nb) in neighbors.iter().enumerate() {
        let mut local = Array2::zeros((k + 1, d));
        local.row_mut(0).assign(&latents.row(i));
        for (r, &(j, _)) in nb.iter().enumerate() {
            local.row_mut(r + 1).assign(&latents.row(j));
        }
        total += covariance_pr(local.view());
    }
    Ok(total / latents.nrows() as f64)
}

/// Levina–Bickel maximum-likelihood intrinsic dimension with pooled
/// aggregation: the per-point statistic `(1/(k−1)) Σ_{j<k} log(T_k/T_j)`
/// (`T_j` the distance to the j-th nearest neighbor) is averaged over points
/// and then inverted. Averaging the per-point inverses instead is biased
/// upward by roughly `(k−1)/(k−2)`.
///
/// Zero distances (duplicate points) are skipped; a point left with fewer
/// than `k` distinct neighbors does not contribute.
pub fn mle_intrinsic_dim(points: ArrayView2<f64>, k: usize) -> Result<f64, GeometryError> {
    if k < 2 {
        return Err(GeometryError::NeighborCount(k));
    }
    let n = points.nrows();
    if n <= k {
        return Err(GeometryError::TooFewPoints { n, k });
    }
    let mut duplicates = 0usize;
    let mut total = 0.0;
    let mut counted = 0usize;
    let mut dists: Vec<f64> = Vec::with_capacity(n);
    for i in 0..n {
        dists.clear();
        let pi = points.row(i);
        for j in (0..n).filter(|&j| j != i) {
            let d = sq_dist(pi, points.row(j));
            if d > 0.0 {
                dists.push(d);
            } else {
                duplicates += 1;
            }
        }
        if dists.len() < k {
            continue;
        }
        dists.select_nth_unstable_by(k - 1, f64::total_cmp);
        let t_k = dists[k - 1].sqrt();
        let log_sum: f64 = dists[..k - 1].iter().map(|d| (t_k / d.sqrt()).ln()).sum();
        total += log_sum / (k - 1) as f64;
        counted += 1;
    }
    if duplicates > 0 {
        log::warn!("mle_intrinsic_dim: skipped {} zero-distance pairs", duplicates / 2);
    }
    if counted == 0 {
        return Err(GeometryError::TooFewPoints { n: 0, k });
    }
    let mean_log = total / counted as f64;
    if mean_log > 0.0 {
        Ok(1.0 / mean_log)
    } else {
        // every point's neighbors are equidistant: no measurable growth rate
        Ok(f64::INFINITY)
    }
}
