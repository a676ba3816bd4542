//! Pure functions over run logs.

use std::collections::BTreeMap;

use super::record::EpochRecord;
use super::HarnessError;
use crate::infometrics::pearson_corr;

/// One β of a sweep, averaged over seeds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParetoPoint {
    pub beta: f64,
    pub mean_curv: f64,
    pub mean_mi: f64,
    pub n_seeds: usize,
    /// True unless the point is on the frontier (duplicates of a frontier
    /// point are folded into it).
    pub dominated: bool,
}

/// Indices of the non-dominated points among `(curvature, mi)` pairs
/// (minimize curvature, maximize MI), one index per distinct point, sorted
/// by curvature.
pub fn pareto_front(points: &[(f64, f64)]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        points[a]
            .0
            .total_cmp(&points[b].0)
            .then(points[b].1.total_cmp(&points[a].1))
            .then(a.cmp(&b))
    });
    let mut best = f64::NEG_INFINITY;
    let mut front = Vec::new();
    for i in order {
        if points[i].1 > best {
            best = points[i].1;
            front.push(i);
        }
    }
    front
}

/// Groups records by β, averages `curv_jac` and `mi_surrogate` over them
/// (records without `mi_surrogate` are ignored), and marks the frontier.
/// Returns all points in increasing β and the frontier sorted by curvature.
pub fn pareto_extract(records: &[EpochRecord]) -> Result<(Vec<ParetoPoint>, Vec<ParetoPoint>), HarnessError> {
    let mut groups: BTreeMap<u64, (f64, f64, usize)> = BTreeMap::new();
    for r in records {
        let Some(mi) = r.mi_surrogate else { continue };
        let e = groups.entry(order_key(r.beta)).or_insert((0.0, 0.0, 0));
        e.0 += r.curv_jac;
        e.1 += mi;
        e.2 += 1;
    }
    if groups.len() < 2 {
        return Err(HarnessError::Analytics(format!(
            "Pareto extraction needs at least 2 distinct beta values, found {}",
            groups.len()
        )));
    }
    let mut points: Vec<ParetoPoint> = groups
        .into_iter()
        .map(|(k, (c, m, n))| ParetoPoint {
            beta: from_order_key(k),
            mean_curv: c / n as f64,
            mean_mi: m / n as f64,
            n_seeds: n,
            dominated: true,
        })
        .collect();
    let pairs: Vec<(f64, f64)> = points.iter().map(|p| (p.mean_curv, p.mean_mi)).collect();
    let front = pareto_front(&pairs);
    for &i in &front {
        points[i].dominated = false;
    }
    let frontier = front.iter().map(|&i| points[i]).collect();
    Ok((points, frontier))
}

// order-preserving map of non-negative finite floats to integers
fn order_key(x: f64) -> u64 {
    let bits = x.to_bits();
    if x.is_sign_negative() {
        !bits
    } else {
        bits | (1 << 63)
    }
}

fn from_order_key(k: u64) -> f64 {
    if k >> 63 == 1 {
        f64::from_bits(k & !(1 << 63))
    } else {
        f64::from_bits(!k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Saturation {
    pub epoch: usize,
    /// False when only the final epoch meets the rule.
    pub saturated: bool,
}

const ROLLING: usize = 5;
const SATURATION_TOL: f64 = 0.01;

/// Smallest epoch whose trailing 5-epoch rolling mean of `acc_test` is
/// within 0.01 of the rolling mean at the last epoch. The first four
/// windows are partial. Needs at least 10 epochs.
pub fn saturation_epoch(records: &[EpochRecord]) -> Result<Saturation, HarnessError> {
    if records.len() < 10 {
        return Err(HarnessError::Analytics(format!(
            "saturation needs at least 10 epochs, got {}",
            records.len()
        )));
    }
    let acc: Vec<f64> = records.iter().map(|r| r.acc_test).collect();
    let rolling: Vec<f64> = (0..acc.len())
        .map(|i| {
            let lo = (i + 1).saturating_sub(ROLLING);
            acc[lo..=i].iter().sum::<f64>() / (i + 1 - lo) as f64
        })
        .collect();
    let last = acc.len() - 1;
    let target = rolling[last];
    let idx = (0..=last)
        .find(|&i| (rolling[i] - target).abs() <= SATURATION_TOL + 1e-12)
        .expect("the last epoch always qualifies");
    Ok(Saturation {
        epoch: records[idx].epoch,
        saturated: idx < last,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencySummary {
    pub epochs: Vec<usize>,
    /// `acc_test / align_mi` per usable epoch.
    pub ratios: Vec<f64>,
    pub mean: f64,
    pub max: f64,
    /// Least-squares slope of ratio against epoch (0 for a single point).
    pub slope: f64,
}

/// Accuracy-to-alignment ratio per epoch. Epochs without a positive
/// `align_mi` are skipped with a warning.
pub fn efficiency_series(records: &[EpochRecord]) -> Result<EfficiencySummary, HarnessError> {
    let mut epochs = Vec::new();
    let mut ratios = Vec::new();
    for r in records {
        match r.align_mi {
            Some(a) if a > 0.0 => {
                epochs.push(r.epoch);
                ratios.push(r.acc_test / a);
            }
            Some(_) => log::warn!("efficiency_series: align_mi is 0 at epoch {}, skipped", r.epoch),
            None => {}
        }
    }
    if ratios.is_empty() {
        return Err(HarnessError::Analytics("no epoch with positive align_mi".into()));
    }
    let n = ratios.len() as f64;
    let mean = ratios.iter().sum::<f64>() / n;
    let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let xs: Vec<f64> = epochs.iter().map(|&e| e as f64).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ratios).map(|(x, y)| (x - mx) * (y - mean)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    Ok(EfficiencySummary {
        epochs,
        ratios,
        mean,
        max,
        slope,
    })
}

/// Accuracy as a function of training-set size for one arm.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaArm {
    pub name: String,
    pub n: Vec<f64>,
    pub acc: Vec<f64>,
}

impl EtaArm {
    pub fn new(name: impl Into<String>, points: &[(f64, f64)]) -> Self {
        let mut pts = points.to_vec();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self {
            name: name.into(),
            n: pts.iter().map(|p| p.0).collect(),
            acc: pts.iter().map(|p| p.1).collect(),
        }
    }

    /// Smallest N at which the monotonized, linearly interpolated curve
    /// reaches `target`.
    pub fn crossing(&self, target: f64) -> Result<f64, HarnessError> {
        let iso = isotonic_increasing(&self.acc);
        let i = iso.iter().position(|&a| a >= target).ok_or_else(|| HarnessError::TargetUnreachable {
            arm: self.name.clone(),
            target,
        })?;
        if i == 0 {
            return Ok(self.n[0]);
        }
        let (n0, n1, a0, a1) = (self.n[i - 1], self.n[i], iso[i - 1], iso[i]);
        Ok(n0 + (target - a0) / (a1 - a0) * (n1 - n0))
    }
}

/// Pool-adjacent-violators fit of a nondecreasing sequence (equal weights).
pub fn isotonic_increasing(y: &[f64]) -> Vec<f64> {
    // blocks of (sum, count)
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(y.len());
    for &v in y {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let (s1, c1) = blocks[blocks.len() - 1];
            let (s0, c0) = blocks[blocks.len() - 2];
            if s0 / c0 as f64 > s1 / c1 as f64 {
                blocks.pop();
                *blocks.last_mut().expect("two blocks") = (s0 + s1, c0 + c1);
            } else {
                break;
            }
        }
    }
    blocks
        .iter()
        .flat_map(|&(s, c)| std::iter::repeat_n(s / c as f64, c))
        .collect()
}

/// Sample-efficiency ratio `N_baseline(target) / N_regularized(target)` with
/// `target = 0.9 ×` the best monotonized baseline accuracy.
pub fn eta_eff(baseline: &EtaArm, regularized: &EtaArm) -> Result<f64, HarnessError> {
    if baseline.n.is_empty() || regularized.n.is_empty() {
        return Err(HarnessError::Analytics("eta_eff needs non-empty arms".into()));
    }
    let best = isotonic_increasing(&baseline.acc)
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    let target = 0.9 * best;
    Ok(baseline.crossing(target)? / regularized.crossing(target)?)
}

pub const CORRELATION_METRICS: [&str; 6] = ["acc_test", "kl_mean", "curv_jac", "train_loss", "align_mi", "efficiency"];

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub names: Vec<String>,
    pub values: Vec<Vec<f64>>,
    pub dropped: Vec<String>,
}

impl CorrelationMatrix {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric");
        for n in &self.names {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        for (n, row) in self.names.iter().zip(&self.values) {
            out.push_str(n);
            for v in row {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Pairwise-complete Pearson correlations between the per-epoch metrics.
/// A metric with zero variance (or fewer than two values) is dropped with a
/// warning; a pair with too few common rows gets NaN.
pub fn correlation_report(records: &[EpochRecord]) -> Result<CorrelationMatrix, HarnessError> {
    let mut names = Vec::new();
    let mut columns: Vec<Vec<Option<f64>>> = Vec::new();
    let mut dropped = Vec::new();
    for m in CORRELATION_METRICS {
        let col: Vec<Option<f64>> = records.iter().map(|r| r.metric(m)).collect();
        let present: Vec<f64> = col.iter().flatten().copied().collect();
        let varies = present.len() >= 2 && present.iter().any(|&v| v != present[0]);
        if varies {
            names.push(m.to_string());
            columns.push(col);
        } else {
            log::warn!("correlation_report: `{m}` has no variance, dropped");
            dropped.push(m.to_string());
        }
    }
    if names.len() < 2 {
        return Err(HarnessError::Analytics(
            "correlation needs at least 2 metrics with variance".into(),
        ));
    }
    let k = names.len();
    let mut values = vec![vec![1.0; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let (a, b): (Vec<f64>, Vec<f64>) = columns[i]
                .iter()
                .zip(&columns[j])
                .filter_map(|(x, y)| Some(((*x)?, (*y)?)))
                .unzip();
            let r = pearson_corr(&a, &b).unwrap_or(f64::NAN);
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    Ok(CorrelationMatrix { names, values, dropped })
}
