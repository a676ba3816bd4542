use rayon::prelude::*;

use super::analytics::{eta_eff, isotonic_increasing, EtaArm};
use super::config::TrainConfig;
use super::train::{prepare_data, train_on, RunStatus};
use super::HarnessError;

pub const DEFAULT_FRACTIONS: [f64; 5] = [0.2, 0.4, 0.6, 0.8, 1.0];

/// Seed-averaged final accuracy of both arms at one training fraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaRow {
    pub sigma: f64,
    pub fraction: f64,
    pub n_train: usize,
    pub acc_baseline: f64,
    pub acc_regularized: f64,
}

#[derive(Debug, Clone)]
pub struct EtaSigma {
    pub sigma: f64,
    /// 0.9 × the best monotonized baseline accuracy.
    pub target: f64,
    /// Training-set size at which each arm reaches `target`.
    pub n_baseline: Result<f64, String>,
    pub n_regularized: Result<f64, String>,
    /// `Err` holds the reason η could not be formed (e.g. unreachable target).
    pub eta: Result<f64, String>,
}

#[derive(Debug, Clone)]
pub struct EtaReport {
    pub gamma: f64,
    pub rows: Vec<EtaRow>,
    pub per_sigma: Vec<EtaSigma>,
}

impl EtaReport {
    /// Mean η over the noise levels where it is defined.
    pub fn mean(&self) -> Option<f64> {
        let ok: Vec<f64> = self.per_sigma.iter().filter_map(|s| s.eta.as_ref().ok().copied()).collect();
        (!ok.is_empty()).then(|| ok.iter().sum::<f64>() / ok.len() as f64)
    }

    /// True when every noise level has both arms crossing the target at the
    /// smallest training size, which forces η = 1 whatever the curves do above it.
    pub fn at_grid_floor(&self) -> bool {
        self.per_sigma.iter().all(|s| {
            let first = self
                .rows
                .iter()
                .filter(|r| r.sigma == s.sigma)
                .map(|r| r.n_train as f64)
                .fold(f64::INFINITY, f64::min);
            s.n_baseline.as_ref().is_ok_and(|&n| n == first) && s.n_regularized.as_ref().is_ok_and(|&n| n == first)
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("sigma,fraction,n_train,acc_baseline,acc_regularized\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.sigma, r.fraction, r.n_train, r.acc_baseline, r.acc_regularized
            ));
        }
        out
    }

    /// Human-readable η summary; when the mean falls below 1 it also says
    /// where the regularized arm lost ground.
    pub fn diagnosis(&self) -> String {
        let mut out = String::new();
        for s in &self.per_sigma {
            match &s.eta {
                Ok(e) => out.push_str(&format!("sigma {}: eta_eff = {e:.4}\n", s.sigma)),
                Err(m) => out.push_str(&format!("sigma {}: eta_eff undefined ({m})\n", s.sigma)),
            }
        }
        let mean = self.mean();
        match mean {
            Some(m) => out.push_str(&format!("mean eta_eff = {m:.4}\n")),
            None => out.push_str("mean eta_eff undefined\n"),
        }
        let floor = self.at_grid_floor();
        if mean.is_none_or(|m| m < 1.0) || floor {
            if floor {
                out.push_str(
                    "\nDiagnosis: both arms already reach the target at the smallest training fraction for every\n\
                     noise level, so eta_eff = 1 is forced by the grid and says nothing about sample efficiency.\n",
                );
            } else {
                out.push_str(&format!(
                    "\nDiagnosis: the gamma = {} arm does not reach 90% of the best baseline accuracy with fewer samples.\n",
                    self.gamma
                ));
            }
            for r in &self.rows {
                out.push_str(&format!(
                    "  sigma {} fraction {} (N = {}): baseline {:.4}, regularized {:.4}, difference {:+.4}\n",
                    r.sigma,
                    r.fraction,
                    r.n_train,
                    r.acc_baseline,
                    r.acc_regularized,
                    r.acc_regularized - r.acc_baseline
                ));
            }
            for s in &self.per_sigma {
                let show = |r: &Result<f64, String>| match r {
                    Ok(n) => format!("N = {n:.1}"),
                    Err(m) => m.clone(),
                };
                out.push_str(&format!(
                    "  sigma {}: target {:.4}; baseline reaches it at {}, regularized at {}\n",
                    s.sigma,
                    s.target,
                    show(&s.n_baseline),
                    show(&s.n_regularized)
                ));
            }
        }
        out
    }
}

/// Trains the `γ = 0` arm and the `γ = gamma` arm of `base` on nested
/// training fractions, for each σ, averaging final test accuracy over `seeds`.
pub fn eta_experiment(
    base: &TrainConfig,
    gamma: f64,
    sigmas: &[f64],
    fractions: &[f64],
    seeds: &[u64],
) -> Result<EtaReport, HarnessError> {
    if sigmas.is_empty() || fractions.is_empty() || seeds.is_empty() {
        return Err(HarnessError::Config("eta experiment needs sigmas, fractions and seeds".into()));
    }
    let mut jobs = Vec::new();
    for &sigma in sigmas {
        for &fraction in fractions {
            for &seed in seeds {
                for g in [0.0, gamma] {
                    let mut c = base.clone();
                    c.sigma = sigma;
                    c.train_fraction = fraction;
                    c.seed = seed;
                    c.gamma = g;
                    c.validate()?;
                    jobs.push(c);
                }
            }
        }
    }
    let results: Vec<Result<(usize, f64), HarnessError>> = jobs
        .par_iter()
        .map(|c| {
            let data = prepare_data(c)?;
            let run = train_on(c, &data)?;
            if let RunStatus::Diverged { epoch, reason } = run.status {
                return Err(HarnessError::Analytics(format!("run diverged at epoch {epoch}: {reason}")));
            }
            let acc = run.records.last().map_or(0.0, |r| r.acc_test);
            Ok((data.train.len(), acc))
        })
        .collect();

    let k = seeds.len() as f64;
    let mut rows = Vec::new();
    let mut it = results.into_iter();
    for &sigma in sigmas {
        for &fraction in fractions {
            let (mut n_train, mut a0, mut a1) = (0, 0.0, 0.0);
            for _ in seeds {
                let (n, acc0) = it.next().expect("one result per job")?;
                let (_, acc1) = it.next().expect("one result per job")?;
                n_train = n;
                a0 += acc0 / k;
                a1 += acc1 / k;
            }
            rows.push(EtaRow {
                sigma,
                fraction,
                n_train,
                acc_baseline: a0,
                acc_regularized: a1,
            });
        }
    }
    let per_sigma = sigmas
        .iter()
        .map(|&sigma| {
            let pts = |f: fn(&EtaRow) -> f64| -> Vec<(f64, f64)> {
                rows.iter()
                    .filter(|r| r.sigma == sigma)
                    .map(|r| (r.n_train as f64, f(r)))
                    .collect()
            };
            let b = EtaArm::new("baseline (gamma = 0)", &pts(|r| r.acc_baseline));
            let g = EtaArm::new(format!("regularized (gamma = {gamma})"), &pts(|r| r.acc_regularized));
            let target = 0.9 * isotonic_increasing(&b.acc).into_iter().fold(f64::NEG_INFINITY, f64::max);
            EtaSigma {
                sigma,
                target,
                n_baseline: b.crossing(target).map_err(|e| e.to_string()),
                n_regularized: g.crossing(target).map_err(|e| e.to_string()),
                eta: eta_eff(&b, &g).map_err(|e| e.to_string()),
            }
        })
        .collect();
    Ok(EtaReport { gamma, rows, per_sigma })
}
