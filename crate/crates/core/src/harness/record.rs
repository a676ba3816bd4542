//! Per-epoch log rows and their CSV form.
//!
//! Floats are written with the shortest representation that parses back to
//! the same value, so reading a log and writing it again is byte-identical.
//! Metrics only computed on evaluation epochs are empty cells elsewhere.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::HarnessError;

pub const LOG_HEADER: &str =
    "epoch,seed,beta,gamma,z_dim,sigma,train_loss,ce,kl_mean,curv_jac,curv_hess,acc_test,pr_dim,align_mi,mi_surrogate,efficiency";

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EpochRecord {
    pub epoch: usize,
    pub seed: u64,
    pub beta: f64,
    pub gamma: f64,
    pub z_dim: usize,
    pub sigma: f64,
    /// Epoch mean of the minibatch objective.
    pub train_loss: f64,
    pub ce: f64,
    pub kl_mean: f64,
    pub curv_jac: f64,
    pub curv_hess: Option<f64>,
    pub acc_test: f64,
    pub pr_dim: Option<f64>,
    pub align_mi: Option<f64>,
    pub mi_surrogate: Option<f64>,
    pub efficiency: Option<f64>,
}

impl EpochRecord {
    pub fn is_eval(&self) -> bool {
        self.mi_surrogate.is_some()
    }

    /// Named numeric field, `None` for an empty cell or an unknown name.
    pub fn metric(&self, name: &str) -> Option<f64> {
        match name {
            "epoch" => Some(self.epoch as f64),
            "beta" => Some(self.beta),
            "gamma" => Some(self.gamma),
            "z_dim" => Some(self.z_dim as f64),
            "sigma" => Some(self.sigma),
            "train_loss" => Some(self.train_loss),
            "ce" => Some(self.ce),
            "kl_mean" => Some(self.kl_mean),
            "curv_jac" => Some(self.curv_jac),
            "curv_hess" => self.curv_hess,
            "acc_test" | "acc" => Some(self.acc_test),
            "pr_dim" => self.pr_dim,
            "align_mi" => self.align_mi,
            "mi_surrogate" => self.mi_surrogate,
            "efficiency" => self.efficiency,
            _ => None,
        }
    }

    fn cells(&self) -> [String; 16] {
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x}"));
        [
            self.epoch.to_string(),
            self.seed.to_string(),
            format!("{}", self.beta),
            format!("{}", self.gamma),
            self.z_dim.to_string(),
            format!("{}", self.sigma),
            format!("{}", self.train_loss),
            format!("{}", self.ce),
            format!("{}", self.kl_mean),
            format!("{}", self.curv_jac),
            opt(self.curv_hess),
            format!("{}", self.acc_test),
            opt(self.pr_dim),
            opt(self.align_mi),
            opt(self.mi_surrogate),
            opt(self.efficiency),
        ]
    }
}

pub fn records_to_csv(records: &[EpochRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(LOG_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.cells().join(","));
        out.push('\n');
    }
    out
}

pub fn write_log_csv(path: &Path, records: &[EpochRecord]) -> Result<(), HarnessError> {
    let mut f = File::create(path)?;
    f.write_all(records_to_csv(records).as_bytes())?;
    Ok(())
}

pub fn read_log_csv<R: Read>(input: R) -> Result<Vec<EpochRecord>, HarnessError> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = r
        .headers()
        .map_err(|e| HarnessError::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    if header.iter().all(|h| h.trim().is_empty()) {
        return Err(HarnessError::Parse {
            line: 1,
            message: "empty log file".into(),
        });
    }
    let cols: Vec<&str> = LOG_HEADER.split(',').collect();
    let mut index = [0usize; 16];
    for (slot, name) in index.iter_mut().zip(&cols) {
        *slot = header
            .iter()
            .position(|h| h.trim() == *name)
            .ok_or_else(|| HarnessError::MissingColumn(name.to_string()))?;
    }

    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| HarnessError::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let cell = |i: usize| rec.get(index[i]).unwrap_or("").trim();
        let err = |i: usize, what: &str| HarnessError::Parse {
            line,
            message: format!("column `{}`: expected {what}, found `{}`", cols[i], cell(i)),
        };
        let int = |i: usize| cell(i).parse::<u64>().map_err(|_| err(i, "an integer"));
        let num = |i: usize| cell(i).parse::<f64>().map_err(|_| err(i, "a number"));
        let opt = |i: usize| {
            if cell(i).is_empty() {
                Ok(None)
            } else {
                num(i).map(Some)
            }
        };
        out.push(EpochRecord {
            epoch: int(0)? as usize,
            seed: int(1)?,
            beta: num(2)?,
            gamma: num(3)?,
            z_dim: int(4)? as usize,
            sigma: num(5)?,
            train_loss: num(6)?,
            ce: num(7)?,
            kl_mean: num(8)?,
            curv_jac: num(9)?,
            curv_hess: opt(10)?,
            acc_test: num(11)?,
            pr_dim: opt(12)?,
            align_mi: opt(13)?,
            mi_surrogate: opt(14)?,
            efficiency: opt(15)?,
        });
    }
    if out.is_empty() {
        return Err(HarnessError::Parse {
            line: 2,
            message: "log has a header but no rows".into(),
        });
    }
    Ok(out)
}

pub fn load_log_csv(path: &Path) -> Result<Vec<EpochRecord>, HarnessError> {
    read_log_csv(File::open(path)?)
}
