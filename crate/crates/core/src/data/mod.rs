//! Synthetic manifolds, preprocessing, and feature-CSV ingestion.

mod csv_io;
mod generators;
mod prep;

pub use csv_io::{load_feature_csv, read_feature_csv, write_feature_csv};
pub use generators::{bin_labels, bin_uniform, gen_swiss_roll, gen_torus, swiss_roll_point, torus_point};
pub use prep::{split, split_indices, standardize, Scaler};

pub use crate::harness::{load_log_csv, read_log_csv};

use ndarray::Array2;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("no data rows")]
    Empty,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetMeta {
    pub name: String,
    pub sigma: f64,
    pub seed: u64,
    pub classes: usize,
}

/// Features (rows are samples), integer labels, and optionally the
/// generative factor each sample was drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Array2<f64>,
    pub labels: Vec<usize>,
    pub factors: Option<Vec<f64>>,
    pub meta: DatasetMeta,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select(ndarray::Axis(0), indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            factors: self.factors.as_ref().map(|f| indices.iter().map(|&i| f[i]).collect()),
            meta: self.meta.clone(),
        }
    }

    /// Concept labels for alignment: equal-width bins of the factor when one
    /// is present, otherwise the class labels.
    pub fn concept_bins(&self, bins: usize) -> Vec<usize> {
        match &self.factors {
            Some(f) => {
                let lo = f.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                bin_uniform(f, lo, hi, bins)
            }
            None => self.labels.clone(),
        }
    }
}
