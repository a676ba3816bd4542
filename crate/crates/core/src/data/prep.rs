use ndarray::{Array1, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{DataError, Dataset};

const STD_FLOOR: f64 = 1e-12;

/// Per-feature affine map fitted on a training set.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaler {
    pub mean: Array1<f64>,
    pub std: Array1<f64>,
}

impl Scaler {
    pub fn fit(train: &Dataset) -> Result<Self, DataError> {
        if train.is_empty() {
            return Err(DataError::Empty);
        }
        let x = &train.features;
        let mut mean = x.mean_axis(Axis(0)).expect("non-empty");
        let mut std = x.std_axis(Axis(0), 0.0);
        for (j, col) in x.axis_iter(Axis(1)).enumerate() {
            let first = col[0];
            if col.iter().all(|&v| v == first) {
                // exact, so the constant maps to exactly zero
                mean[j] = first;
                std[j] = 0.0;
            }
        }
        std.mapv_inplace(|s| s.max(STD_FLOOR));
        Ok(Self { mean, std })
    }

    pub fn transform(&self, data: &Dataset) -> Dataset {
        let mut out = data.clone();
        out.features = (&data.features - &self.mean) / &self.std;
        out
    }
}

/// Fits a [`Scaler`] on `train` and applies it to `train` and every entry of `others`.
pub fn standardize(train: &Dataset, others: &[&Dataset]) -> Result<(Dataset, Vec<Dataset>, Scaler), DataError> {
    let scaler = Scaler::fit(train)?;
    let t = scaler.transform(train);
    let o = others.iter().map(|d| scaler.transform(d)).collect();
    Ok((t, o, scaler))
}

/// Seeded shuffle of `0..n`, cut into `(train, test)` with
/// `round(n · test_frac)` test indices.
pub fn split_indices(n: usize, test_frac: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>), DataError> {
    if !(test_frac > 0.0 && test_frac < 1.0) {
        return Err(DataError::InvalidParameter(format!("test fraction must be in (0, 1), got {test_frac}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_test = ((n as f64 * test_frac).round() as usize).min(n);
    let test = order[..n_test].to_vec();
    let train = order[n_test..].to_vec();
    Ok((train, test))
}

pub fn split(data: &Dataset, test_frac: f64, seed: u64) -> Result<(Dataset, Dataset), DataError> {
    let (train, test) = split_indices(data.len(), test_frac, seed)?;
    Ok((data.subset(&train), data.subset(&test)))
}
