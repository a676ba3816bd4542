use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::GeometryError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeDistribution {
    /// Independent ±1 entries.
    #[default]
    Rademacher,
    /// Independent standard normal entries.
    Gaussian,
}

impl ProbeDistribution {
    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            ProbeDistribution::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            ProbeDistribution::Gaussian => rng.sample(StandardNormal),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeConfig {
    pub k: usize,
    pub distribution: ProbeDistribution,
    pub seed: u64,
}

impl ProbeConfig {
    pub fn rademacher(k: usize, seed: u64) -> Self {
        Self {
            k,
            distribution: ProbeDistribution::Rademacher,
            seed,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    pub(crate) fn check(&self) -> Result<(), GeometryError> {
        if self.k == 0 {
            Err(GeometryError::NoProbes)
        } else {
            Ok(())
        }
    }
}

/// A `rows × cols` matrix of probe entries.
pub fn draw_probes<R: Rng + ?Sized>(dist: ProbeDistribution, rows: usize, cols: usize, rng: &mut R) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || dist.sample(rng))
}

/// `(1/K) Σ_k ‖A v_k‖²`, an unbiased estimate of `‖A‖²_F`, where `apply`
/// computes `v ↦ A v` for `v` of length `dim`.
pub fn hutchinson_frob(
    mut apply: impl FnMut(&[f64]) -> Vec<f64>,
    dim: usize,
    probes: &ProbeConfig,
) -> Result<f64, GeometryError> {
    probes.check()?;
    let mut rng = probes.rng();
    let mut total = 0.0;
    for _ in 0..probes.k {
        let v: Vec<f64> = (0..dim).map(|_| probes.distribution.sample(&mut rng)).collect();
        let av = apply(&v);
        total += av.iter().map(|x| x * x).sum::<f64>();
    }
    Ok(total / probes.k as f64)
}

/// Average of `‖A v‖²` over all `2^dim` sign vectors, which equals `‖A‖²_F`
/// exactly (the cross terms cancel).
pub fn hutchinson_exhaustive(mut apply: impl FnMut(&[f64]) -> Vec<f64>, dim: usize) -> Result<f64, GeometryError> {
    if dim > 20 {
        return Err(GeometryError::TooManySigns(dim));
    }
    let count = 1u64 << dim;
    let mut total = 0.0;
    let mut v = vec![0.0; dim];
    for mask in 0..count {
        for (i, vi) in v.iter_mut().enumerate() {
            *vi = if mask >> i & 1 == 1 { -1.0 } else { 1.0 };
        }
        total += apply(&v).iter().map(|x| x * x).sum::<f64>();
    }
    Ok(total / count as f64)
}
