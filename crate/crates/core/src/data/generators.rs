use std::f64::consts::PI;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{DataError, Dataset, DatasetMeta};

/// Noise-free Swiss-roll point: `r(θ)·(cos θ, sin θ, θ/2)` with
/// `r(θ) = 1 + ½(θ+π)/(2π)`.
pub fn swiss_roll_point(theta: f64) -> [f64; 3] {
    let r = 1.0 + 0.5 * (theta + PI) / (2.0 * PI);
    [r * theta.cos(), r * theta.sin(), r * 0.5 * theta]
}

/// Noise-free torus point for angles `u` (around the axis) and `v` (around the tube).
pub fn torus_point(major: f64, minor: f64, u: f64, v: f64) -> [f64; 3] {
    let ring = major + minor * v.cos();
    [ring * u.cos(), ring * u.sin(), minor * v.sin()]
}

/// `⌊(x − lo)/(hi − lo) · bins⌋`, clamped into `0..bins`.
pub fn bin_uniform(values: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<usize> {
    let width = hi - lo;
    values
        .iter()
        .map(|&x| {
            if width <= 0.0 {
                return 0;
            }
            let b = ((x - lo) / width * bins as f64).floor();
            if b < 0.0 {
                0
            } else {
                (b as usize).min(bins - 1)
            }
        })
        .collect()
}

/// Labels from uniform bins of `θ ∈ [−π, π]`; `θ = π` lands in the last bin.
pub fn bin_labels(theta: &[f64], bins: usize) -> Vec<usize> {
    bin_uniform(theta, -PI, PI, bins)
}

fn add_noise(x: &mut [f64; 3], sigma: f64, rng: &mut ChaCha8Rng) {
    for xi in x.iter_mut() {
        let e: f64 = rng.sample(StandardNormal);
        *xi += sigma * e;
    }
}

/// `n` noisy Swiss-roll samples with 6 angle-bin labels; factors hold `θ`.
pub fn gen_swiss_roll(n: usize, sigma: f64, seed: u64) -> Result<Dataset, DataError> {
    if n == 0 || !(sigma >= 0.0) {
        return Err(DataError::InvalidParameter(format!("swiss roll needs n ≥ 1 and σ ≥ 0 (n={n}, σ={sigma})")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = Array2::zeros((n, 3));
    let mut thetas = Vec::with_capacity(n);
    for mut row in features.rows_mut() {
        let theta = rng.random_range(-PI..=PI);
        let mut x = swiss_roll_point(theta);
        add_noise(&mut x, sigma, &mut rng);
        row.assign(&ndarray::arr1(&x));
        thetas.push(theta);
    }
    Ok(Dataset {
        features,
        labels: bin_labels(&thetas, 6),
        factors: Some(thetas),
        meta: DatasetMeta {
            name: "swiss_roll".into(),
            sigma,
            seed,
            classes: 6,
        },
    })
}

/// `n` noisy torus samples; labels are 6 uniform bins of `u`, which is also the factor.
pub fn gen_torus(n: usize, major: f64, minor: f64, sigma: f64, seed: u64) -> Result<Dataset, DataError> {
    if n == 0 || !(major > minor && minor > 0.0) || !(sigma >= 0.0) {
        return Err(DataError::InvalidParameter(format!(
            "torus needs n ≥ 1, R > r > 0, σ ≥ 0 (n={n}, R={major}, r={minor}, σ={sigma})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = Array2::zeros((n, 3));
    let mut us = Vec::with_capacity(n);
    for mut row in features.rows_mut() {
        let u = rng.random_range(0.0..2.0 * PI);
        let v = rng.random_range(0.0..2.0 * PI);
        let mut x = torus_point(major, minor, u, v);
        add_noise(&mut x, sigma, &mut rng);
        row.assign(&ndarray::arr1(&x));
        us.push(u);
    }
    Ok(Dataset {
        features,
        labels: bin_uniform(&us, 0.0, 2.0 * PI, 6),
        factors: Some(us),
        meta: DatasetMeta {
            name: "torus".into(),
            sigma,
            seed,
            classes: 6,
        },
    })
}
