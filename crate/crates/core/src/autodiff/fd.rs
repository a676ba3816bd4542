//! Central finite differences. Test oracles only; the step `h` trades
//! truncation error `O(h²)` against cancellation error `O(ε/h)`.

/// Central-difference gradient of a scalar function.
pub fn fd_grad(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    assert!(h > 0.0, "step must be positive");
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Central-difference directional derivative `J(x) v` of a vector function.
pub fn fd_jvp(f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64], v: &[f64], h: f64) -> Vec<f64> {
    assert!(h > 0.0, "step must be positive");
    assert_eq!(x.len(), v.len());
    let up: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + h * b).collect();
    let down: Vec<f64> = x.iter().zip(v).map(|(a, b)| a - h * b).collect();
    f(&up)
        .iter()
        .zip(f(&down))
        .map(|(a, b)| (a - b) / (2.0 * h))
        .collect()
}

/// `H(x) v` as the central difference of the gradient map along `v`.
pub fn fd_hvp(grad: impl Fn(&[f64]) -> Vec<f64>, x: &[f64], v: &[f64], h: f64) -> Vec<f64> {
    fd_jvp(grad, x, v, h)
}
