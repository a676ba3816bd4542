//! Reverse-mode derivatives of small random MLPs against finite differences.

use ndarray::Array2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vgib::autodiff::fd::{fd_grad, fd_hvp};
use vgib::autodiff::{hvp, value_and_grad, AutodiffError, GradMode, NodeId, Tape};

/// A scalar-valued MLP with softplus hidden layers (smooth, so finite
/// differences are meaningful for second derivatives too).
#[derive(Debug, Clone)]
struct RandomMlp {
    input_dim: usize,
    layers: Vec<(Array2<f64>, Array2<f64>)>,
}

impl RandomMlp {
    fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let input_dim = rng.random_range(1..=8);
        let depth = rng.random_range(1..=3);
        let mut fan_in = input_dim;
        let mut layers = Vec::new();
        for _ in 0..depth {
            let width = rng.random_range(1..=16);
            let w = Array2::from_shape_simple_fn((fan_in, width), || rng.random_range(-1.0..1.0));
            let b = Array2::from_shape_simple_fn((1, width), || rng.random_range(-0.5..0.5));
            layers.push((w, b));
            fan_in = width;
        }
        Self { input_dim, layers }
    }

    fn point(&self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
        (0..self.input_dim).map(|_| rng.random_range(-1.5..1.5)).collect()
    }

    /// `f(x) = ½‖softplus-MLP(x)‖²`.
    fn on_tape(&self, tape: &mut Tape, x: NodeId) -> Result<NodeId, AutodiffError> {
        let mut h = x;
        for (w, b) in &self.layers {
            let w = tape.constant(w.clone());
            let b = tape.constant(b.clone());
            let xw = tape.matmul(h, w)?;
            let pre = tape.add(xw, b)?;
            h = tape.softplus(pre)?;
        }
        let sq = tape.square(h)?;
        let s = tape.sum_all(sq)?;
        tape.scale(s, 0.5)
    }

    fn value(&self, x: &[f64]) -> f64 {
        value_and_grad(|t: &mut Tape, x| self.on_tape(t, x), x).unwrap().0
    }

    fn grad(&self, x: &[f64]) -> Vec<f64> {
        value_and_grad(|t: &mut Tape, x| self.on_tape(t, x), x).unwrap().1
    }

    fn hvp(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        hvp(|t: &mut Tape, x| self.on_tape(t, x), x, v).unwrap()
    }
}

/// Largest componentwise relative error; components far below the vector's
/// scale are compared against that scale instead of their own magnitude.
fn max_rel_err(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().chain(b).fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = (1e-3 * scale).max(1e-12);
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(floor))
        .fold(0.0, f64::max)
}

fn random_direction(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn gradient_matches_central_differences(seed in any::<u64>()) {
        let net = RandomMlp::new(seed);
        let x = net.point(seed);
        let exact = net.grad(&x);
        let approx = fd_grad(|x| net.value(x), &x, 1e-5);
        let err = max_rel_err(&exact, &approx);
        prop_assert!(err < 1e-5, "rel err {err:e} for {net:?}");
    }

    #[test]
    fn hvp_matches_differenced_gradient(seed in any::<u64>()) {
        let net = RandomMlp::new(seed);
        let x = net.point(seed);
        let v = random_direction(net.input_dim, seed.wrapping_add(1));
        let exact = net.hvp(&x, &v);
        let approx = fd_hvp(|x| net.grad(x), &x, &v, 1e-5);
        let err = max_rel_err(&exact, &approx);
        prop_assert!(err < 1e-4, "rel err {err:e}");
    }

    #[test]
    fn hessian_is_symmetric(seed in any::<u64>()) {
        let net = RandomMlp::new(seed);
        let x = net.point(seed);
        let u = random_direction(net.input_dim, seed.wrapping_add(2));
        let w = random_direction(net.input_dim, seed.wrapping_add(3));
        let uhw = dot(&net.hvp(&x, &w), &u);
        let whu = dot(&net.hvp(&x, &u), &w);
        prop_assert!((uhw - whu).abs() < 1e-8, "{uhw} vs {whu}");
    }

    #[test]
    fn rebuilt_graph_gives_identical_gradients(seed in any::<u64>()) {
        let grads = || {
            let net = RandomMlp::new(seed);
            let x = net.point(seed);
            let mut tape = Tape::new();
            let xn = tape.input("x", Array2::from_shape_vec((1, x.len()), x).unwrap(), true);
            let params: Vec<NodeId> = net
                .layers
                .iter()
                .enumerate()
                .map(|(i, (w, _))| tape.param(&format!("w{i}"), w.clone()))
                .collect();
            let mut h = xn;
            for (&w, (_, b)) in params.iter().zip(&net.layers) {
                let b = tape.constant(b.clone());
                let xw = tape.matmul(h, w).unwrap();
                let pre = tape.add(xw, b).unwrap();
                h = tape.softplus(pre).unwrap();
            }
            let out = tape.sum_all(h).unwrap();
            let mut wrt = vec![xn];
            wrt.extend(&params);
            let g = tape.grad(out, &wrt, GradMode::FirstOrder).unwrap();
            g.iter().map(|&id| tape.value(id).clone()).collect::<Vec<_>>()
        };
        let (a, b) = (grads(), grads());
        for (x, y) in a.iter().zip(&b) {
            let bits = |m: &Array2<f64>| m.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
            prop_assert_eq!(bits(x), bits(y));
        }
    }
}
