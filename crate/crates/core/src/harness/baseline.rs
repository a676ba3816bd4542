use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use super::config::TrainConfig;
use super::objective::{batch_rows, cross_entropy_on_tape};
use super::rng::{derive_seed, stream};
use super::train::{model_specs, prepare_data, CLIP_NORM};
use super::HarnessError;
use crate::autodiff::{GradMode, Tape};
use crate::infometrics::accuracy;
use crate::nets::{affine, clip_global_norm, reparameterize, AdamConfig, AdamState, Dense, VgibModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineResult {
    /// Test accuracy of the linear head on the frozen random encoder.
    pub acc_test: f64,
    /// Same procedure with shuffled training labels (chance control).
    pub permuted_acc: f64,
}

/// Random linear baseline: the encoder keeps its initialization for this
/// seed (the V-GIB starting point) and only a linear softmax readout of
/// `z` is trained, with the same data, epochs, batch size and learning rate
/// as the matched run. Test accuracy is measured on the posterior means.
pub fn random_baseline(config: &TrainConfig) -> Result<BaselineResult, HarnessError> {
    let data = prepare_data(config)?;
    let (enc_spec, cls_spec) = model_specs(config, data.train.dim(), data.classes);
    let frozen = VgibModel::init(&enc_spec, &cls_spec, derive_seed(config.seed, "init")).encoder;
    let (mu_train, lv_train) = frozen.encode_batch(data.train.features.view())?;
    let (mu_test, _) = frozen.encode_batch(data.test.features.view())?;

    let run = |labels: &[usize], tag: &str| -> Result<f64, HarnessError> {
        let mut head = Dense::init(
            "baseline.head",
            config.z_dim,
            data.classes,
            &mut stream(config.seed, &format!("{tag}-head")),
        );
        fit_head(&mut head, &mu_train, &lv_train, labels, data.classes, config, tag)?;
        let logits = head.forward(mu_test.view());
        Ok(accuracy(logits.view(), &data.test.labels)?)
    };
    let acc_test = run(&data.train.labels, "baseline")?;
    let mut permuted = data.train.labels.clone();
    permuted.shuffle(&mut stream(config.seed, "permute"));
    let permuted_acc = run(&permuted, "baseline-permuted")?;
    Ok(BaselineResult { acc_test, permuted_acc })
}

fn fit_head(
    head: &mut Dense,
    mu: &Array2<f64>,
    logvar: &Array2<f64>,
    labels: &[usize],
    classes: usize,
    config: &TrainConfig,
    tag: &str,
) -> Result<(), HarnessError> {
    let n = mu.nrows();
    let mut adam = AdamState::new(
        AdamConfig {
            lr: config.lr,
            ..AdamConfig::default()
        },
        &[&head.weight, &head.bias],
    );
    let mut shuffle_rng = stream(config.seed, &format!("{tag}-shuffle"));
    let mut eps_rng = stream(config.seed, &format!("{tag}-eps"));
    let mut order: Vec<usize> = (0..n).collect();
    for _ in 0..config.epochs {
        order.shuffle(&mut shuffle_rng);
        for chunk in order.chunks(config.batch) {
            let b = chunk.len();
            let eps = Array2::from_shape_simple_fn((b, config.z_dim), || eps_rng.sample(StandardNormal));
            let z = reparameterize(&batch_rows(mu.view(), chunk), &batch_rows(logvar.view(), chunk), &eps);
            let y: Vec<usize> = chunk.iter().map(|&i| labels[i]).collect();
            let mut tape = Tape::new();
            let (w, bias) = head.bind(&mut tape, true);
            let zn = tape.constant(z);
            let logits = affine(&mut tape, zn, (w, bias))?;
            let loss = cross_entropy_on_tape(&mut tape, logits, &y, classes)?;
            let g = tape.grad(loss, &[w, bias], GradMode::FirstOrder)?;
            let mut grads: Vec<Array2<f64>> = g.iter().map(|&id| tape.value(id).clone()).collect();
            clip_global_norm(&mut grads, CLIP_NORM);
            adam.step(&mut [&mut head.weight, &mut head.bias], &grads)?;
        }
    }
    Ok(())
}
