use ndarray::{Array2, ArrayView2};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use super::config::{DatasetKind, TrainConfig};
use super::objective::{batch_rows, Batch, Objective};
use super::record::EpochRecord;
use super::rng::{derive_seed, stream};
use super::HarnessError;
use crate::autodiff::{GradMode, Tape};
use crate::data::{gen_swiss_roll, gen_torus, load_feature_csv, split_indices, standardize, Dataset};
use crate::geometry::{draw_probes, hessian_curvature, participation_ratio, ProbeConfig};
use crate::infometrics::{
    accuracy, alignment_probe, cross_entropy, interpretive_efficiency, label_entropy, mi_surrogate,
};
use crate::nets::{clip_global_norm, AdamConfig, AdamState, ClassifierSpec, EncoderSpec, NetsError, VgibModel};

pub(crate) const CLIP_NORM: f64 = 10.0;
pub(crate) const ALIGN_BINS: usize = 6;
const HESS_POINTS: usize = 64;
const HESS_PROBES: usize = 4;

/// Standardized train/test splits plus alignment concepts.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub train: Dataset,
    pub test: Dataset,
    pub train_concepts: Vec<usize>,
    pub test_concepts: Vec<usize>,
    pub classes: usize,
}

/// Generates or loads the dataset named by `config`, splits it, keeps the
/// first `train_fraction` of a seeded permutation of the training split
/// (so smaller fractions are nested in larger ones), and standardizes with
/// training statistics.
pub fn prepare_data(config: &TrainConfig) -> Result<PreparedData, HarnessError> {
    config.validate()?;
    let data_seed = derive_seed(config.seed, "data");
    let full = match config.dataset {
        DatasetKind::SwissRoll => gen_swiss_roll(config.n_samples, config.sigma, data_seed)?,
        DatasetKind::Torus => gen_torus(config.n_samples, 2.0, 0.5, config.sigma, data_seed)?,
        DatasetKind::Csv => load_feature_csv(config.data_path.as_deref().expect("validated"))?,
    };
    let concepts = full.concept_bins(ALIGN_BINS);
    let (mut train_idx, test_idx) = split_indices(full.len(), config.test_frac, derive_seed(config.seed, "split"))?;
    if config.train_fraction < 1.0 {
        train_idx.shuffle(&mut stream(config.seed, "fraction"));
        let keep = ((train_idx.len() as f64 * config.train_fraction).round() as usize).max(1);
        train_idx.truncate(keep);
    }
    if train_idx.is_empty() || test_idx.is_empty() {
        return Err(HarnessError::Config("split leaves an empty train or test set".into()));
    }
    let (train, others, _) = standardize(&full.subset(&train_idx), &[&full.subset(&test_idx)])?;
    let test = others.into_iter().next().expect("one other set");
    let classes = full.meta.classes.max(full.labels.iter().copied().max().map_or(0, |m| m + 1));
    Ok(PreparedData {
        train,
        test,
        train_concepts: train_idx.iter().map(|&i| concepts[i]).collect(),
        test_concepts: test_idx.iter().map(|&i| concepts[i]).collect(),
        classes,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Completed,
    /// A non-finite loss, gradient, or evaluation value stopped the run.
    Diverged { epoch: usize, reason: String },
}

#[derive(Debug, Clone)]
pub struct TrainRun {
    pub config: TrainConfig,
    pub records: Vec<EpochRecord>,
    pub model: VgibModel,
    pub status: RunStatus,
}

/// Test accuracy and cross-entropy of the classifier applied to the posterior means.
pub fn evaluate(model: &VgibModel, x: ArrayView2<f64>, labels: &[usize]) -> Result<(f64, f64), HarnessError> {
    let (mu, _) = model.encoder.encode_batch(x)?;
    let logits = model.classifier.logits_batch(mu.view());
    Ok((accuracy(logits.view(), labels)?, cross_entropy(logits.view(), labels)?))
}

pub(crate) fn model_specs(config: &TrainConfig, input_dim: usize, classes: usize) -> (EncoderSpec, ClassifierSpec) {
    let mut enc = EncoderSpec::standard(input_dim, config.z_dim);
    enc.activation = config.activation.into();
    let mut cls = ClassifierSpec::standard(config.z_dim);
    cls.classes = classes;
    (enc, cls)
}

/// Runs the full training procedure for `config` on freshly prepared data.
pub fn train(config: &TrainConfig) -> Result<TrainRun, HarnessError> {
    let data = prepare_data(config)?;
    train_on(config, &data)
}

/// Minibatch Adam on `CE + β·KL + γ·penalty (− λ·alignment)`; one record per epoch.
pub fn train_on(config: &TrainConfig, data: &PreparedData) -> Result<TrainRun, HarnessError> {
    config.validate()?;
    let n_train = data.train.len();
    if config.batch > n_train {
        return Err(HarnessError::Config(format!(
            "batch {} exceeds training set size {n_train}",
            config.batch
        )));
    }
    let dim = data.train.dim();
    let (enc_spec, cls_spec) = model_specs(config, dim, data.classes);
    let mut model = VgibModel::init(&enc_spec, &cls_spec, derive_seed(config.seed, "init"));
    let mut adam = AdamState::new(
        AdamConfig {
            lr: config.lr,
            ..AdamConfig::default()
        },
        &model.parameters(),
    );
    let objective = Objective {
        beta: config.beta,
        gamma: config.gamma,
        lambda_align: config.lambda_align,
        penalize: config.penalized(),
        classes: data.classes,
        align_bins: ALIGN_BINS,
    };
    let mut shuffle_rng = stream(config.seed, "shuffle");
    let mut eps_rng = stream(config.seed, "eps");
    let mut probe_rng = stream(config.seed, "probes");
    let test_entropy = label_entropy(&data.test.labels);
    let hess_rows: Vec<usize> = (0..data.test.len().min(HESS_POINTS)).collect();
    let hess_x = batch_rows(data.test.features.view(), &hess_rows);

    let mut records = Vec::with_capacity(config.epochs);
    let mut order: Vec<usize> = (0..n_train).collect();
    let diverged = |records: Vec<EpochRecord>, model: VgibModel, epoch: usize, reason: String| TrainRun {
        config: config.clone(),
        records,
        model,
        status: RunStatus::Diverged { epoch, reason },
    };

    for epoch in 1..=config.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut sums = [0.0f64; 4]; // loss, ce, kl, curv
        for chunk in order.chunks(config.batch) {
            let b = chunk.len();
            let eps = Array2::from_shape_simple_fn((b, config.z_dim), || eps_rng.sample(StandardNormal));
            let probes: Vec<Array2<f64>> = (0..config.probes_k)
                .map(|_| draw_probes(config.probe_distribution, b, dim, &mut probe_rng))
                .collect();
            let labels: Vec<usize> = chunk.iter().map(|&i| data.train.labels[i]).collect();
            let concepts: Vec<usize> = chunk.iter().map(|&i| data.train_concepts[i]).collect();

            let mut tape = Tape::new();
            let enc = model.encoder.bind(&mut tape);
            let cls = model.classifier.bind(&mut tape);
            let batch = Batch {
                x: batch_rows(data.train.features.view(), chunk),
                labels: &labels,
                concepts: &concepts,
                eps,
                probes: &probes,
            };
            let terms = match objective.build(&mut tape, &enc, &cls, batch) {
                Ok(t) => t,
                Err(e) => return Ok(diverged(records, model, epoch, e.to_string())),
            };
            let loss = tape.scalar_value(terms.loss);
            if !loss.is_finite() {
                return Ok(diverged(records, model, epoch, format!("non-finite loss {loss}")));
            }
            let mut params = enc.parameters();
            params.extend(cls.parameters());
            let grad_nodes = tape.grad(terms.loss, &params, GradMode::FirstOrder)?;
            let mut grads: Vec<Array2<f64>> = grad_nodes.iter().map(|&g| tape.value(g).clone()).collect();
            clip_global_norm(&mut grads, CLIP_NORM);
            match adam.step(&mut model.parameters_mut(), &grads) {
                Ok(()) => {}
                Err(e @ NetsError::NonFiniteGradient { .. }) => {
                    return Ok(diverged(records, model, epoch, e.to_string()))
                }
                Err(e) => return Err(e.into()),
            }
            let w = b as f64;
            sums[0] += w * loss;
            sums[1] += w * tape.scalar_value(terms.ce);
            sums[2] += w * tape.scalar_value(terms.kl);
            sums[3] += w * tape.scalar_value(terms.curv);
        }
        let n = n_train as f64;
        let (train_loss, ce, kl_mean, curv_jac) = (sums[0] / n, sums[1] / n, sums[2] / n, sums[3] / n);

        let (mu_test, _) = match model.encoder.encode_batch(data.test.features.view()) {
            Ok(v) => v,
            Err(e) => return Ok(diverged(records, model, epoch, e.to_string())),
        };
        let logits = model.classifier.logits_batch(mu_test.view());
        let acc_test = accuracy(logits.view(), &data.test.labels)?;
        let mut rec = EpochRecord {
            epoch,
            seed: config.seed,
            beta: config.beta,
            gamma: config.gamma,
            z_dim: config.z_dim,
            sigma: config.sigma,
            train_loss,
            ce,
            kl_mean,
            curv_jac,
            acc_test,
            ..EpochRecord::default()
        };
        if epoch % config.eval_every == 0 || epoch == config.epochs {
            let ce_test = cross_entropy(logits.view(), &data.test.labels)?;
            let mi = mi_surrogate(ce_test, test_entropy);
            let pr = participation_ratio(mu_test.view())?;
            let align = alignment_probe(mu_test.view(), &data.test_concepts, ALIGN_BINS)?;
            let probes = ProbeConfig {
                k: HESS_PROBES,
                distribution: config.probe_distribution,
                seed: derive_seed(config.seed, "hessian") ^ epoch as u64,
            };
            let hess = hessian_curvature(&model.encoder, hess_x.view(), &probes)?;
            rec.curv_hess = Some(hess);
            rec.pr_dim = Some(pr);
            rec.align_mi = Some(align);
            rec.mi_surrogate = Some(mi);
            rec.efficiency = Some(interpretive_efficiency(mi, curv_jac, pr, config.beta, config.gamma, n_train));
        }
        let finite = [rec.train_loss, rec.ce, rec.kl_mean, rec.curv_jac, rec.acc_test]
            .iter()
            .chain(rec.mi_surrogate.iter())
            .chain(rec.curv_hess.iter())
            .all(|v| v.is_finite());
        records.push(rec);
        if !finite {
            return Ok(diverged(records, model, epoch, "non-finite epoch metric".into()));
        }
    }
    Ok(TrainRun {
        config: config.clone(),
        records,
        model,
        status: RunStatus::Completed,
    })
}
