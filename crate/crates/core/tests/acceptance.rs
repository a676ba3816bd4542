//! Acceptance criteria 1 to 10. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any hard criterion fails. Criterion 8 is soft: a miss
//! writes a diagnosis next to the report instead of failing.
//!
//! Outputs (logs, report, η tables) go to `$CARGO_TARGET_TMPDIR/acceptance`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use vgib::autodiff::fd::{fd_grad, fd_hvp};
use vgib::autodiff::{hvp, value_and_grad, AutodiffError, NodeId, Tape};
use vgib::geometry::{
    fd_hessian_frob, hessian_curvature_with_probes, hutchinson_exhaustive, hutchinson_frob, participation_ratio,
    ProbeConfig,
};
use vgib::harness::{
    correlation_report, efficiency_series, eta_experiment, pareto_front, random_baseline, read_log_csv,
    records_to_csv, saturation_epoch, sweep, train, write_report, EpochRecord, RunLog, RunStatus, SweepGrid,
    SweepResult, TrainConfig, TrainRun, DEFAULT_FRACTIONS,
};
use vgib::infometrics::{contingency, discrete_mi, kl_diag_gaussian};
use vgib::nets::{Activation, EncoderParams, EncoderSpec};

struct Line {
    id: u8,
    pass: bool,
    soft: bool,
    text: String,
}

fn report_line(l: &Line) {
    let tag = match (l.pass, l.soft) {
        (true, _) => "PASS",
        (false, true) => "SOFT-FAIL",
        (false, false) => "FAIL",
    };
    println!("criterion {:>2} [{tag}] {}", l.id, l.text);
}

fn headline(seed: u64) -> TrainConfig {
    TrainConfig::new(1e-3, 1e-4, 16, 0.05, seed)
}

fn final_record(run: &TrainRun) -> EpochRecord {
    *run.records.last().expect("run has records")
}

fn rel_std(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    var.sqrt() / m.abs()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

// ---------------------------------------------------------------- criterion 5

fn criterion_hutchinson() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for m in 1..=12 {
        for n in [1, 2, 5, 9, 12] {
            let a = Array2::from_shape_simple_fn((m, n), || rng.random_range(-2.0..2.0));
            let frob: f64 = a.iter().map(|x| x * x).sum();
            let est = hutchinson_exhaustive(|v| a.dot(&ndarray::arr1(v)).to_vec(), n).unwrap();
            worst = worst.max((est - frob).abs() / frob);
        }
    }
    let exact_ok = worst < 1e-12;

    let a = Array2::from_shape_simple_fn((6, 6), || rng.random_range(-1.0..1.0));
    let reps = 4000u64;
    let std_for = |k: usize| {
        let est: Vec<f64> = (0..reps)
            .map(|r| {
                hutchinson_frob(
                    |v| a.dot(&ndarray::arr1(v)).to_vec(),
                    6,
                    &ProbeConfig::rademacher(k, 1000 * k as u64 + r),
                )
                .unwrap()
            })
            .collect();
        let m = mean(&est);
        (est.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (reps as f64 - 1.0)).sqrt()
    };
    let s1 = std_for(1);
    let mut ratios = Vec::new();
    for k in [4usize, 16] {
        // observed std reduction relative to the (K)^(-1/2) prediction
        ratios.push((s1 / std_for(k)) / (k as f64).sqrt());
    }
    let scale_ok = ratios.iter().all(|&r| (0.5..=2.0).contains(&r));
    Line {
        id: 5,
        pass: exact_ok && scale_ok,
        soft: false,
        text: format!(
            "Hutchinson: exhaustive max rel err {worst:.1e} over shapes up to 12x12; std ratio / sqrt(K) = {:.3} (K=4), {:.3} (K=16)",
            ratios[0], ratios[1]
        ),
    }
}

// ---------------------------------------------------------------- criterion 6

struct Mlp {
    layers: Vec<(Array2<f64>, Array2<f64>)>,
}

impl Mlp {
    fn new(rng: &mut ChaCha8Rng, dims: &[usize]) -> Self {
        let layers = dims
            .windows(2)
            .map(|w| {
                (
                    Array2::from_shape_simple_fn((w[0], w[1]), || rng.random_range(-1.0..1.0)),
                    Array2::from_shape_simple_fn((1, w[1]), || rng.random_range(-0.5..0.5)),
                )
            })
            .collect();
        Self { layers }
    }

    fn f(&self, tape: &mut Tape, x: NodeId) -> Result<NodeId, AutodiffError> {
        let mut h = x;
        for (w, b) in &self.layers {
            let w = tape.constant(w.clone());
            let b = tape.constant(b.clone());
            let xw = tape.matmul(h, w)?;
            let pre = tape.add(xw, b)?;
            h = tape.softplus(pre)?;
        }
        let sq = tape.square(h)?;
        tape.sum_all(sq)
    }
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
    num / den
}

fn brute_pareto(points: &[(f64, f64)]) -> Vec<usize> {
    let mut out = Vec::new();
    for (i, &(ci, mi)) in points.iter().enumerate() {
        let dominated = points.iter().any(|&(cj, mj)| cj <= ci && mj >= mi && (cj < ci || mj > mi));
        if !dominated && !points[..i].contains(&(ci, mi)) {
            out.push(i);
        }
    }
    out
}

fn criterion_oracles() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut notes = Vec::new();
    let mut ok = true;

    let (mut g_err, mut h_err) = (0.0f64, 0.0f64);
    for case in 0..20 {
        let d = 1 + case % 6;
        let net = Mlp::new(&mut rng, &[d, 8, 5]);
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let f = |t: &mut Tape, x| net.f(t, x);
        let grad = |x: &[f64]| value_and_grad(f, x).unwrap().1;
        g_err = g_err.max(rel_err(&grad(&x), &fd_grad(|x| value_and_grad(f, x).unwrap().0, &x, 1e-5)));
        h_err = h_err.max(rel_err(&hvp(f, &x, &v).unwrap(), &fd_hvp(grad, &x, &v, 1e-5)));
    }
    ok &= g_err < 1e-5 && h_err < 1e-4;
    notes.push(format!("grad {g_err:.1e}, hvp {h_err:.1e}"));

    let mut hess_err = 0.0f64;
    for seed in 0..5u64 {
        let spec = EncoderSpec {
            input_dim: 2,
            hidden: vec![6],
            z_dim: 2,
            activation: Activation::Softplus,
        };
        let mut erng = ChaCha8Rng::seed_from_u64(60 + seed);
        let mut enc = EncoderParams::init(&spec, &mut erng);
        for p in enc.parameters_mut() {
            if p.name.ends_with(".bias") {
                p.value.mapv_inplace(|_| erng.random_range(-0.3..0.3));
            }
        }
        let x = [erng.random_range(-1.0..1.0), erng.random_range(-1.0..1.0)];
        let xm = Array2::from_shape_vec((1, 2), x.to_vec()).unwrap();
        let signs: Vec<Array2<f64>> = (0..4u32)
            .map(|m| Array2::from_shape_fn((1, 2), |(_, c)| if m >> c & 1 == 1 { -1.0 } else { 1.0 }))
            .collect();
        let exact = hessian_curvature_with_probes(&enc, xm.view(), &signs).unwrap();
        let fd = fd_hessian_frob(&enc, &x, 1e-4).unwrap();
        hess_err = hess_err.max((exact - fd).abs() / exact);
    }
    ok &= hess_err < 1e-3;
    notes.push(format!("hessian {hess_err:.1e}"));

    // KL(N(μ,σ²)‖N(0,1)) against a Monte Carlo average of log q − log p
    let mut kl_worst = 0.0f64;
    for _ in 0..5 {
        let mu = Array2::from_shape_simple_fn((1, 4), || rng.random_range(-1.5..1.5));
        let lv = Array2::from_shape_simple_fn((1, 4), || rng.random_range(-1.5..1.0));
        let closed = kl_diag_gaussian(mu.view(), lv.view());
        let m = 200_000;
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        for _ in 0..m {
            let mut s = 0.0;
            for j in 0..4 {
                let e: f64 = rng.sample(StandardNormal);
                let sd = (0.5 * lv[[0, j]]).exp();
                let z = mu[[0, j]] + sd * e;
                s += -0.5 * e * e - 0.5 * lv[[0, j]] + 0.5 * z * z;
            }
            sum += s;
            sum2 += s * s;
        }
        let mc = sum / m as f64;
        let se = ((sum2 / m as f64 - mc * mc) / m as f64).sqrt();
        kl_worst = kl_worst.max((mc - closed).abs() / se);
    }
    ok &= kl_worst < 4.0;
    notes.push(format!("KL {kl_worst:.2} SE"));

    let mut pr_err = 0.0f64;
    for _ in 0..10 {
        let n = rng.random_range(5..60);
        let d = rng.random_range(1..9);
        let z = Array2::from_shape_simple_fn((n, d), || rng.random_range(-1.0..1.0) * rng.random_range(0.1..3.0));
        let pr = participation_ratio(z.view()).unwrap();
        let mean_row = z.mean_axis(ndarray::Axis(0)).unwrap();
        let c = &z - &mean_row;
        let cov = c.t().dot(&c) / (n as f64 - 1.0);
        let m = DMatrix::from_fn(d, d, |i, j| cov[[i, j]]);
        let eig = m.symmetric_eigenvalues();
        let s1: f64 = eig.iter().sum();
        let s2: f64 = eig.iter().map(|l| l * l).sum();
        pr_err = pr_err.max((pr - s1 * s1 / s2).abs());
    }
    ok &= pr_err < 1e-9;
    notes.push(format!("PR {pr_err:.1e}"));

    let mut mi_err = 0.0f64;
    for _ in 0..10 {
        let n = rng.random_range(20..400);
        let a: Vec<usize> = (0..n).map(|_| rng.random_range(0..5)).collect();
        let b: Vec<usize> = a.iter().map(|&x| if rng.random_bool(0.6) { x } else { rng.random_range(0..4) }).collect();
        let got = discrete_mi(contingency(&a, &b).unwrap().view()).unwrap();
        let h = |counts: &std::collections::HashMap<(usize, usize), f64>| {
            counts.values().map(|&c| -(c / n as f64) * (c / n as f64).ln()).sum::<f64>()
        };
        let mut ca = std::collections::HashMap::new();
        let mut cb = std::collections::HashMap::new();
        let mut cab = std::collections::HashMap::new();
        for (&x, &y) in a.iter().zip(&b) {
            *ca.entry((x, 0)).or_insert(0.0) += 1.0;
            *cb.entry((0, y)).or_insert(0.0) += 1.0;
            *cab.entry((x, y)).or_insert(0.0) += 1.0;
        }
        let direct = (h(&ca) + h(&cb) - h(&cab)).max(0.0);
        mi_err = mi_err.max((got - direct).abs());
    }
    ok &= mi_err < 1e-12;
    notes.push(format!("MI {mi_err:.1e}"));

    let mut pareto_ok = true;
    for _ in 0..500 {
        let n = rng.random_range(1..30);
        let pts: Vec<(f64, f64)> = (0..n)
            .map(|_| (rng.random_range(0..8) as f64, rng.random_range(0..8) as f64 * 0.1))
            .collect();
        let mut got = pareto_front(&pts);
        got.sort();
        pareto_ok &= got == brute_pareto(&pts);
    }
    ok &= pareto_ok;
    notes.push(format!("pareto {}", if pareto_ok { "exact on 500 inputs" } else { "MISMATCH" }));

    Line {
        id: 6,
        pass: ok,
        soft: false,
        text: format!("oracle suite: {}", notes.join("; ")),
    }
}

// ---------------------------------------------------------------- criterion 9

fn fixture(acc: &[f64], align: &[(usize, f64)]) -> Vec<EpochRecord> {
    acc.iter()
        .enumerate()
        .map(|(i, &a)| EpochRecord {
            epoch: i + 1,
            seed: 1,
            beta: 1e-3,
            gamma: 1e-4,
            z_dim: 16,
            sigma: 0.05,
            acc_test: a,
            kl_mean: 10.0 - i as f64,
            curv_jac: 1.0 + (i % 3) as f64,
            train_loss: 1.0 / (i + 1) as f64,
            align_mi: align.iter().find(|p| p.0 == i + 1).map(|p| p.1),
            ..EpochRecord::default()
        })
        .collect()
}

const EXTERNAL_LOG: &str = "\
epoch,seed,beta,gamma,z_dim,sigma,train_loss,ce,kl_mean,curv_jac,curv_hess,acc_test,pr_dim,align_mi,mi_surrogate,efficiency
1,3,0.005,0,8,0.2,1.5,1.4,20,5,,0.41,,,,
2,3,0.005,0,8,0.2,1.1,1,19,5.5,0.25,0.62,3.1,0.3,0.9,0.002
3,3,0.005,0,8,0.2,0.9,0.8,18.5,6,,0.7,,,,
4,3,0.005,0,8,0.2,0.8,0.7,18,6.2,0.5,0.74,3.3,0.4,1.1,0.003
5,3,0.005,0,8,0.2,0.75,0.65,17.8,6.3,,0.76,,,,
6,3,0.005,0,8,0.2,0.72,0.62,17.7,6.35,0.75,0.77,3.4,0.45,1.2,0.0031
7,3,0.005,0,8,0.2,0.7,0.6,17.6,6.4,,0.775,,,,
8,3,0.005,0,8,0.2,0.69,0.59,17.5,6.4,1,0.78,3.4,0.48,1.22,0.0032
9,3,0.005,0,8,0.2,0.68,0.58,17.5,6.45,,0.78,,,,
10,3,0.005,0,8,0.2,0.68,0.58,17.4,6.45,1.25,0.781,3.45,0.5,1.23,0.0033
";

fn criterion_analytics(out: &Path) -> Line {
    let mut ok = true;
    let mut notes = Vec::new();

    // plateau: 0.5 through epoch 7, 0.9 after; first all-0.9 window ends at 12
    let plateau = fixture(
        &(1..=20).map(|e| if e <= 7 { 0.5 } else { 0.9 }).collect::<Vec<_>>(),
        &[(5, 0.05), (10, 0.04), (15, 0.05), (20, 0.1)],
    );
    let constant = fixture(&[0.7; 10], &(1..=10).map(|e| (e, 0.35)).collect::<Vec<_>>());
    let linear = fixture(&(1..=12).map(|e| 0.05 * e as f64).collect::<Vec<_>>(), &[(4, 0.4), (8, 0.8), (12, 1.2)]);

    let sat: Vec<_> = [&plateau, &constant, &linear].iter().map(|l| saturation_epoch(l).unwrap()).collect();
    let sat_ok = (sat[0].epoch, sat[0].saturated) == (12, true)
        && (sat[1].epoch, sat[1].saturated) == (1, true)
        && (sat[2].epoch, sat[2].saturated) == (12, false);
    ok &= sat_ok;
    notes.push(format!(
        "saturation {}/{}/{}{}",
        sat[0].epoch,
        sat[1].epoch,
        sat[2].epoch,
        if sat[2].saturated { "" } else { "+flag" }
    ));

    // ratios 10, 22.5, 18, 9: mean 14.875, max 22.5, slope -18.75/125
    let e = efficiency_series(&plateau).unwrap();
    let c = efficiency_series(&constant).unwrap();
    let l = efficiency_series(&linear).unwrap();
    let eff_ok = (e.mean - 14.875).abs() < 1e-12
        && e.max == 22.5
        && (e.slope + 0.15).abs() < 1e-12
        && c.slope == 0.0
        && (c.mean - 2.0).abs() < 1e-12
        && l.ratios.iter().all(|r| (r - 0.5).abs() < 1e-12);
    ok &= eff_ok;
    notes.push(format!("efficiency mean {} max {} slope {:.4}", e.mean, e.max, e.slope));

    // acc (0.1..0.4) vs kl (4..1) → −1; vs curv (1,2,3,5) → 6.5/√43.75
    let corr_log: Vec<EpochRecord> = (1..=4)
        .map(|i| EpochRecord {
            epoch: i,
            acc_test: 0.1 * i as f64,
            kl_mean: 5.0 - i as f64,
            curv_jac: [1.0, 2.0, 3.0, 5.0][i - 1],
            train_loss: 2.0,
            ..EpochRecord::default()
        })
        .collect();
    let m = correlation_report(&corr_log).unwrap();
    let want = 6.5 / 43.75f64.sqrt();
    let corr_ok = m.names == ["acc_test", "kl_mean", "curv_jac"]
        && (m.values[0][1] + 1.0).abs() < 1e-12
        && (m.values[0][2] - want).abs() < 1e-12
        && (m.values[1][2] + want).abs() < 1e-12
        && (0..3).all(|i| m.values[i][i] == 1.0);
    ok &= corr_ok;
    notes.push(format!("correlation r(acc,curv) = {:.6}", m.values[0][2]));

    let loaded = read_log_csv(EXTERNAL_LOG.as_bytes()).unwrap();
    let round_trip = records_to_csv(&loaded) == EXTERNAL_LOG;
    let logs = vec![RunLog {
        name: "external".into(),
        records: loaded,
    }];
    let (a, b) = (out.join("external_a"), out.join("external_b"));
    let fa = write_report(&logs, &a).unwrap();
    write_report(&logs, &b).unwrap();
    let identical = fa
        .written
        .iter()
        .all(|p| fs::read(p).unwrap() == fs::read(b.join(p.file_name().unwrap())).unwrap());
    ok &= round_trip && identical;
    notes.push(format!(
        "external log round trip {}, {} summary files byte-identical {}",
        round_trip,
        fa.written.len(),
        identical
    ));
    Line {
        id: 9,
        pass: ok,
        soft: false,
        text: notes.join("; "),
    }
}

// ------------------------------------------------------------ training runs

fn timed_train(c: &TrainConfig) -> (TrainRun, Duration) {
    let t = Instant::now();
    let run = train(c).expect("training runs");
    (run, t.elapsed())
}

fn sweep_triple(k: u64) -> SweepResult {
    let grid = SweepGrid {
        base: headline(0),
        betas: vec![1e-3, 5e-3, 1e-2],
        gammas: vec![0.0, 1e-4],
        z_dims: vec![8, 16],
        sigmas: vec![0.05],
        seeds: vec![3 * k + 1, 3 * k + 2, 3 * k + 3],
    };
    sweep(&grid, None).expect("sweep runs")
}

fn main() -> ExitCode {
    let out = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    fs::create_dir_all(&out).unwrap();
    let mut lines: Vec<Line> = Vec::new();
    let emit = |l: Line, lines: &mut Vec<Line>| {
        report_line(&l);
        lines.push(l);
    };

    emit(criterion_hutchinson(), &mut lines);
    emit(criterion_oracles(), &mut lines);
    emit(criterion_analytics(&out), &mut lines);

    // 1, 3: headline config over seeds 1..3
    let headline_runs: Vec<(TrainRun, Duration)> = (1..=3).map(|s| timed_train(&headline(s))).collect();
    let accs: Vec<f64> = headline_runs.iter().map(|(r, _)| final_record(r).acc_test).collect();
    let slowest = headline_runs.iter().map(|(_, d)| *d).max().unwrap();
    let completed = headline_runs.iter().all(|(r, _)| r.status == RunStatus::Completed);
    let hits = accs.iter().filter(|&&a| a >= 0.95).count();
    emit(
        Line {
            id: 1,
            pass: completed && hits >= 2 && slowest <= Duration::from_secs(600),
            soft: false,
            text: format!(
                "headline accuracy {:.4} / {:.4} / {:.4} (>= 0.95 on {hits} of 3); slowest run {:.1} s",
                accs[0],
                accs[1],
                accs[2],
                slowest.as_secs_f64()
            ),
        },
        &mut lines,
    );

    // 2: σ = 0.2
    let noisy: Vec<TrainRun> = (1..=3).map(|s| train(&TrainConfig { sigma: 0.2, ..headline(s) }).unwrap()).collect();
    let noisy_acc: Vec<f64> = noisy.iter().map(|r| final_record(r).acc_test).collect();
    emit(
        Line {
            id: 2,
            pass: noisy_acc.iter().all(|a| (0.82..=0.96).contains(a)),
            soft: false,
            text: format!(
                "sigma = 0.2 accuracy {:.4} / {:.4} / {:.4}, band [0.82, 0.96]",
                noisy_acc[0], noisy_acc[1], noisy_acc[2]
            ),
        },
        &mut lines,
    );

    let mis: Vec<f64> = headline_runs.iter().map(|(r, _)| final_record(r).mi_surrogate.unwrap()).collect();
    let curvs: Vec<f64> = headline_runs.iter().map(|(r, _)| final_record(r).curv_jac).collect();
    let (rs_mi, rs_curv) = (rel_std(&mis), rel_std(&curvs));
    emit(
        Line {
            id: 3,
            pass: rs_mi <= 0.10 && rs_curv <= 0.10,
            soft: false,
            text: format!(
                "relative std across seeds: mi_surrogate {:.2}% (mean {:.4}), curv_jac {:.2}% (mean {:.3})",
                100.0 * rs_mi,
                mean(&mis),
                100.0 * rs_curv,
                mean(&curvs)
            ),
        },
        &mut lines,
    );

    // 4: frozen random encoder + linear readout at z = 16
    let base_acc: Vec<f64> = (1..=3).map(|s| random_baseline(&headline(s)).unwrap().acc_test).collect();
    let gap = mean(&accs) - mean(&base_acc);
    emit(
        Line {
            id: 4,
            pass: gap >= 0.20,
            soft: false,
            text: format!(
                "V-GIB {:.4} vs random baseline {:.4} ({:.4} / {:.4} / {:.4}): gap {:.4}, required >= 0.20",
                mean(&accs),
                mean(&base_acc),
                base_acc[0],
                base_acc[1],
                base_acc[2],
                gap
            ),
        },
        &mut lines,
    );

    // 7: β sweep over three seed-triples
    let mut monotone = 0;
    let mut per_triple = Vec::new();
    let mut first_sweep = None;
    for k in 0..3 {
        let result = sweep_triple(k);
        let finals = result.final_records();
        let by_beta: Vec<f64> = [1e-3, 5e-3, 1e-2]
            .iter()
            .map(|&b| mean(&finals.iter().filter(|r| r.beta == b).map(|r| r.curv_jac).collect::<Vec<_>>()))
            .collect();
        let ok = by_beta.windows(2).all(|w| w[1] <= w[0]);
        if ok {
            monotone += 1;
        } else {
            eprintln!("note: seed-triple {} curv_jac not monotone in beta: {by_beta:?}", k + 1);
        }
        per_triple.push(format!(
            "[{:.2} {:.2} {:.2}]{}",
            by_beta[0],
            by_beta[1],
            by_beta[2],
            if result.failures().is_empty() { "" } else { " (with failed cells)" }
        ));
        let dir = out.join(format!("sweep_triple{}", k + 1));
        result.write(&dir).unwrap();
        if k == 0 {
            first_sweep = Some(result);
        }
    }
    let report_dir = out.join("report");
    let report_ok = vgib::harness::report(&out.join("sweep_triple1"), &report_dir).is_ok();
    emit(
        Line {
            id: 7,
            pass: monotone >= 2 && report_ok,
            soft: false,
            text: format!(
                "seed-averaged curv_jac over beta 1e-3/5e-3/1e-2: {}; nonincreasing in {monotone} of 3 triples; report {}",
                per_triple.join(" "),
                if report_ok { "written" } else { "FAILED" }
            ),
        },
        &mut lines,
    );

    // 8: η_eff across σ ∈ {0.05, 0.2}
    let eta = eta_experiment(&headline(1), 1e-4, &[0.05, 0.2], &DEFAULT_FRACTIONS, &[1, 2, 3]).unwrap();
    fs::create_dir_all(&report_dir).unwrap();
    fs::write(report_dir.join("eta.csv"), eta.to_csv()).unwrap();
    let eta_mean = eta.mean();
    let eta_pass = eta_mean.is_some_and(|m| m >= 1.0);
    let eta_text = eta
        .per_sigma
        .iter()
        .map(|s| match &s.eta {
            Ok(v) => format!("sigma {}: {v:.4}", s.sigma),
            Err(e) => format!("sigma {}: undefined ({e})", s.sigma),
        })
        .collect::<Vec<_>>()
        .join(", ");
    let diag_path = report_dir.join("eta_diagnosis.txt");
    let floor = eta.at_grid_floor();
    if !eta_pass || floor {
        fs::write(&diag_path, eta.diagnosis()).unwrap();
    }
    emit(
        Line {
            id: 8,
            pass: eta_pass,
            soft: true,
            text: format!(
                "eta_eff {eta_text}; mean {}{}",
                eta_mean.map_or("undefined".into(), |m| format!("{m:.4}")),
                if !eta_pass {
                    format!(" < 1, diagnosis in {}", diag_path.display())
                } else if floor {
                    format!(
                        " (both arms reach the target at the smallest fraction, so 1.0 is forced; see {})",
                        diag_path.display()
                    )
                } else {
                    String::new()
                }
            ),
        },
        &mut lines,
    );

    // 10: direct run vs. the same cell inside the parallel sweep, and a rerun
    let direct = records_to_csv(&headline_runs[0].0.records);
    let in_sweep = first_sweep
        .as_ref()
        .and_then(|s| {
            s.cells
                .iter()
                .filter_map(|c| c.completed())
                .find(|r| r.config == headline(1))
                .map(|r| records_to_csv(&r.records))
        })
        .unwrap_or_default();
    let rerun = records_to_csv(&train(&TrainConfig { sigma: 0.2, ..headline(1) }).unwrap().records);
    let noisy_first = records_to_csv(&noisy[0].records);
    emit(
        Line {
            id: 10,
            pass: direct == in_sweep && rerun == noisy_first,
            soft: false,
            text: format!(
                "byte-identical logs: headline seed 1 direct vs sweep {}, sigma 0.2 seed 1 rerun {}",
                direct == in_sweep,
                rerun == noisy_first
            ),
        },
        &mut lines,
    );

    lines.sort_by_key(|l| l.id);
    let summary: String = lines
        .iter()
        .map(|l| {
            format!(
                "{} {}\n",
                l.id,
                match (l.pass, l.soft) {
                    (true, _) => "PASS",
                    (false, true) => "SOFT-FAIL",
                    _ => "FAIL",
                }
            )
        })
        .collect();
    fs::write(out.join("summary.txt"), &summary).unwrap();
    let hard_failures: Vec<u8> = lines.iter().filter(|l| !l.pass && !l.soft).map(|l| l.id).collect();
    println!(
        "acceptance: {} of {} criteria passed; outputs in {}",
        lines.iter().filter(|l| l.pass).count(),
        lines.len(),
        out.display()
    );
    if hard_failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing criteria {hard_failures:?}");
        ExitCode::FAILURE
    }
}
