use proptest::prelude::*;
use vgib::harness::{
    correlation_report, efficiency_series, eta_eff, isotonic_increasing, pareto_extract, pareto_front,
    read_log_csv, records_to_csv, saturation_epoch, EpochRecord, EtaArm, HarnessError, SweepGrid, TrainConfig,
    LOG_HEADER,
};

fn rec(epoch: usize, acc: f64) -> EpochRecord {
    EpochRecord {
        epoch,
        seed: 1,
        beta: 1e-3,
        gamma: 1e-4,
        z_dim: 16,
        sigma: 0.05,
        acc_test: acc,
        ..EpochRecord::default()
    }
}

// O(n²) dominance check, duplicates folded into the lowest index
fn brute_front(points: &[(f64, f64)]) -> Vec<usize> {
    let mut out = Vec::new();
    for (i, &(ci, mi)) in points.iter().enumerate() {
        let dominated = points
            .iter()
            .any(|&(cj, mj)| cj <= ci && mj >= mi && (cj < ci || mj > mi));
        let earlier_copy = points[..i].contains(&(ci, mi));
        if !dominated && !earlier_copy {
            out.push(i);
        }
    }
    out
}

#[test]
fn pareto_examples() {
    let pts = [(1.0, 1.0), (2.0, 2.0), (3.0, 1.5)];
    assert_eq!(pareto_front(&pts), vec![0, 1]);
    assert_eq!(pareto_front(&[(1.0, 1.0); 4]).len(), 1);

    let mut records = Vec::new();
    for (beta, c, m) in [(1e-3, 1.0, 1.0), (5e-3, 2.0, 2.0), (1e-2, 3.0, 1.5)] {
        for seed in 0..3 {
            let mut r = rec(30, 0.9);
            r.beta = beta;
            r.seed = seed;
            r.curv_jac = c;
            r.mi_surrogate = Some(m);
            records.push(r);
        }
    }
    let (points, frontier) = pareto_extract(&records).unwrap();
    assert_eq!(points.len(), 3);
    assert!(points.iter().all(|p| p.n_seeds == 3));
    assert_eq!(points.iter().map(|p| p.dominated).collect::<Vec<_>>(), vec![false, false, true]);
    assert_eq!(frontier.iter().map(|p| p.beta).collect::<Vec<_>>(), vec![1e-3, 5e-3]);
}

#[test]
fn pareto_needs_two_betas() {
    let mut r = rec(30, 0.9);
    r.mi_surrogate = Some(1.0);
    assert!(matches!(pareto_extract(&[r, r]), Err(HarnessError::Analytics(_))));
}

proptest! {
    #[test]
    fn pareto_front_matches_brute_force(
        pts in prop::collection::vec((0u8..6, 0u8..6), 1..25)
    ) {
        // coarse grid so ties and duplicates are common
        let pts: Vec<(f64, f64)> = pts.into_iter().map(|(c, m)| (c as f64 * 0.5, m as f64 * 0.25)).collect();
        let mut got = pareto_front(&pts);
        let front_pts: Vec<(f64, f64)> = got.iter().map(|&i| pts[i]).collect();
        for w in front_pts.windows(2) {
            prop_assert!(w[0].0 < w[1].0 && w[0].1 < w[1].1);
        }
        got.sort();
        prop_assert_eq!(got, brute_front(&pts));
    }
}

fn plateau_log() -> Vec<EpochRecord> {
    (1..=20)
        .map(|e| {
            let mut r = rec(e, if e <= 7 { 0.5 } else { 0.9 });
            r.align_mi = match e {
                5 => Some(0.05),
                10 => Some(0.04),
                15 => Some(0.05),
                20 => Some(0.1),
                _ => None,
            };
            r
        })
        .collect()
}

fn constant_log() -> Vec<EpochRecord> {
    (1..=10)
        .map(|e| {
            let mut r = rec(e, 0.7);
            r.align_mi = Some(0.35);
            r
        })
        .collect()
}

fn linear_log() -> Vec<EpochRecord> {
    (1..=12)
        .map(|e| {
            let mut r = rec(e, 0.05 * e as f64);
            r.align_mi = if e % 4 == 0 { Some(0.1 * e as f64) } else { None };
            r
        })
        .collect()
}

#[test]
fn saturation_fixtures() {
    // window 8..12 is the first one without a 0.5
    let s = saturation_epoch(&plateau_log()).unwrap();
    assert_eq!((s.epoch, s.saturated), (12, true));
    let s = saturation_epoch(&constant_log()).unwrap();
    assert_eq!((s.epoch, s.saturated), (1, true));
    // rolling means step by 0.05, so only the last one qualifies
    let s = saturation_epoch(&linear_log()).unwrap();
    assert_eq!((s.epoch, s.saturated), (12, false));
    assert!(saturation_epoch(&constant_log()[..9]).is_err());
}

#[test]
fn efficiency_fixtures() {
    let e = efficiency_series(&plateau_log()).unwrap();
    assert_eq!(e.epochs, vec![5, 10, 15, 20]);
    // ratios 10, 22.5, 18, 9
    let want = [10.0, 22.5, 18.0, 9.0];
    for (g, w) in e.ratios.iter().zip(want) {
        assert!((g - w).abs() < 1e-12, "{g} vs {w}");
    }
    assert!((e.mean - 14.875).abs() < 1e-12);
    assert_eq!(e.max, 22.5);
    // Σdx·dy = -18.75 over Σdx² = 125
    assert!((e.slope + 0.15).abs() < 1e-12, "{}", e.slope);

    let c = efficiency_series(&constant_log()).unwrap();
    assert!(c.ratios.iter().all(|&r| (r - 2.0).abs() < 1e-12));
    assert_eq!(c.slope, 0.0);

    // acc 0.05e / align 0.1e = 0.5 at epochs 4, 8, 12
    let l = efficiency_series(&linear_log()).unwrap();
    assert_eq!(l.epochs, vec![4, 8, 12]);
    assert!(l.ratios.iter().all(|&r| (r - 0.5).abs() < 1e-12));

    let two = [
        {
            let mut r = rec(1, 0.5);
            r.align_mi = Some(0.05);
            r
        },
        {
            let mut r = rec(2, 1.0);
            r.align_mi = Some(0.04);
            r
        },
        {
            let mut r = rec(3, 1.0);
            r.align_mi = Some(0.0);
            r
        },
    ];
    let t = efficiency_series(&two).unwrap();
    assert_eq!(t.epochs, vec![1, 2]);
    assert!((t.ratios[0] - 10.0).abs() < 1e-12 && (t.ratios[1] - 25.0).abs() < 1e-12);
    assert!((t.max - 25.0).abs() < 1e-12);
    assert!(efficiency_series(&[rec(1, 0.5)]).is_err());
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

fn correlation_log() -> Vec<EpochRecord> {
    let curv = [1.0, 2.0, 3.0, 5.0];
    (1..=4)
        .map(|e| {
            let mut r = rec(e, 0.1 * e as f64);
            r.kl_mean = 5.0 - e as f64;
            r.curv_jac = curv[e - 1];
            r.train_loss = 2.0;
            r.align_mi = if e % 2 == 0 { Some(0.3 + 0.1 * e as f64) } else { None };
            r
        })
        .collect()
}

#[test]
fn correlation_fixture() {
    let m = correlation_report(&correlation_log()).unwrap();
    assert_eq!(m.names, vec!["acc_test", "kl_mean", "curv_jac", "align_mi"]);
    assert_eq!(m.dropped, vec!["train_loss", "efficiency"]);
    let r_curv = 6.5 / 43.75f64.sqrt();
    let want = [
        [1.0, -1.0, r_curv, 1.0],
        [-1.0, 1.0, -r_curv, -1.0],
        [r_curv, -r_curv, 1.0, 1.0],
        [1.0, -1.0, 1.0, 1.0],
    ];
    for i in 0..4 {
        assert_eq!(m.values[i][i], 1.0);
        for j in 0..4 {
            assert!((m.values[i][j] - want[i][j]).abs() < 1e-12, "{i},{j}: {}", m.values[i][j]);
            assert!((m.values[i][j] - m.values[j][i]).abs() < 1e-12);
        }
    }
}

#[test]
fn correlation_copy_and_recomputation() {
    let mut records = plateau_log();
    for (i, r) in records.iter_mut().enumerate() {
        r.kl_mean = r.acc_test;
        r.curv_jac = ((i * 7) % 5) as f64;
        r.train_loss = (i as f64).sin();
    }
    let m = correlation_report(&records).unwrap();
    let idx = |n: &str| m.names.iter().position(|x| x == n).unwrap();
    assert!((m.values[idx("acc_test")][idx("kl_mean")] - 1.0).abs() < 1e-12);
    let acc: Vec<f64> = records.iter().map(|r| r.acc_test).collect();
    let loss: Vec<f64> = records.iter().map(|r| r.train_loss).collect();
    let curv: Vec<f64> = records.iter().map(|r| r.curv_jac).collect();
    assert!((m.values[idx("acc_test")][idx("train_loss")] - pearson(&acc, &loss)).abs() < 1e-12);
    assert!((m.values[idx("curv_jac")][idx("train_loss")] - pearson(&curv, &loss)).abs() < 1e-12);
    assert!(correlation_report(&constant_log()).is_err());
}

#[test]
fn eta_examples() {
    let base = EtaArm::new("baseline", &[(100.0, 0.5), (200.0, 0.7), (400.0, 0.8), (800.0, 0.9)]);
    assert!((eta_eff(&base, &base.clone()).unwrap() - 1.0).abs() < 1e-12);
    let shifted: Vec<(f64, f64)> = base.n.iter().zip(&base.acc).map(|(n, a)| (n / 2.0, *a)).collect();
    let reg = EtaArm::new("regularized", &shifted);
    assert!((eta_eff(&base, &reg).unwrap() - 2.0).abs() < 1e-12);

    assert_eq!(isotonic_increasing(&[1.0, 3.0, 2.0, 4.0]), vec![1.0, 2.5, 2.5, 4.0]);
    assert_eq!(isotonic_increasing(&[3.0, 2.0, 1.0]), vec![2.0, 2.0, 2.0]);
    // the dip at 400 is pooled: [0.5, 0.75, 0.75, 0.9]
    let bumpy = EtaArm::new("bumpy", &[(100.0, 0.5), (200.0, 0.8), (400.0, 0.7), (800.0, 0.9)]);
    let target = 0.6;
    let got = bumpy.crossing(target).unwrap();
    assert!((got - (100.0 + 0.1 / 0.25 * 100.0)).abs() < 1e-9, "{got}");

    let weak = EtaArm::new("weak", &[(100.0, 0.1), (800.0, 0.2)]);
    match eta_eff(&base, &weak) {
        Err(HarnessError::TargetUnreachable { arm, .. }) => assert_eq!(arm, "weak"),
        other => panic!("expected unreachable target, got {other:?}"),
    }
}

#[test]
fn log_csv_round_trip_and_errors() {
    let mut records = plateau_log();
    records[4].mi_surrogate = Some(1.234_567_890_123_4);
    records[4].efficiency = Some(3.0e-7);
    records[4].curv_hess = Some(0.0);
    let text = records_to_csv(&records);
    assert!(text.starts_with(LOG_HEADER));
    let back = read_log_csv(text.as_bytes()).unwrap();
    assert_eq!(back, records);
    assert_eq!(records_to_csv(&back), text);

    let no_epoch = text.replacen("epoch,", "epk,", 1);
    match read_log_csv(no_epoch.as_bytes()) {
        Err(HarnessError::MissingColumn(c)) => assert_eq!(c, "epoch"),
        other => panic!("{other:?}"),
    }
    assert!(read_log_csv("".as_bytes()).is_err());
    let bad = text.replacen("\n1,1,", "\n1,x,", 1);
    match read_log_csv(bad.as_bytes()) {
        Err(HarnessError::Parse { line, .. }) => assert_eq!(line, 2),
        other => panic!("{other:?}"),
    }
}

#[test]
fn config_parsing() {
    let c = TrainConfig::from_toml("beta = 0.001\ngamma = 1e-4\nz_dim = 16\nsigma = 0.05\nseed = 1\nprobes_K = 3\n").unwrap();
    assert_eq!((c.epochs, c.batch, c.probes_k, c.n_samples), (30, 256, 3, 6000));
    assert_eq!(c.lambda_align, 0.0);
    assert_eq!(TrainConfig::from_toml(&c.to_toml()).unwrap(), c);
    let unknown = TrainConfig::from_toml("beta = 0.001\ngamma = 0\nz_dim = 16\nsigma = 0.05\nseed = 1\nbogus = 2\n");
    assert!(matches!(unknown, Err(HarnessError::Config(m)) if m.contains("bogus")));
    assert!(TrainConfig::from_toml("beta = -1.0\ngamma = 0\nz_dim = 16\nsigma = 0.05\nseed = 1\n").is_err());
    assert!(TrainConfig::from_toml("gamma = 0\nz_dim = 16\nsigma = 0.05\nseed = 1\n").is_err());

    let grid = SweepGrid::from_toml(
        "betas = [1e-3, 5e-3, 1e-2]\ngammas = [0.0, 1e-4]\nz_dims = [8, 16]\nseeds = [1, 2, 3]\n\n[base]\nbeta = 0.0\ngamma = 0.0\nz_dim = 16\nsigma = 0.05\nseed = 0\n",
    )
    .unwrap();
    assert_eq!(grid.configs().len(), 36);
}
