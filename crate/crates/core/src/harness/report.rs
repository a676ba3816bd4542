//! CSV tables and SVG figures generated from run logs.
//!
//! Every plotted mark comes from a row of a CSV written next to the figure.
//! Numbers are printed with fixed precision, so the same logs always give
//! byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::analytics::{correlation_report, efficiency_series, pareto_extract, saturation_epoch};
use super::record::{load_log_csv, EpochRecord};
use super::HarnessError;

/// A run log and the name it was loaded under.
#[derive(Debug, Clone)]
pub struct RunLog {
    pub name: String,
    pub records: Vec<EpochRecord>,
}

#[derive(Debug, Clone, Default)]
pub struct ReportFiles {
    pub written: Vec<PathBuf>,
    /// Outputs that could not be produced, with the reason.
    pub skipped: Vec<String>,
}

/// Loads every per-run log (`*.csv` with the log header) directly inside
/// `dir`, sorted by file name. The sweep aggregate `sweep.csv` is skipped.
pub fn load_run_logs(dir: &Path) -> Result<Vec<RunLog>, HarnessError> {
    if !dir.is_dir() {
        return Err(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("{} is not a directory", dir.display()),
        )
        .into());
    }
    let mut paths: Vec<PathBuf> = walkdir::WalkDir::new(dir)
        .max_depth(1)
        .into_iter()
        .filter_map(Result::ok)
        .map(|e| e.into_path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .filter(|p| p.file_name().is_some_and(|n| n != "sweep.csv"))
        .collect();
    paths.sort();
    let mut logs = Vec::new();
    for p in paths {
        let first = fs::read_to_string(&p)?;
        if !first.starts_with("epoch,") {
            continue;
        }
        let name = p.file_stem().and_then(|s| s.to_str()).unwrap_or("run").to_string();
        logs.push(RunLog {
            name,
            records: load_log_csv(&p)?,
        });
    }
    Ok(logs)
}

/// Reads the logs in `logs_dir` and writes the report into `out_dir`.
pub fn report(logs_dir: &Path, out_dir: &Path) -> Result<ReportFiles, HarnessError> {
    let logs = load_run_logs(logs_dir)?;
    write_report(&logs, out_dir)
}

pub fn write_report(logs: &[RunLog], out_dir: &Path) -> Result<ReportFiles, HarnessError> {
    if logs.iter().all(|l| l.records.is_empty()) {
        return Err(HarnessError::Analytics("no run logs to report on".into()));
    }
    fs::create_dir_all(out_dir)?;
    let mut files = ReportFiles::default();
    let put = |name: &str, body: String, files: &mut ReportFiles| -> Result<(), HarnessError> {
        let p = out_dir.join(name);
        fs::write(&p, body)?;
        files.written.push(p);
        Ok(())
    };

    // frontier over final records
    let finals: Vec<EpochRecord> = logs.iter().filter_map(|l| l.records.last().copied()).collect();
    match pareto_extract(&finals) {
        Ok((points, _)) => {
            let hess: Vec<f64> = points
                .iter()
                .map(|p| {
                    let hs: Vec<f64> = finals
                        .iter()
                        .filter(|r| r.beta == p.beta)
                        .filter_map(|r| r.curv_hess)
                        .collect();
                    if hs.is_empty() {
                        0.0
                    } else {
                        hs.iter().sum::<f64>() / hs.len() as f64
                    }
                })
                .collect();
            let mut csv = String::from("beta,mean_curv,mean_mi,n_seeds,dominated,mean_curv_hess\n");
            for (p, h) in points.iter().zip(&hess) {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{}",
                    p.beta, p.mean_curv, p.mean_mi, p.n_seeds, p.dominated, h
                );
            }
            put("frontier.csv", csv, &mut files)?;
            let marks: Vec<(f64, f64, f64, bool, String)> = points
                .iter()
                .zip(&hess)
                .map(|(p, &h)| (p.mean_curv, p.mean_mi, h, !p.dominated, format!("β={}", p.beta)))
                .collect();
            put("frontier.svg", frontier_svg(&marks), &mut files)?;
        }
        Err(e) => files.skipped.push(format!("frontier: {e}")),
    }

    // accuracy and alignment per epoch
    let mut csv = String::from("run,epoch,acc_test,align_mi\n");
    for l in logs {
        for r in &l.records {
            let align = r.align_mi.map_or(String::new(), |a| format!("{a}"));
            let _ = writeln!(csv, "{},{},{},{}", l.name, r.epoch, r.acc_test, align);
        }
    }
    put("curves.csv", csv, &mut files)?;
    put("curves.svg", curves_svg(logs), &mut files)?;

    // efficiency ratios and their histogram
    let mut ratio_csv = String::from("run,epoch,ratio\n");
    let mut summary_csv =
        String::from("run,final_acc,saturation_epoch,saturated,eff_mean,eff_max,eff_slope\n");
    let mut all_ratios = Vec::new();
    for l in logs {
        let sat = saturation_epoch(&l.records).ok();
        let eff = efficiency_series(&l.records).ok();
        if let Some(e) = &eff {
            for (ep, r) in e.epochs.iter().zip(&e.ratios) {
                let _ = writeln!(ratio_csv, "{},{},{}", l.name, ep, r);
                all_ratios.push(*r);
            }
        }
        let cell = |v: Option<String>| v.unwrap_or_default();
        let _ = writeln!(
            summary_csv,
            "{},{},{},{},{},{},{}",
            l.name,
            cell(l.records.last().map(|r| format!("{}", r.acc_test))),
            cell(sat.map(|s| s.epoch.to_string())),
            cell(sat.map(|s| s.saturated.to_string())),
            cell(eff.as_ref().map(|e| format!("{}", e.mean))),
            cell(eff.as_ref().map(|e| format!("{}", e.max))),
            cell(eff.as_ref().map(|e| format!("{}", e.slope))),
        );
    }
    put("efficiency.csv", ratio_csv, &mut files)?;
    put("summary.csv", summary_csv, &mut files)?;
    if all_ratios.is_empty() {
        files.skipped.push("efficiency histogram: no epoch with positive align_mi".into());
    } else {
        let bins = histogram(&all_ratios, 12);
        let mut csv = String::from("bin_lo,bin_hi,count\n");
        for (lo, hi, c) in &bins {
            let _ = writeln!(csv, "{lo},{hi},{c}");
        }
        put("efficiency_hist.csv", csv, &mut files)?;
        put("efficiency_hist.svg", histogram_svg(&bins), &mut files)?;
    }

    let pooled: Vec<EpochRecord> = logs.iter().flat_map(|l| l.records.iter().copied()).collect();
    match correlation_report(&pooled) {
        Ok(m) => put("correlation.csv", m.to_csv(), &mut files)?,
        Err(e) => files.skipped.push(format!("correlation: {e}")),
    }
    Ok(files)
}

fn histogram(values: &[f64], bins: usize) -> Vec<(f64, f64, usize)> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let mut counts = vec![0usize; bins];
    for &v in values {
        let b = (((v - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| (lo + i as f64 * width, lo + (i + 1) as f64 * width, c))
        .collect()
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const M: f64 = 60.0;

struct Axes {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Axes {
    fn fit(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Self {
        let (x0, x1) = padded(xs);
        let (y0, y1) = padded(ys);
        Self { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        M + (x - self.x0) / (self.x1 - self.x0) * (W - 2.0 * M)
    }

    fn py(&self, y: f64) -> f64 {
        H - M - (y - self.y0) / (self.y1 - self.y0) * (H - 2.0 * M)
    }
}

fn padded(v: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = v
        .filter(|x| x.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let span = if hi > lo { hi - lo } else { lo.abs().max(1.0) };
    (lo - 0.05 * span, hi + 0.05 * span)
}

fn svg_open(title: &str, xlabel: &str, ylabel: &str, axes: &Axes) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, esc(title));
    let _ = writeln!(
        s,
        r#"<line x1="{M}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="black"/>"#,
        H - M,
        W - M,
        H - M
    );
    let _ = writeln!(s, r#"<line x1="{M}" y1="{M}" x2="{M}" y2="{:.1}" stroke="black"/>"#, H - M);
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = axes.x0 + t * (axes.x1 - axes.x0);
        let yv = axes.y0 + t * (axes.y1 - axes.y0);
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            axes.px(xv),
            H - M + 16.0,
            tick(xv)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            M - 6.0,
            axes.py(yv) + 4.0,
            tick(yv)
        );
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, W / 2.0, H - 16.0, esc(xlabel));
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        esc(ylabel)
    );
    s
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Points `(curvature, mi, curv_hess, on_frontier, label)`.
fn frontier_svg(points: &[(f64, f64, f64, bool, String)]) -> String {
    let axes = Axes::fit(points.iter().map(|p| p.0), points.iter().map(|p| p.1));
    let mut s = svg_open(
        "Information-curvature frontier (bubble size: Hessian curvature)",
        "mean Jacobian curvature",
        "mean MI surrogate (nats)",
        &axes,
    );
    let hmax = points.iter().map(|p| p.2).fold(0.0f64, f64::max);
    let mut front: Vec<&(f64, f64, f64, bool, String)> = points.iter().filter(|p| p.3).collect();
    front.sort_by(|a, b| a.0.total_cmp(&b.0));
    if front.len() > 1 {
        let path: Vec<String> = front
            .iter()
            .map(|p| format!("{:.2},{:.2}", axes.px(p.0), axes.py(p.1)))
            .collect();
        let _ = writeln!(s, r##"<polyline points="{}" fill="none" stroke="#d62728" stroke-width="1.5"/>"##, path.join(" "));
    }
    for p in points {
        let r = if hmax > 0.0 { 4.0 + 14.0 * p.2 / hmax } else { 6.0 };
        let fill = if p.3 { "#d62728" } else { "#7f7f7f" };
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="{:.2}" fill="{fill}" fill-opacity="0.6" stroke="black"/>"#,
            axes.px(p.0),
            axes.py(p.1),
            r
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            axes.px(p.0) + r + 2.0,
            axes.py(p.1) - 2.0,
            esc(&p.4)
        );
    }
    s.push_str("</svg>\n");
    s
}

const PALETTE: [&str; 8] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

fn curves_svg(logs: &[RunLog]) -> String {
    let all = || logs.iter().flat_map(|l| l.records.iter());
    let axes = Axes::fit(
        all().map(|r| r.epoch as f64),
        all().map(|r| r.acc_test).chain(all().filter_map(|r| r.align_mi)),
    );
    let mut s = svg_open(
        "Test accuracy (solid) and alignment MI (dashed) per epoch",
        "epoch",
        "accuracy / nats",
        &axes,
    );
    for (i, l) in logs.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let acc: Vec<String> = l
            .records
            .iter()
            .map(|r| format!("{:.2},{:.2}", axes.px(r.epoch as f64), axes.py(r.acc_test)))
            .collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}"/>"#, acc.join(" "));
        let align: Vec<String> = l
            .records
            .iter()
            .filter_map(|r| r.align_mi.map(|a| format!("{:.2},{:.2}", axes.px(r.epoch as f64), axes.py(a))))
            .collect();
        if !align.is_empty() {
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-dasharray="5,3"/>"#,
                align.join(" ")
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

fn histogram_svg(bins: &[(f64, f64, usize)]) -> String {
    let max = bins.iter().map(|b| b.2).max().unwrap_or(1) as f64;
    let axes = Axes {
        x0: bins.first().map_or(0.0, |b| b.0),
        x1: bins.last().map_or(1.0, |b| b.1),
        y0: 0.0,
        y1: max.max(1.0) * 1.05,
    };
    let mut s = svg_open("Accuracy / alignment ratio", "acc_test / align_mi", "epochs", &axes);
    for &(lo, hi, c) in bins {
        let (x0, x1) = (axes.px(lo), axes.px(hi));
        let (y, base) = (axes.py(c as f64), axes.py(0.0));
        let _ = writeln!(
            s,
            r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#1f77b4" stroke="white"/>"##,
            x0,
            y,
            (x1 - x0).max(0.0),
            (base - y).max(0.0)
        );
    }
    s.push_str("</svg>\n");
    s
}
