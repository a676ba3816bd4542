//! `vgib` command-line interface.
//!
//! Exit codes: 0 success, 2 config or input error, 3 numerical divergence,
//! 4 I/O error.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use vgib::data::{gen_swiss_roll, gen_torus, write_feature_csv, DataError};
use vgib::harness::{
    derive_seed, eta_experiment, random_baseline, report, sweep, train, write_run, HarnessError, RunStatus,
    SweepGrid, TrainConfig, DEFAULT_FRACTIONS,
};
use vgib::nets::NetsError;

#[derive(Parser)]
#[command(name = "vgib", version, about = "Geometric information bottleneck experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenDataset {
    SwissRoll,
    Torus,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic dataset as feature CSV. `--seed` is the run seed,
    /// so the file matches what `train` generates for the same seed.
    Generate {
        #[arg(long, value_enum, default_value = "swiss-roll")]
        dataset: GenDataset,
        #[arg(long, default_value_t = 6000)]
        n: usize,
        #[arg(long, default_value_t = 0.05)]
        sigma: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train one configuration; writes the log CSV and a checkpoint.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a grid of configurations.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Tables and figures from a directory of run logs.
    Report {
        #[arg(long)]
        logs: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Frozen random encoder with a trained linear readout.
    Baseline {
        #[arg(long)]
        config: PathBuf,
    },
    /// Sample-efficiency ratio between the γ = 0 arm and the configured γ.
    Etaeff {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.05, 0.2])]
        sigmas: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_FRACTIONS.to_vec())]
        fractions: Vec<f64>,
        /// Seeds averaged at each point (default: the config seed).
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
    },
}

enum Failure {
    Config(String),
    Diverged(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Diverged(_) => 3,
            Failure::Io(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Diverged(m) | Failure::Io(m) => m,
        }
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        let msg = e.to_string();
        match e {
            HarnessError::Io(_) | HarnessError::Data(DataError::Io(_)) | HarnessError::Nets(NetsError::Io(_)) => {
                Failure::Io(msg)
            }
            HarnessError::Nets(_) | HarnessError::Geometry(_) | HarnessError::Autodiff(_) => Failure::Diverged(msg),
            _ => Failure::Config(msg),
        }
    }
}

impl From<DataError> for Failure {
    fn from(e: DataError) -> Self {
        HarnessError::from(e).into()
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Generate {
            dataset,
            n,
            sigma,
            seed,
            out,
        } => {
            let s = derive_seed(seed, "data");
            let data = match dataset {
                GenDataset::SwissRoll => gen_swiss_roll(n, sigma, s)?,
                GenDataset::Torus => gen_torus(n, 2.0, 0.5, sigma, s)?,
            };
            write_feature_csv(&data, BufWriter::new(File::create(&out)?))?;
            println!("wrote {} rows to {}", n, out.display());
        }
        Command::Train { config, out } => {
            let cfg = TrainConfig::from_toml(&read_text(&config)?)?;
            let run = train(&cfg)?;
            let log = write_run(&run, &out)?;
            println!("log: {}", log.display());
            if let Some(last) = run.records.last() {
                println!("final epoch {}: acc_test {:.4}", last.epoch, last.acc_test);
            }
            if let RunStatus::Diverged { epoch, reason } = run.status {
                return Err(Failure::Diverged(format!("diverged at epoch {epoch}: {reason}")));
            }
        }
        Command::Sweep { config, out, threads } => {
            let grid = SweepGrid::from_toml(&read_text(&config)?)?;
            let result = sweep(&grid, threads)?;
            result.write(&out)?;
            let failures = result.failures();
            println!(
                "{} runs, {} completed; aggregate in {}",
                result.cells.len(),
                result.cells.len() - failures.len(),
                out.join("sweep.csv").display()
            );
            for f in failures {
                log::warn!("{f}");
            }
        }
        Command::Report { logs, out } => {
            let files = report(&logs, &out)?;
            for p in &files.written {
                println!("wrote {}", p.display());
            }
            for s in &files.skipped {
                log::warn!("skipped {s}");
            }
        }
        Command::Baseline { config } => {
            let cfg = TrainConfig::from_toml(&read_text(&config)?)?;
            let b = random_baseline(&cfg)?;
            println!("acc_test {:.4}\npermuted_acc {:.4}", b.acc_test, b.permuted_acc);
        }
        Command::Etaeff {
            config,
            out,
            sigmas,
            fractions,
            seeds,
        } => {
            let cfg = TrainConfig::from_toml(&read_text(&config)?)?;
            let seeds = if seeds.is_empty() { vec![cfg.seed] } else { seeds };
            let rep = eta_experiment(&cfg, cfg.gamma, &sigmas, &fractions, &seeds)?;
            fs::create_dir_all(&out)?;
            fs::write(out.join("eta.csv"), rep.to_csv())?;
            let diagnosis = rep.diagnosis();
            fs::write(out.join("eta.txt"), &diagnosis)?;
            print!("{diagnosis}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
