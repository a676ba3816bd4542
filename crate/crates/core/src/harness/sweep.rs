use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::{SweepGrid, TrainConfig};
use super::record::{records_to_csv, write_log_csv, EpochRecord};
use super::train::{train, RunStatus, TrainRun};
use super::HarnessError;
use crate::nets::save_checkpoint;

#[derive(Debug, Clone)]
pub enum CellOutcome {
    Finished(TrainRun),
    Failed { config: TrainConfig, error: String },
}

impl CellOutcome {
    pub fn config(&self) -> &TrainConfig {
        match self {
            CellOutcome::Finished(run) => &run.config,
            CellOutcome::Failed { config, .. } => config,
        }
    }

    pub fn completed(&self) -> Option<&TrainRun> {
        match self {
            CellOutcome::Finished(run) if run.status == RunStatus::Completed => Some(run),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub cells: Vec<CellOutcome>,
}

impl SweepResult {
    /// Final-epoch record of every completed run, in grid order.
    pub fn final_records(&self) -> Vec<EpochRecord> {
        self.cells
            .iter()
            .filter_map(|c| c.completed())
            .filter_map(|run| run.records.last().copied())
            .collect()
    }

    /// Every record of every run (including partial logs of diverged runs).
    pub fn all_records(&self) -> Vec<EpochRecord> {
        self.cells
            .iter()
            .filter_map(|c| match c {
                CellOutcome::Finished(run) => Some(run.records.iter().copied()),
                CellOutcome::Failed { .. } => None,
            })
            .flatten()
            .collect()
    }

    pub fn failures(&self) -> Vec<String> {
        self.cells
            .iter()
            .filter_map(|c| match c {
                CellOutcome::Finished(TrainRun {
                    config,
                    status: RunStatus::Diverged { epoch, reason },
                    ..
                }) => Some(format!("{}: diverged at epoch {epoch}: {reason}", run_name(config))),
                CellOutcome::Failed { config, error } => Some(format!("{}: {error}", run_name(config))),
                _ => None,
            })
            .collect()
    }

    /// Writes one log per run, `sweep.csv` with the final records, and
    /// `failures.txt` when any cell did not complete.
    pub fn write(&self, dir: &Path) -> Result<(), HarnessError> {
        fs::create_dir_all(dir)?;
        for cell in &self.cells {
            if let CellOutcome::Finished(run) = cell {
                write_run(run, dir)?;
            }
        }
        fs::write(dir.join("sweep.csv"), records_to_csv(&self.final_records()))?;
        let failures = self.failures();
        if !failures.is_empty() {
            fs::write(dir.join("failures.txt"), failures.join("\n") + "\n")?;
        }
        Ok(())
    }
}

/// Writes `<name>.csv` (the log, partial if the run diverged) and
/// `<name>.ckpt` (final parameters). A diverged run also gets
/// `<name>.status` holding the failure marker. Returns the log path.
pub fn write_run(run: &TrainRun, dir: &Path) -> Result<PathBuf, HarnessError> {
    fs::create_dir_all(dir)?;
    let name = run_name(&run.config);
    let log = dir.join(format!("{name}.csv"));
    write_log_csv(&log, &run.records)?;
    save_checkpoint(&dir.join(format!("{name}.ckpt")), &run.model.parameters())?;
    let status = dir.join(format!("{name}.status"));
    match &run.status {
        RunStatus::Completed => {
            if status.exists() {
                fs::remove_file(&status)?;
            }
        }
        RunStatus::Diverged { epoch, reason } => {
            fs::write(&status, format!("diverged at epoch {epoch}: {reason}\n"))?;
        }
    }
    Ok(log)
}

/// File stem identifying a run by its grid coordinates.
pub fn run_name(c: &TrainConfig) -> String {
    format!("run_b{:e}_g{:e}_z{}_s{:e}_seed{}", c.beta, c.gamma, c.z_dim, c.sigma, c.seed)
}

/// Trains every grid cell; runs execute concurrently on `threads` workers
/// (all available cores when `None`) and never share state, so the result
/// does not depend on the thread count. A failing cell is recorded and the
/// sweep goes on.
pub fn sweep(grid: &SweepGrid, threads: Option<usize>) -> Result<SweepResult, HarnessError> {
    let configs = grid.configs();
    if configs.is_empty() {
        return Err(HarnessError::Config("empty sweep grid".into()));
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| HarnessError::Config(e.to_string()))?;
    let cells = pool.install(|| {
        configs
            .par_iter()
            .map(|cfg| match train(cfg) {
                Ok(run) => CellOutcome::Finished(run),
                Err(e) => CellOutcome::Failed {
                    config: cfg.clone(),
                    error: e.to_string(),
                },
            })
            .collect()
    });
    Ok(SweepResult { cells })
}
