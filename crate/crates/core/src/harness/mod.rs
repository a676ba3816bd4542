//! Training loop, sweeps, analytics over run logs, and report generation.

mod analytics;
mod baseline;
mod config;
mod eta;
mod objective;
mod record;
mod report;
mod rng;
mod sweep;
mod train;

pub use analytics::{
    correlation_report, efficiency_series, eta_eff, isotonic_increasing, pareto_extract,
    pareto_front, saturation_epoch, CorrelationMatrix, EfficiencySummary, EtaArm, ParetoPoint, Saturation, CORRELATION_METRICS,
};
pub use baseline::{random_baseline, BaselineResult};
pub use config::{ActivationName, CurvatureMode, DatasetKind, SweepGrid, TrainConfig};
pub use eta::{eta_experiment, EtaReport, EtaRow, EtaSigma, DEFAULT_FRACTIONS};
pub use objective::{soft_alignment_mi, Batch, Objective, ObjectiveTerms};
pub use record::{load_log_csv, read_log_csv, records_to_csv, write_log_csv, EpochRecord, LOG_HEADER};
pub use report::{load_run_logs, report, write_report, ReportFiles, RunLog};
pub use rng::{derive_seed, stream};
pub use sweep::{run_name, sweep, write_run, CellOutcome, SweepResult};
pub use train::{evaluate, prepare_data, train, train_on, PreparedData, RunStatus, TrainRun};

use thiserror::Error;

use crate::autodiff::AutodiffError;
use crate::data::DataError;
use crate::geometry::GeometryError;
use crate::infometrics::InfoError;
use crate::nets::NetsError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("{0}")]
    Analytics(String),
    #[error("target accuracy {target} is not reached by the {arm} arm")]
    TargetUnreachable { arm: String, target: f64 },
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Nets(#[from] NetsError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Info(#[from] InfoError),
    #[error(transparent)]
    Autodiff(#[from] AutodiffError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
