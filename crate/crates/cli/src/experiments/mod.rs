//! Experiment runners: each returns a typed report that renders to tables
//! and a JSON summary.

pub mod qcl;
pub mod qelm;
pub mod qrc;

use std::path::PathBuf;
use std::time::Instant;

use serde_json::{json, Value};

use crate::config::{require, ExperimentConfig, ExperimentKind, Section};
use crate::error::CliError;
use crate::output::{write_artifacts, Table};
use crate::seeds::SeedPlan;

/// Report of any experiment.
#[derive(Debug, Clone)]
pub enum Report {
    Classify(qelm::ClassifyReport),
    Surface(qelm::SurfaceReport),
    Qcl(qcl::QclReport),
    Emulate(qrc::EmulateReport),
    Capacity(qrc::CapacityReport),
}

impl Report {
    pub fn tables(&self) -> Vec<Table> {
        match self {
            Report::Classify(r) => r.tables(),
            Report::Surface(r) => r.tables(),
            Report::Qcl(r) => r.tables(),
            Report::Emulate(r) => r.tables(),
            Report::Capacity(r) => r.tables(),
        }
    }

    pub fn summary(&self) -> Value {
        match self {
            Report::Classify(r) => r.summary(),
            Report::Surface(r) => r.summary(),
            Report::Qcl(r) => r.summary(),
            Report::Emulate(r) => r.summary(),
            Report::Capacity(r) => r.summary(),
        }
    }
}

/// Validates `cfg` and runs it without touching the file system.
pub fn run(cfg: &ExperimentConfig, seeds: &mut SeedPlan) -> Result<Report, CliError> {
    cfg.validate()?;
    Ok(match cfg.experiment {
        ExperimentKind::QelmClassify => Report::Classify(qelm::classify(require(&cfg.qelm, Section::Qelm)?, seeds)?),
        ExperimentKind::QelmSurface => Report::Surface(qelm::surface(require(&cfg.surface, Section::Surface)?, seeds)?),
        ExperimentKind::QclFit => Report::Qcl(qcl::fit(require(&cfg.qcl, Section::Qcl)?, seeds)?),
        ExperimentKind::QrcEmulate => Report::Emulate(qrc::emulate(
            require(&cfg.reservoir, Section::Reservoir)?,
            require(&cfg.emulate, Section::Emulate)?,
            seeds,
        )?),
        ExperimentKind::QrcCapacity => Report::Capacity(qrc::capacity(
            require(&cfg.reservoir, Section::Reservoir)?,
            require(&cfg.capacity, Section::Capacity)?,
            seeds,
        )?),
    })
}

/// Outcome of [`execute`].
#[derive(Debug, Clone)]
pub struct Execution {
    pub report: Report,
    pub output_dir: PathBuf,
    /// Written files, `manifest.json` last.
    pub artifacts: Vec<PathBuf>,
    pub manifest: Value,
}

/// Runs `cfg` and writes its tables and manifest into the resolved output
/// directory.
pub fn execute(cfg: &ExperimentConfig) -> Result<Execution, CliError> {
    let started = Instant::now();
    let mut seeds = SeedPlan::new(cfg.seed);
    let report = run(cfg, &mut seeds)?;
    let tables = report.tables();
    let output_dir = cfg.resolved_output_dir();
    let manifest = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "experiment": cfg.experiment.name(),
        "seed": cfg.seed,
        "derived_seeds": seeds.issued(),
        "config": cfg,
        "config_toml": cfg.to_toml(),
        "wall_time_seconds": started.elapsed().as_secs_f64(),
        "artifacts": tables.iter().map(Table::file_name).collect::<Vec<_>>(),
        "summary": report.summary(),
    });
    let artifacts = write_artifacts(&output_dir, &tables, &manifest)?;
    Ok(Execution { report, output_dir, artifacts, manifest })
}
