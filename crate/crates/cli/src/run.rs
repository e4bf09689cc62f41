//! `ttrace run`: one Lanczos run with per-iteration CSV, summary and optional checkpoints.

use crate::config::ExperimentConfig;
use crate::error::CliError;
use serde::Serialize;
use std::path::{Path, PathBuf};
use ttrace::krylov::{run_lanczos_with, Checkpointing, LanczosMode, LanczosOptions, QuadratureReport};
use ttrace::spin::construct_chiral_unitary;
use ttrace::{Scalar, TensorTrainOperator};

/// Fixed column order of the per-iteration CSV.
pub const CSV_COLUMNS: [&str; 10] = [
    "iter",
    "alpha",
    "beta",
    "estimate",
    "rel_change",
    "max_bond",
    "trace_resid",
    "commute_resid",
    "alpha_warn",
    "wall_ms",
];

#[derive(Serialize)]
struct CsvRow {
    iter: usize,
    alpha: f64,
    beta: f64,
    estimate: f64,
    rel_change: Option<f64>,
    max_bond: usize,
    trace_resid: Option<f64>,
    commute_resid: Option<f64>,
    alpha_warn: bool,
    wall_ms: f64,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub estimate: f64,
    pub mode: LanczosMode,
    pub witness: Option<String>,
    pub iterations: usize,
    pub breakdown: bool,
    /// `real` or `complex`.
    pub storage: &'static str,
    pub summary: String,
    pub csv_path: PathBuf,
    pub summary_path: PathBuf,
}

pub fn write_csv<T: Scalar>(report: &QuadratureReport<T>, path: &Path) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(CSV_COLUMNS)?;
    for r in &report.records {
        w.serialize(CsvRow {
            iter: r.iteration,
            alpha: r.alpha_reported(),
            beta: r.beta,
            estimate: r.estimate,
            rel_change: r.rel_change,
            max_bond: r.max_bond,
            trace_resid: r.diagnostics.trace_abs,
            commute_resid: r.diagnostics.commutation_residual,
            alpha_warn: r.alpha_warning,
            wall_ms: r.wall_ms,
        })?;
    }
    w.flush().map_err(|e| CliError::io(path, e))?;
    Ok(())
}

fn execute<T: Scalar>(
    h: &TensorTrainOperator<T>,
    cfg: &ExperimentConfig,
    options: &LanczosOptions,
) -> Result<QuadratureReport<T>, CliError> {
    Ok(run_lanczos_with(
        h,
        &cfg.spectral_function()?,
        cfg.run.mode.into(),
        &cfg.compression(None),
        &cfg.stopping(),
        options,
    )?)
}

fn finish<T: Scalar>(
    report: QuadratureReport<T>,
    cfg: &ExperimentConfig,
    storage: &'static str,
) -> Result<RunOutcome, CliError> {
    let dir = &cfg.output.dir;
    let csv_path = dir.join(&cfg.output.csv);
    let summary_path = dir.join(&cfg.output.summary);
    write_csv(&report, &csv_path)?;
    let mut summary = report.summary();
    summary.insert_str(0, &format!("storage         {storage}\n"));
    std::fs::write(&summary_path, &summary).map_err(|e| CliError::io(&summary_path, e))?;
    Ok(RunOutcome {
        estimate: report.estimate,
        mode: report.mode,
        witness: report.witness.clone(),
        iterations: report.iterations,
        breakdown: report.breakdown(),
        storage,
        summary,
        csv_path,
        summary_path,
    })
}

/// Builds the Hamiltonian, runs the recurrence and writes the artifacts into `output.dir`.
///
/// Real storage is used whenever the Hamiltonian has no imaginary entries.
pub fn cmd_run(cfg: &ExperimentConfig) -> Result<RunOutcome, CliError> {
    cfg.validate()?;
    let spec = cfg.spec()?;
    let dir = &cfg.output.dir;
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let config_path = dir.join("config.toml");
    std::fs::write(&config_path, cfg.to_toml()).map_err(|e| CliError::io(&config_path, e))?;

    let witness = construct_chiral_unitary(&spec);
    if let Some(w) = &witness {
        log::info!("chiral witness {} ({})", w.unitary, w.family);
    }
    let options = LanczosOptions {
        monitors: cfg.monitors()?,
        witness: witness.map(|w| w.unitary),
        checkpoint: (cfg.output.checkpoint_every > 0).then(|| Checkpointing {
            dir: dir.join(&cfg.output.checkpoint_dir),
            every: cfg.output.checkpoint_every,
        }),
        ..LanczosOptions::default()
    };
    let h = spec.build_hamiltonian()?;
    match h.to_real() {
        Some(real) => finish(execute(&real, cfg, &options)?, cfg, "real"),
        None => finish(execute(&h, cfg, &options)?, cfg, "complex"),
    }
}
