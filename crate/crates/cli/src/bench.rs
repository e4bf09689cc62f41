//! `ttrace bench`: fixed-length timed runs over a grid of chain lengths and bond caps.

use crate::config::ExperimentConfig;
use crate::error::CliError;
use rayon::prelude::*;
use serde::Serialize;
use std::path::PathBuf;
use ttrace::bench::{mean_and_min, time_run, BenchSample};
use ttrace::krylov::LanczosMode;
use ttrace::spin::construct_chiral_unitary;

#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    pub mode: String,
    pub length: usize,
    pub max_bond: usize,
    pub repetition: usize,
    pub iterations: usize,
    pub warmup: usize,
    pub mean_ms: f64,
    /// Mean over iterations whose input already sat at the bond cap.
    pub saturated_ms: Option<f64>,
    pub bond_reached: usize,
    pub estimate: f64,
}

/// Mean and minimum per-iteration time over repetitions of one grid point.
#[derive(Clone, Debug, Serialize)]
pub struct BenchSummaryRow {
    pub mode: String,
    pub length: usize,
    pub max_bond: usize,
    pub repetitions: usize,
    pub mean_ms: f64,
    pub min_ms: f64,
}

#[derive(Clone, Debug)]
pub struct BenchOutcome {
    pub rows: Vec<BenchRow>,
    pub summary: Vec<BenchSummaryRow>,
    pub csv_path: PathBuf,
    pub summary_path: PathBuf,
}

#[derive(Clone, Copy)]
struct Point {
    mode: LanczosMode,
    length: usize,
    max_bond: usize,
    repetition: usize,
}

fn resolve(mode: LanczosMode, chiral: bool, length: usize) -> LanczosMode {
    match mode {
        LanczosMode::Auto if chiral => LanczosMode::ChiralFast,
        LanczosMode::Auto => LanczosMode::Vanilla,
        m => {
            if m.is_chiral() && !chiral {
                log::warn!("{m} requested at L={length} without a chiral witness; estimates will be biased");
            }
            m
        }
    }
}

fn measure(cfg: &ExperimentConfig, p: Point) -> Result<BenchSample, CliError> {
    let spec = cfg.spec_with_length(p.length)?;
    let mode = resolve(p.mode, construct_chiral_unitary(&spec).is_some(), p.length);
    let f = cfg.spectral_function()?;
    let settings = cfg.compression(Some(p.max_bond));
    let h = spec.build_hamiltonian()?;
    let b = &cfg.bench;
    let sample = match h.to_real() {
        Some(real) => time_run(&real, &f, mode, &settings, b.iterations, b.warmup)?,
        None => time_run(&h, &f, mode, &settings, b.iterations, b.warmup)?,
    };
    log::info!(
        "{} L={} D={} rep {}: {:.2} ms/iteration",
        mode,
        p.length,
        p.max_bond,
        p.repetition,
        sample.mean_ms
    );
    Ok(sample)
}

/// Runs every `(mode, L, D_max, repetition)` point, sequentially unless
/// `bench.parallel` is set, and writes the raw and summary CSVs.
pub fn cmd_bench(cfg: &ExperimentConfig) -> Result<BenchOutcome, CliError> {
    cfg.validate()?;
    let b = &cfg.bench;
    let mut points = Vec::new();
    for &mode in &b.modes {
        for &length in &b.lengths {
            for &max_bond in &b.max_bonds {
                for repetition in 1..=b.repetitions {
                    points.push(Point {
                        mode: mode.into(),
                        length,
                        max_bond,
                        repetition,
                    });
                }
            }
        }
    }
    let samples: Vec<BenchSample> = if b.parallel {
        points.par_iter().map(|&p| measure(cfg, p)).collect::<Result<_, _>>()?
    } else {
        points.iter().map(|&p| measure(cfg, p)).collect::<Result<_, _>>()?
    };

    let rows: Vec<BenchRow> = points
        .iter()
        .zip(&samples)
        .map(|(p, s)| BenchRow {
            mode: s.mode.to_string(),
            length: p.length,
            max_bond: p.max_bond,
            repetition: p.repetition,
            iterations: s.iterations,
            warmup: s.warmup,
            mean_ms: s.mean_ms,
            saturated_ms: s.saturated_mean_ms(),
            bond_reached: s.bond_reached,
            estimate: s.estimate,
        })
        .collect();
    let summary: Vec<BenchSummaryRow> = samples
        .chunks(b.repetitions)
        .zip(points.chunks(b.repetitions))
        .map(|(group, pts)| {
            let (mean_ms, min_ms) = mean_and_min(group);
            BenchSummaryRow {
                mode: group[0].mode.to_string(),
                length: pts[0].length,
                max_bond: pts[0].max_bond,
                repetitions: group.len(),
                mean_ms,
                min_ms,
            }
        })
        .collect();

    let dir = &cfg.output.dir;
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let csv_path = dir.join(&b.csv);
    let summary_path = csv_path.with_extension("summary.csv");
    let mut w = csv::Writer::from_path(&csv_path)?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| CliError::io(&csv_path, e))?;
    let mut w = csv::Writer::from_path(&summary_path)?;
    for r in &summary {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| CliError::io(&summary_path, e))?;
    Ok(BenchOutcome {
        rows,
        summary,
        csv_path,
        summary_path,
    })
}
