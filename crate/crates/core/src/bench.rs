//! Fixed-length timed runs for comparing modes and measuring cost scaling.

use crate::diagnostics::MonitorSettings;
use crate::error::Result;
use crate::krylov::{run_lanczos_with, LanczosMode, LanczosOptions, SpectralFunction, StoppingCriteria};
use crate::scalar::Scalar;
use crate::tt::{CompressionSettings, TensorTrainOperator};

/// Timing of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchSample {
    pub mode: LanczosMode,
    pub length: usize,
    pub max_bond: usize,
    pub iterations: usize,
    /// Leading iterations left out of the mean.
    pub warmup: usize,
    pub per_iteration_ms: Vec<f64>,
    /// Largest bond of the residual after each iteration.
    pub per_iteration_bond: Vec<usize>,
    pub mean_ms: f64,
    pub estimate: f64,
    /// Largest bond reached by the residual operator.
    pub bond_reached: usize,
}

/// Runs `iterations` steps with all monitors off and records wall time per step.
pub fn time_run<T: Scalar>(
    h: &TensorTrainOperator<T>,
    f: &SpectralFunction,
    mode: LanczosMode,
    settings: &CompressionSettings,
    iterations: usize,
    warmup: usize,
) -> Result<BenchSample> {
    let options = LanczosOptions {
        monitors: MonitorSettings::disabled(),
        ..LanczosOptions::default()
    };
    let report = run_lanczos_with(h, f, mode, settings, &StoppingCriteria::fixed(iterations), &options)?;
    let per_iteration_ms: Vec<f64> = report.records.iter().map(|r| r.wall_ms).collect();
    let skip = warmup.min(per_iteration_ms.len().saturating_sub(1));
    let mean_ms = report.mean_iteration_ms(skip).unwrap_or(f64::NAN);
    Ok(BenchSample {
        mode: report.mode,
        length: h.len(),
        max_bond: settings.max_bond,
        iterations: report.iterations,
        warmup: skip,
        mean_ms,
        estimate: report.estimate,
        bond_reached: report.records.iter().map(|r| r.max_bond).max().unwrap_or(0),
        per_iteration_bond: report.records.iter().map(|r| r.max_bond).collect(),
        per_iteration_ms,
    })
}

impl BenchSample {
    /// Mean time over the iterations whose input `U_i` already sat at the bond cap.
    ///
    /// `U_i` inherits the bond of the previous residual, so iteration `i`
    /// counts once iteration `i − 1` reached `max_bond`.
    pub fn saturated_mean_ms(&self) -> Option<f64> {
        let times: Vec<f64> = self
            .per_iteration_ms
            .iter()
            .skip(1)
            .zip(&self.per_iteration_bond)
            .filter(|(_, &b)| b >= self.max_bond)
            .map(|(t, _)| *t)
            .collect();
        (!times.is_empty()).then(|| times.iter().sum::<f64>() / times.len() as f64)
    }
}

/// Mean and minimum of the per-run means.
pub fn mean_and_min(samples: &[BenchSample]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().map(|s| s.mean_ms).sum::<f64>() / n;
    let min = samples.iter().map(|s| s.mean_ms).fold(f64::INFINITY, f64::min);
    (mean, min)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
