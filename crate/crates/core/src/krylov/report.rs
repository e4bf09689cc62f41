use super::{JacobiMatrix, LanczosMode, Quadrature, SpectralFunction, StoppingCriteria};
use crate::diagnostics::{AlphaMonitor, DiagnosticsRecord};
use crate::scalar::Scalar;
use crate::tt::{CompressionSettings, TensorTrainOperator};
use num_complex::Complex64;
use std::fmt::Write as _;

#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// `α_i` as stored in the Jacobi matrix.
    pub alpha: f64,
    /// `α_i` as computed, if it was (zero in `ChiralSafe` storage, but not here).
    pub alpha_observed: Option<f64>,
    /// `β_i = ‖V_{i−1}‖_F`.
    pub beta: f64,
    /// `‖V_i‖_F`, the next coupling.
    pub next_beta: f64,
    pub estimate: f64,
    pub rel_change: Option<f64>,
    /// Largest bond of the residual `V_i`.
    pub max_bond: usize,
    /// Largest relative compression residual among this step's operations.
    pub compression_residual: f64,
    pub alpha_warning: bool,
    pub diagnostics: DiagnosticsRecord,
    pub wall_ms: f64,
}

impl IterationRecord {
    /// The α value worth reporting: what was computed, or else what was stored.
    pub fn alpha_reported(&self) -> f64 {
        self.alpha_observed.unwrap_or(self.alpha)
    }
}

#[derive(Clone, Debug)]
pub struct QuadratureReport<T: Scalar = Complex64> {
    pub requested_mode: LanczosMode,
    pub mode: LanczosMode,
    /// Why `Auto` resolved the way it did.
    pub mode_reason: Option<String>,
    pub witness: Option<String>,
    pub function: SpectralFunction,
    pub settings: CompressionSettings,
    pub stop: StoppingCriteria,
    pub estimate: f64,
    pub estimates: Vec<f64>,
    pub jacobi: JacobiMatrix,
    pub quadrature: Quadrature,
    pub iterations: usize,
    /// Index `i` of the coupling `β_i` that vanished.
    pub breakdown_at: Option<usize>,
    pub converged: bool,
    pub hermiticity_residual: f64,
    pub records: Vec<IterationRecord>,
    pub alpha_monitor: AlphaMonitor,
    pub warnings: Vec<String>,
    /// All `U_i`, when retention was requested.
    pub basis: Vec<TensorTrainOperator<T>>,
}

impl<T: Scalar> QuadratureReport<T> {
    pub fn breakdown(&self) -> bool {
        self.breakdown_at.is_some()
    }

    pub fn max_abs_alpha(&self) -> f64 {
        self.alpha_monitor.max_abs
    }

    /// Mean wall time per iteration, optionally skipping leading warm-up iterations.
    pub fn mean_iteration_ms(&self, skip: usize) -> Option<f64> {
        let times: Vec<f64> = self.records.iter().skip(skip).map(|r| r.wall_ms).collect();
        (!times.is_empty()).then(|| times.iter().sum::<f64>() / times.len() as f64)
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "estimate        {:.12e}", self.estimate);
        let _ = writeln!(s, "function        {}", self.function);
        let _ = writeln!(s, "mode            {} (requested {})", self.mode, self.requested_mode);
        if let Some(reason) = &self.mode_reason {
            let _ = writeln!(s, "mode reason     {reason}");
        }
        if let Some(w) = &self.witness {
            let _ = writeln!(s, "witness         {w}");
        }
        let _ = writeln!(s, "iterations      {}", self.iterations);
        match self.breakdown_at {
            Some(i) => {
                let _ = writeln!(s, "breakdown       yes (beta_{i} = 0)");
            }
            None => {
                let _ = writeln!(s, "breakdown       no");
            }
        }
        let _ = writeln!(s, "converged       {}", self.converged);
        let _ = writeln!(s, "beta1           {:.12e}", self.jacobi.beta1);
        let _ = writeln!(s, "max |alpha|     {:.3e}", self.max_abs_alpha());
        let _ = writeln!(
            s,
            "alpha warnings  {} (small alpha is necessary, not sufficient, for accuracy)",
            self.alpha_monitor.warnings.len()
        );
        let _ = writeln!(s, "hermiticity     {:.3e}", self.hermiticity_residual);
        let _ = writeln!(
            s,
            "max_bond        {}  svd_cutoff {:e}",
            self.settings.max_bond, self.settings.svd_cutoff
        );
        let _ = writeln!(
            s,
            "iter  alpha           beta            estimate              trunc     trace     commute"
        );
        for r in &self.records {
            let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.2e}"));
            let _ = writeln!(
                s,
                "{:<5} {:<+15.8e} {:<15.8e} {:<21.14e} {:<9.2e} {:<9} {}",
                r.iteration,
                r.alpha_reported(),
                r.beta,
                r.estimate,
                r.compression_residual,
                opt(r.diagnostics.trace_abs),
                opt(r.diagnostics.commutation_residual),
            );
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        s
    }
}
