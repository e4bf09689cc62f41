use super::report::{IterationRecord, QuadratureReport};
use super::{check_stop, quadrature, relative_change, JacobiMatrix, LanczosMode, SpectralFunction, StoppingCriteria};
use crate::diagnostics::{
    check_commutation, check_symmetry, check_traceless, monitor_alphas, DiagnosticsRecord, MonitorSettings,
};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spin::{verify_anticommutation, PauliString};
use crate::tt::{CompressionReport, CompressionSettings, TensorTrainOperator};
use std::path::PathBuf;
use std::time::Instant;

/// Residual below which a supplied witness counts as verified.
const WITNESS_TOL: f64 = 1e-10;
/// Residual below which the input is taken to have a symmetry kind.
const KIND_TOL: f64 = 1e-10;

/// Write each basis operator `U_i` to `dir/u_XXXXX.ttop` every `every` iterations.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpointing {
    pub dir: PathBuf,
    pub every: usize,
}

impl Checkpointing {
    pub fn file_name(iteration: usize) -> String {
        format!("u_{iteration:05}.ttop")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LanczosOptions {
    pub monitors: MonitorSettings,
    /// Keep every `U_i` in the report (memory grows linearly with K).
    pub retain_basis: bool,
    /// Candidate chiral witness, consulted by [`LanczosMode::Auto`].
    pub witness: Option<PauliString>,
    /// Largest tolerated `‖A − A*‖_F / ‖A‖_F`.
    pub hermiticity_tol: f64,
    pub checkpoint: Option<Checkpointing>,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            monitors: MonitorSettings::default(),
            retain_basis: false,
            witness: None,
            hermiticity_tol: 1e-8,
            checkpoint: None,
        }
    }
}

pub fn run_lanczos<T: Scalar>(
    a: &TensorTrainOperator<T>,
    f: &SpectralFunction,
    mode: LanczosMode,
    settings: &CompressionSettings,
    stop: &StoppingCriteria,
) -> Result<QuadratureReport<T>> {
    run_lanczos_with(a, f, mode, settings, stop, &LanczosOptions::default())
}

fn hermiticity_residual<T: Scalar>(a: &TensorTrainOperator<T>) -> Result<f64> {
    let norm = a.frobenius_norm()?;
    if norm == 0.0 {
        return Ok(0.0);
    }
    let diff = a.add_exact(&a.adjoint().scale(T::of_real(-1.0)))?;
    Ok(diff.frobenius_norm()? / norm)
}

fn resolve_mode<T: Scalar>(
    a: &TensorTrainOperator<T>,
    mode: LanczosMode,
    witness: Option<&PauliString>,
) -> Result<(LanczosMode, Option<String>, Option<String>)> {
    if mode != LanczosMode::Auto {
        return Ok((mode, None, witness.map(|w| w.to_string())));
    }
    let Some(w) = witness else {
        let reason = "no chiral witness available, running vanilla".to_string();
        log::info!("{reason}");
        return Ok((LanczosMode::Vanilla, Some(reason), None));
    };
    if w.len() != a.len() {
        let reason = format!(
            "witness has {} sites but operator has {}, running vanilla",
            w.len(),
            a.len()
        );
        log::warn!("{reason}");
        return Ok((LanczosMode::Vanilla, Some(reason), None));
    }
    let residual = verify_anticommutation(a, w, &CompressionSettings::exact())?;
    if residual <= WITNESS_TOL {
        Ok((
            LanczosMode::ChiralFast,
            Some(format!("witness {w} verified (residual {residual:.1e})")),
            Some(w.to_string()),
        ))
    } else {
        let reason = format!("witness {w} failed verification (residual {residual:.1e}), running vanilla");
        log::warn!("{reason}");
        Ok((LanczosMode::Vanilla, Some(reason), None))
    }
}

struct Step<T: Scalar> {
    op: TensorTrainOperator<T>,
    worst: f64,
    unconverged: usize,
}

impl<T: Scalar> Step<T> {
    fn absorb(&mut self, (op, report): (TensorTrainOperator<T>, CompressionReport)) {
        self.op = op;
        self.worst = self.worst.max(report.residual);
        if report.truncated && !report.converged {
            self.unconverged += 1;
        }
    }
}

pub fn run_lanczos_with<T: Scalar>(
    a: &TensorTrainOperator<T>,
    f: &SpectralFunction,
    mode: LanczosMode,
    settings: &CompressionSettings,
    stop: &StoppingCriteria,
    options: &LanczosOptions,
) -> Result<QuadratureReport<T>> {
    settings.validate()?;
    stop.validate()?;
    if a.is_empty() {
        return Err(Error::InvalidArgument("operator has no sites".into()));
    }

    let hermiticity = hermiticity_residual(a)?;
    if hermiticity > options.hermiticity_tol {
        return Err(Error::NumericalFailure(format!(
            "operator is not Hermitian: relative residual {hermiticity:.3e} exceeds {:.1e}",
            options.hermiticity_tol
        )));
    }
    let (resolved, mode_reason, witness) = resolve_mode(a, mode, options.witness.as_ref())?;

    let monitors = &options.monitors;
    let a_norm = a.frobenius_norm()?;
    let identity = TensorTrainOperator::<T>::identity(a.len(), a.phys_dim())?;
    let beta1 = identity.frobenius_norm()?;
    let a_traceless = a.trace().modulus() <= 1e-12 * a_norm * beta1;
    let mut kinds = Vec::new();
    if monitors.symmetry_every > 0 {
        for &kind in &monitors.symmetry_kinds {
            if check_symmetry(a, kind)? <= KIND_TOL {
                kinds.push(kind);
            }
        }
    }
    if let Some(cp) = &options.checkpoint {
        std::fs::create_dir_all(&cp.dir)?;
    }

    let mut jacobi = JacobiMatrix::new(beta1);
    let mut estimates = Vec::new();
    let mut records = Vec::new();
    let mut warnings = Vec::new();
    let mut basis = Vec::new();
    let mut observed_alphas = Vec::new();
    let mut breakdown_at = None;
    let mut last_quadrature = None;

    let mut v = identity;
    let mut beta = beta1;
    let mut u_prev: Option<TensorTrainOperator<T>> = None;

    for i in 1..=stop.max_iterations {
        let started = Instant::now();
        let u = v.scale(T::of_real(1.0 / beta));

        let mut step = Step {
            op: TensorTrainOperator::zero(a.len(), a.phys_dim())?,
            worst: 0.0,
            unconverged: 0,
        };
        step.absorb(a.multiply(&u, settings)?);
        if let Some(prev) = &u_prev {
            step.absorb(step.op.add(&prev.scale(T::of_real(-beta)), settings)?);
        }
        let (alpha, alpha_observed) = match resolved {
            LanczosMode::Vanilla | LanczosMode::ChiralSafe => {
                let alpha = u.inner(&step.op)?.real();
                step.absorb(step.op.add(&u.scale(T::of_real(-alpha)), settings)?);
                let stored = if resolved == LanczosMode::Vanilla { alpha } else { 0.0 };
                (stored, Some(alpha))
            }
            LanczosMode::ChiralFast => {
                let observed = if monitors.alpha {
                    Some(u.inner(&step.op)?.real())
                } else {
                    None
                };
                (0.0, observed)
            }
            LanczosMode::Auto => unreachable!("auto is resolved before the loop"),
        };
        if step.unconverged > 0 {
            let msg = format!("iteration {i}: compression sweeps did not converge");
            log::warn!("{msg}");
            warnings.push(msg);
        }

        jacobi.alphas.push(alpha);
        if i > 1 {
            jacobi.betas.push(beta);
        }
        let t = jacobi.assemble(i)?;
        let q = quadrature(&t, beta1, f)?;
        let rel_change = estimates.last().map(|&prev| relative_change(prev, q.value));
        estimates.push(q.value);

        let mut diag = DiagnosticsRecord {
            iteration: i,
            alpha_abs: alpha_observed.map(f64::abs),
            ..Default::default()
        };
        if MonitorSettings::due(monitors.trace_every, i) {
            let check = check_traceless(&u)?;
            diag.trace_abs = Some(check.normalized);
            // U_1 is the scaled identity; the basis is traceless from U_2 on.
            if a_traceless && i > 1 && check.normalized > monitors.warn_threshold {
                diag.warnings.push("trace".into());
            }
        }
        if MonitorSettings::due(monitors.commutation_every, i) {
            let check = check_commutation(a, &u, settings)?;
            diag.commutation_residual = Some(check.residual);
            if check.residual > monitors.warn_threshold {
                diag.warnings.push("commutation".into());
            }
        }
        if MonitorSettings::due(monitors.symmetry_every, i) {
            for &kind in &kinds {
                let r = check_symmetry(&u, kind)?;
                if r > monitors.warn_threshold {
                    diag.warnings.push(format!("symmetry:{kind}"));
                }
                diag.symmetry_residuals.insert(kind, r);
            }
        }
        let alpha_warning =
            resolved.is_chiral() && alpha_observed.is_some_and(|x| x.abs() > monitors.warn_threshold * beta1);
        if alpha_warning {
            diag.warnings.push("alpha".into());
        }
        if let Some(x) = alpha_observed {
            observed_alphas.push(x);
        }

        let next_beta = step.op.frobenius_norm()?;
        if let Some(cp) = &options.checkpoint {
            if MonitorSettings::due(cp.every, i) {
                u.save(cp.dir.join(Checkpointing::file_name(i)))?;
            }
        }

        records.push(IterationRecord {
            iteration: i,
            alpha,
            alpha_observed,
            beta,
            next_beta,
            estimate: q.value,
            rel_change,
            max_bond: step.op.bond_dimension(),
            compression_residual: step.worst,
            alpha_warning,
            diagnostics: diag,
            wall_ms: started.elapsed().as_secs_f64() * 1e3,
        });
        last_quadrature = Some(q);

        if options.retain_basis {
            basis.push(u.clone());
        }
        u_prev = Some(u);
        v = step.op;

        if !next_beta.is_finite() {
            return Err(Error::NumericalFailure(format!(
                "residual norm is {next_beta} at iteration {i}"
            )));
        }
        if next_beta <= stop.breakdown_tol * beta1 {
            jacobi.betas.push(0.0);
            breakdown_at = Some(i + 1);
            break;
        }
        if check_stop(&estimates, stop) {
            break;
        }
        beta = next_beta;
    }

    let iterations = estimates.len();
    let converged = breakdown_at.is_some()
        || (!stop.fixed_iterations
            && iterations >= 2
            && relative_change(estimates[iterations - 2], estimates[iterations - 1]) < stop.rel_change_tol);
    let alpha_monitor = if resolved.is_chiral() {
        monitor_alphas(&observed_alphas, beta1, monitors.warn_threshold)
    } else {
        monitor_alphas(&jacobi.alphas, beta1, f64::INFINITY)
    };
    for r in &records {
        for w in &r.diagnostics.warnings {
            warnings.push(format!("iteration {}: {w} residual above threshold", r.iteration));
        }
    }

    Ok(QuadratureReport {
        requested_mode: mode,
        mode: resolved,
        mode_reason,
        witness,
        function: f.clone(),
        settings: settings.clone(),
        stop: stop.clone(),
        estimate: *estimates.last().expect("at least one iteration runs"),
        estimates,
        jacobi,
        quadrature: last_quadrature.expect("at least one iteration runs"),
        iterations,
        breakdown_at,
        converged,
        hermiticity_residual: hermiticity,
        records,
        alpha_monitor,
        warnings,
        basis,
    })
}
