//! `ttrace diagnose`: audits saved basis operators against the configured Hamiltonian.

use crate::config::ExperimentConfig;
use crate::error::CliError;
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use ttrace::diagnostics::{check_commutation, check_symmetry, check_traceless, SymmetryKind};
use ttrace::{CompressionSettings, TensorTrainOperator};

type Op = TensorTrainOperator<Complex64>;

/// Residuals of one checkpointed `U_i`.
#[derive(Clone, Debug)]
pub struct CheckpointAudit {
    pub iteration: usize,
    pub path: PathBuf,
    pub norm: f64,
    /// `|Tr U|`.
    pub trace_raw: f64,
    /// `|Tr U| / ‖U‖_F`.
    pub trace_resid: f64,
    pub commute_resid: f64,
    pub commute_uncertainty: f64,
    /// Only kinds the Hamiltonian itself has.
    pub symmetry: BTreeMap<SymmetryKind, f64>,
    /// `⟨U, H U⟩`, relative to `‖H‖_F`.
    pub alpha: f64,
}

#[derive(Clone, Debug)]
pub struct DiagnoseReport {
    pub checkpoints: Vec<CheckpointAudit>,
    /// Largest `|⟨U_i, U_j⟩ − δ_ij|` over the loaded operators.
    pub orthonormality: f64,
    pub inherited_kinds: Vec<SymmetryKind>,
}

impl DiagnoseReport {
    /// Largest residual across every check except the raw trace.
    pub fn worst(&self) -> f64 {
        self.checkpoints
            .iter()
            .flat_map(|c| {
                [c.commute_resid, (c.norm - 1.0).abs()]
                    .into_iter()
                    .chain(c.symmetry.values().copied())
                    .chain((c.iteration > 1).then_some(c.trace_resid))
            })
            .fold(self.orthonormality, f64::max)
    }

    pub fn table(&self) -> String {
        let mut s = String::new();
        let kinds: Vec<String> = self.inherited_kinds.iter().map(|k| k.to_string()).collect();
        let _ = writeln!(
            s,
            "{:<6} {:<10} {:<12} {:<10} {:<10} {:<10} {}",
            "iter",
            "norm",
            "|Tr U|",
            "trace",
            "commute",
            "alpha",
            kinds.join(" ")
        );
        for c in &self.checkpoints {
            let sym: Vec<String> = c.symmetry.values().map(|v| format!("{v:.2e}")).collect();
            let _ = writeln!(
                s,
                "{:<6} {:<10.6} {:<12.5e} {:<10.2e} {:<10.2e} {:<+10.2e} {}",
                c.iteration,
                c.norm,
                c.trace_raw,
                c.trace_resid,
                c.commute_resid,
                c.alpha,
                sym.join(" ")
            );
        }
        let _ = writeln!(s, "orthonormality defect {:.2e}", self.orthonormality);
        s
    }
}

fn checkpoint_files(dir: &Path) -> Result<Vec<(usize, PathBuf)>, CliError> {
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| CliError::io(dir, e))?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        let iteration = name
            .strip_prefix("u_")
            .and_then(|n| n.strip_suffix(".ttop"))
            .and_then(|n| n.parse::<usize>().ok());
        if let Some(i) = iteration {
            files.push((i, path));
        }
    }
    if files.is_empty() {
        return Err(CliError::Checkpoint {
            path: dir.to_path_buf(),
            reason: "no u_XXXXX.ttop files".into(),
        });
    }
    files.sort();
    Ok(files)
}

pub fn cmd_diagnose(cfg: &ExperimentConfig, dir: &Path) -> Result<DiagnoseReport, CliError> {
    cfg.validate()?;
    let h = cfg.spec()?.build_hamiltonian()?;
    let h_norm = h.frobenius_norm()?;
    let files = checkpoint_files(dir)?;
    let mut ops: Vec<Op> = Vec::with_capacity(files.len());
    for (_, path) in &files {
        let u = Op::load(path).map_err(|e| CliError::Checkpoint {
            path: path.clone(),
            reason: e.to_string(),
        })?;
        if u.len() != h.len() || u.phys_dim() != h.phys_dim() {
            return Err(CliError::Checkpoint {
                path: path.clone(),
                reason: format!("operator has {} sites, model has {}", u.len(), h.len()),
            });
        }
        ops.push(u);
    }

    let inherited_kinds: Vec<SymmetryKind> = SymmetryKind::ALL
        .into_iter()
        .map(|k| check_symmetry(&h, k).map(|r| (k, r)))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .filter(|(_, r)| *r <= 1e-10)
        .map(|(k, _)| k)
        .collect();
    let exact = CompressionSettings::exact();
    let mut checkpoints = Vec::new();
    for ((iteration, path), u) in files.iter().zip(&ops) {
        let trace = check_traceless(u)?;
        let commute = check_commutation(&h, u, &exact)?;
        let mut symmetry = BTreeMap::new();
        for &k in &inherited_kinds {
            symmetry.insert(k, check_symmetry(u, k)?);
        }
        let (hu, _) = h.multiply(u, &exact)?;
        let alpha = u.inner(&hu)?.re / h_norm.max(f64::MIN_POSITIVE);
        checkpoints.push(CheckpointAudit {
            iteration: *iteration,
            path: path.clone(),
            norm: u.frobenius_norm()?,
            trace_raw: trace.raw,
            trace_resid: trace.normalized,
            commute_resid: commute.residual,
            commute_uncertainty: commute.uncertainty,
            symmetry,
            alpha,
        });
    }
    let mut orthonormality = 0.0f64;
    for (i, a) in ops.iter().enumerate() {
        for (j, b) in ops.iter().enumerate().skip(i) {
            let g = a.inner(b)?;
            let target = if i == j { 1.0 } else { 0.0 };
            orthonormality = orthonormality.max((g - Complex64::new(target, 0.0)).norm());
        }
    }
    Ok(DiagnoseReport {
        checkpoints,
        orthonormality,
        inherited_kinds,
    })
}
