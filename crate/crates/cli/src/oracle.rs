//! `ttrace oracle`: exact `Tr f(H)` by dense diagonalization.

use crate::config::ExperimentConfig;
use crate::error::CliError;
use std::fmt::Write as _;
use ttrace::oracle::{dense_eigenvalues, point_symmetry_defect, DenseOperator};
use ttrace::spin::construct_chiral_unitary;

#[derive(Clone, Debug)]
pub struct OracleReport {
    pub dim: usize,
    pub value: f64,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    /// Mismatch between the spectrum and its negation.
    pub symmetry_defect: f64,
    pub witness: Option<String>,
}

impl OracleReport {
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "dimension       {}", self.dim);
        let _ = writeln!(s, "exact           {:.12e}", self.value);
        let _ = writeln!(
            s,
            "spectrum        [{:.6e}, {:.6e}]",
            self.min_eigenvalue, self.max_eigenvalue
        );
        let _ = writeln!(s, "point symmetry  {:.2e}", self.symmetry_defect);
        let _ = writeln!(s, "witness         {}", self.witness.as_deref().unwrap_or("none"));
        s
    }
}

pub fn cmd_oracle(cfg: &ExperimentConfig) -> Result<OracleReport, CliError> {
    cfg.validate()?;
    let spec = cfg.spec()?;
    let f = cfg.spectral_function()?;
    let h = spec.build_hamiltonian()?;
    let dim = 1usize
        .checked_shl(spec.length() as u32)
        .filter(|&d| d <= cfg.oracle.max_dim && spec.length() < usize::BITS as usize)
        .ok_or_else(|| {
            CliError::Config(format!(
                "dense dimension 2^{} exceeds oracle.max_dim = {}",
                spec.length(),
                cfg.oracle.max_dim
            ))
        })?;
    let dense = DenseOperator::with_cap(h.to_dense_capped(dim)?, cfg.oracle.max_dim)?;
    let eig = dense_eigenvalues(&dense)?;
    let value = eig.iter().map(|&x| f.apply(x)).sum::<f64>();
    if !value.is_finite() {
        return Err(ttrace::Error::NumericalFailure(format!("exact trace is {value}")).into());
    }
    Ok(OracleReport {
        dim,
        value,
        min_eigenvalue: eig.iter().copied().fold(f64::INFINITY, f64::min),
        max_eigenvalue: eig.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        symmetry_defect: point_symmetry_defect(&eig),
        witness: construct_chiral_unitary(&spec).map(|w| w.unitary.to_string()),
    })
}
