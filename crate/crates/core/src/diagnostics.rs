//! Structural checks on Lanczos basis operators.
//!
//! In exact arithmetic, and starting from the identity, every basis operator
//! commutes with `A`, is traceless whenever `A` is, and inherits each of the
//! (per/centro)symmetry and (per/centro)hermiticity properties that `A` has.
//! For inputs with a spectrum symmetric around zero every diagonal Jacobi
//! coefficient vanishes. The checks here measure the departure from these
//! identities, normalized so thresholds are scale-free.

use crate::error::Result;
use crate::scalar::Scalar;
use crate::tt::{CompressionSettings, TensorTrainOperator};
use nalgebra::DMatrix;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SymmetryKind {
    Symmetric,
    Persymmetric,
    Centrosymmetric,
    Hermitian,
    Perhermitian,
    Centrohermitian,
}

impl SymmetryKind {
    pub const ALL: [SymmetryKind; 6] = [
        SymmetryKind::Symmetric,
        SymmetryKind::Persymmetric,
        SymmetryKind::Centrosymmetric,
        SymmetryKind::Hermitian,
        SymmetryKind::Perhermitian,
        SymmetryKind::Centrohermitian,
    ];

    /// The three kinds stated for real operators.
    pub fn is_real_kind(self) -> bool {
        matches!(
            self,
            SymmetryKind::Symmetric | SymmetryKind::Persymmetric | SymmetryKind::Centrosymmetric
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            SymmetryKind::Symmetric => "symmetric",
            SymmetryKind::Persymmetric => "persymmetric",
            SymmetryKind::Centrosymmetric => "centrosymmetric",
            SymmetryKind::Hermitian => "hermitian",
            SymmetryKind::Perhermitian => "perhermitian",
            SymmetryKind::Centrohermitian => "centrohermitian",
        }
    }
}

impl fmt::Display for SymmetryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SymmetryKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        SymmetryKind::ALL
            .into_iter()
            .find(|k| k.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| crate::Error::InvalidArgument(format!("unknown symmetry kind '{s}'")))
    }
}

/// Per-iteration monitor output.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DiagnosticsRecord {
    pub iteration: usize,
    /// `|Tr U_i| / ‖U_i‖_F`.
    pub trace_abs: Option<f64>,
    /// `‖A U_i − U_i A‖_F / (‖A‖_F ‖U_i‖_F)`.
    pub commutation_residual: Option<f64>,
    pub symmetry_residuals: BTreeMap<SymmetryKind, f64>,
    /// `|α_i|` as computed (also in modes that store zero).
    pub alpha_abs: Option<f64>,
    pub warnings: Vec<String>,
}

/// Which monitors run inside the Lanczos driver, and how often.
#[derive(Clone, Debug, PartialEq)]
pub struct MonitorSettings {
    /// Evaluate the trace check every this many iterations (0 disables).
    pub trace_every: usize,
    pub commutation_every: usize,
    pub symmetry_every: usize,
    /// Kinds to monitor; only those the input itself satisfies are checked.
    pub symmetry_kinds: Vec<SymmetryKind>,
    /// Compute `α_i` read-only in modes that would otherwise skip it.
    pub alpha: bool,
    /// Relative threshold above which a residual raises a warning.
    pub warn_threshold: f64,
}

impl Default for MonitorSettings {
    fn default() -> Self {
        Self {
            trace_every: 1,
            commutation_every: 5,
            symmetry_every: 5,
            symmetry_kinds: SymmetryKind::ALL.to_vec(),
            alpha: true,
            warn_threshold: 1e-6,
        }
    }
}

impl MonitorSettings {
    /// Everything off (used for timing).
    pub fn disabled() -> Self {
        Self {
            trace_every: 0,
            commutation_every: 0,
            symmetry_every: 0,
            symmetry_kinds: Vec::new(),
            alpha: false,
            warn_threshold: 1e-6,
        }
    }

    pub(crate) fn due(every: usize, iteration: usize) -> bool {
        every > 0 && iteration.is_multiple_of(every)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceCheck {
    /// `|Tr U|`.
    pub raw: f64,
    /// `|Tr U| / ‖U‖_F` (0 for the zero operator).
    pub normalized: f64,
}

pub fn check_traceless<T: Scalar>(u: &TensorTrainOperator<T>) -> Result<TraceCheck> {
    let raw = u.trace().modulus();
    let norm = u.frobenius_norm()?;
    Ok(TraceCheck {
        raw,
        normalized: if norm > 0.0 { raw / norm } else { 0.0 },
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CommutationCheck {
    pub residual: f64,
    /// Compression error folded through the same normalization.
    pub uncertainty: f64,
}

pub fn check_commutation<T: Scalar>(
    a: &TensorTrainOperator<T>,
    u: &TensorTrainOperator<T>,
    settings: &CompressionSettings,
) -> Result<CommutationCheck> {
    let (au, r1) = a.multiply(u, settings)?;
    let (ua, r2) = u.multiply(a, settings)?;
    let (diff, r3) = au.add(&ua.scale(T::of_real(-1.0)), settings)?;
    let scale = a.frobenius_norm()? * u.frobenius_norm()?;
    if scale == 0.0 {
        return Ok(CommutationCheck {
            residual: 0.0,
            uncertainty: 0.0,
        });
    }
    let (n_au, n_ua, n_diff) = (au.frobenius_norm()?, ua.frobenius_norm()?, diff.frobenius_norm()?);
    Ok(CommutationCheck {
        residual: n_diff / scale,
        uncertainty: (r1.residual * n_au + r2.residual * n_ua + r3.residual * n_diff) / scale,
    })
}

/// Per-site exchange string `J = σ_x^{⊗L}` (for `d = 2`), i.e. the anti-diagonal
/// permutation of size `d^L`.
pub fn exchange<T: Scalar>(length: usize, phys: usize) -> Result<TensorTrainOperator<T>> {
    let j = DMatrix::from_fn(phys, phys, |r, c| if r + c + 1 == phys { T::one() } else { T::zero() });
    TensorTrainOperator::product(&vec![j; length])
}

/// Normalized residual of `U` against one symmetry kind; all products are exact.
pub fn check_symmetry<T: Scalar>(u: &TensorTrainOperator<T>, kind: SymmetryKind) -> Result<f64> {
    let norm = u.frobenius_norm()?;
    if norm == 0.0 {
        return Ok(0.0);
    }
    let j = exchange::<T>(u.len(), u.phys_dim())?;
    let (lhs, rhs) = match kind {
        SymmetryKind::Symmetric => (u.clone(), u.transpose()),
        SymmetryKind::Hermitian => (u.clone(), u.adjoint()),
        SymmetryKind::Persymmetric => (u.multiply_exact(&j)?, j.multiply_exact(&u.transpose())?),
        SymmetryKind::Perhermitian => (u.multiply_exact(&j)?, j.multiply_exact(&u.adjoint())?),
        SymmetryKind::Centrosymmetric => (j.multiply_exact(u)?, u.multiply_exact(&j)?),
        SymmetryKind::Centrohermitian => (j.multiply_exact(u)?, u.conjugate().multiply_exact(&j)?),
    };
    let diff = lhs.add_exact(&rhs.scale(T::of_real(-1.0)))?;
    Ok(diff.frobenius_norm()? / norm)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlphaWarning {
    pub iteration: usize,
    pub alpha: f64,
}

/// Result of scanning the diagonal Jacobi coefficients.
///
/// A clean scan is a necessary condition for an accurate chiral run, never a
/// certificate of accuracy; `necessary_only` is always set to make that
/// explicit to consumers of the report.
#[derive(Clone, Debug, PartialEq)]
pub struct AlphaMonitor {
    pub warnings: Vec<AlphaWarning>,
    pub max_abs: f64,
    pub necessary_only: bool,
}

/// Flags every `|α_i| > tol · β_1` (iterations are 1-based).
pub fn monitor_alphas(alphas: &[f64], beta1: f64, tol: f64) -> AlphaMonitor {
    let warnings = alphas
        .iter()
        .enumerate()
        .filter(|(_, a)| a.abs() > tol * beta1)
        .map(|(n, a)| AlphaWarning {
            iteration: n + 1,
            alpha: *a,
        })
        .collect();
    AlphaMonitor {
        warnings,
        max_abs: alphas.iter().fold(0.0f64, |m, a| m.max(a.abs())),
        necessary_only: true,
    }
}
