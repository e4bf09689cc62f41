//! Global Lanczos over tensor-train operators and its Gauss quadrature rule.

mod driver;
mod report;

pub use driver::{run_lanczos, run_lanczos_with, Checkpointing, LanczosOptions};
pub use report::{IterationRecord, QuadratureReport};

use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;
use nalgebra::DMatrix;
use std::fmt;
use std::str::FromStr;

/// How the diagonal Jacobi coefficients are handled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LanczosMode {
    /// Plain three-term recurrence.
    Vanilla,
    /// Neither computes nor subtracts `α_i`; stores zeros.
    ChiralFast,
    /// Computes and subtracts `α_i`, then stores zero.
    ChiralSafe,
    /// `ChiralFast` when a verified chiral witness is supplied, otherwise `Vanilla`.
    Auto,
}

impl LanczosMode {
    pub fn name(self) -> &'static str {
        match self {
            LanczosMode::Vanilla => "vanilla",
            LanczosMode::ChiralFast => "chiral-fast",
            LanczosMode::ChiralSafe => "chiral-safe",
            LanczosMode::Auto => "auto",
        }
    }

    pub fn is_chiral(self) -> bool {
        matches!(self, LanczosMode::ChiralFast | LanczosMode::ChiralSafe)
    }
}

impl fmt::Display for LanczosMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LanczosMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "vanilla" => Ok(LanczosMode::Vanilla),
            "chiral-fast" | "chiralfast" | "fast" => Ok(LanczosMode::ChiralFast),
            "chiral-safe" | "chiralsafe" | "safe" => Ok(LanczosMode::ChiralSafe),
            "auto" => Ok(LanczosMode::Auto),
            _ => Err(Error::InvalidArgument(format!("unknown Lanczos mode '{s}'"))),
        }
    }
}

/// Coefficients of the symmetric tridiagonal projection.
///
/// `alphas[k]` is `α_{k+1}`; `betas[k]` is `β_{k+2}`. A trailing zero in
/// `betas` marks breakdown.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct JacobiMatrix {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub beta1: f64,
}

impl JacobiMatrix {
    pub fn new(beta1: f64) -> Self {
        Self {
            alphas: Vec::new(),
            betas: Vec::new(),
            beta1,
        }
    }

    /// Number of diagonal entries.
    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    /// Whether the sequence ends in the breakdown marker.
    pub fn broke_down(&self) -> bool {
        self.betas.len() == self.alphas.len() && self.betas.last() == Some(&0.0)
    }

    /// Leading `i × i` block.
    pub fn assemble(&self, i: usize) -> Result<DMatrix<f64>> {
        if i == 0 || i > self.alphas.len() || i > self.betas.len() + 1 {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.alphas.len().min(self.betas.len() + 1),
            });
        }
        let mut t = DMatrix::zeros(i, i);
        for k in 0..i {
            t[(k, k)] = self.alphas[k];
        }
        for k in 0..i - 1 {
            t[(k, k + 1)] = self.betas[k];
            t[(k + 1, k)] = self.betas[k];
        }
        Ok(t)
    }
}

/// Free-function form of [`JacobiMatrix::assemble`].
pub fn assemble_jacobi(j: &JacobiMatrix, i: usize) -> Result<DMatrix<f64>> {
    j.assemble(i)
}

/// Scalar function applied to Ritz values.
#[derive(Clone, Debug, PartialEq)]
pub enum SpectralFunction {
    /// `x ↦ exp(−βx)`.
    ExpNegBeta {
        beta: f64,
    },
    /// `x ↦ x^p`.
    Power {
        exponent: i32,
    },
    Identity,
    /// Piecewise-linear through `(x, y)` points sorted by `x`; constant beyond the ends.
    Tabulated {
        points: Vec<(f64, f64)>,
    },
}

impl SpectralFunction {
    pub fn exp_neg_beta(beta: f64) -> Self {
        SpectralFunction::ExpNegBeta { beta }
    }

    pub fn tabulated(mut points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument(
                "tabulated function needs at least one point".into(),
            ));
        }
        if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::InvalidArgument("tabulated points must be finite".into()));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        if points.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidArgument("tabulated abscissae must be distinct".into()));
        }
        Ok(SpectralFunction::Tabulated { points })
    }

    pub fn apply(&self, x: f64) -> f64 {
        match self {
            SpectralFunction::ExpNegBeta { beta } => (-beta * x).exp(),
            SpectralFunction::Power { exponent } => x.powi(*exponent),
            SpectralFunction::Identity => x,
            SpectralFunction::Tabulated { points } => {
                let k = points.partition_point(|p| p.0 <= x);
                if k == 0 {
                    points[0].1
                } else if k == points.len() {
                    points[k - 1].1
                } else {
                    let (x0, y0) = points[k - 1];
                    let (x1, y1) = points[k];
                    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
                }
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SpectralFunction::ExpNegBeta { .. } => "exp_neg_beta",
            SpectralFunction::Power { .. } => "power",
            SpectralFunction::Identity => "identity",
            SpectralFunction::Tabulated { .. } => "tabulated",
        }
    }
}

impl fmt::Display for SpectralFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectralFunction::ExpNegBeta { beta } => write!(f, "exp_neg_beta(beta={beta})"),
            SpectralFunction::Power { exponent } => write!(f, "power(p={exponent})"),
            SpectralFunction::Identity => f.write_str("identity"),
            SpectralFunction::Tabulated { points } => write!(f, "tabulated({} points)", points.len()),
        }
    }
}

/// Gauss rule read off a Jacobi matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub ritz_values: Vec<f64>,
    /// `β_1² |V[0,k]|²`, summing to `β_1²`.
    pub weights: Vec<f64>,
}

pub fn quadrature(t: &DMatrix<f64>, beta1: f64, f: &SpectralFunction) -> Result<Quadrature> {
    if !t.is_square() || t.nrows() == 0 {
        return Err(Error::ShapeMismatch(format!(
            "quadrature needs a non-empty square matrix, got {}x{}",
            t.nrows(),
            t.ncols()
        )));
    }
    if t.iter().any(|x| !x.is_finite()) || !beta1.is_finite() {
        return Err(Error::NumericalFailure("non-finite Jacobi matrix entries".into()));
    }
    let (values, vectors) = symmetric_eigen(t)?;
    let b2 = beta1 * beta1;
    let mut pairs: Vec<(f64, f64)> = values
        .iter()
        .enumerate()
        .map(|(k, &l)| (l, b2 * vectors[(0, k)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let value = pairs.iter().map(|(l, w)| w * f.apply(*l)).sum::<f64>();
    if !value.is_finite() {
        return Err(Error::NumericalFailure(format!("quadrature value is {value}")));
    }
    Ok(Quadrature {
        value,
        ritz_values: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct StoppingCriteria {
    pub max_iterations: usize,
    pub rel_change_tol: f64,
    /// Relative to `β_1`.
    pub breakdown_tol: f64,
    /// Run exactly `max_iterations` steps unless the recurrence breaks down.
    pub fixed_iterations: bool,
}

impl Default for StoppingCriteria {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            rel_change_tol: 1e-6,
            breakdown_tol: 1e-12,
            fixed_iterations: false,
        }
    }
}

/// Guard for the relative change when the previous estimate is (near) zero.
pub const REL_CHANGE_FLOOR: f64 = 1e-300;

impl StoppingCriteria {
    pub fn with_max_iterations(k: usize) -> Self {
        Self {
            max_iterations: k,
            ..Self::default()
        }
    }

    pub fn fixed(k: usize) -> Self {
        Self {
            max_iterations: k,
            fixed_iterations: true,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidArgument("max_iterations must be at least 1".into()));
        }
        if self.rel_change_tol.is_nan()
            || self.breakdown_tol.is_nan()
            || self.rel_change_tol <= 0.0
            || self.breakdown_tol <= 0.0
        {
            return Err(Error::InvalidArgument("stopping tolerances must be positive".into()));
        }
        Ok(())
    }
}

pub fn relative_change(previous: f64, last: f64) -> f64 {
    (last - previous).abs() / previous.abs().max(REL_CHANGE_FLOOR)
}

/// True once the estimate has settled or the iteration budget is spent.
/// The iteration count is the number of estimates.
pub fn check_stop(estimates: &[f64], stop: &StoppingCriteria) -> bool {
    let n = estimates.len();
    if n >= stop.max_iterations {
        return true;
    }
    if stop.fixed_iterations || n < 2 {
        return false;
    }
    relative_change(estimates[n - 2], estimates[n - 1]) < stop.rel_change_tol
}
