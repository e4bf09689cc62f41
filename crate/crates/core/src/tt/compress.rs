//! Bond-dimension compression: canonicalization, SVD truncation and
//! alternating single-site least-squares refinement.

use super::{Core, TensorTrainOperator};
use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Scalar;
use nalgebra::DMatrix;

/// Parameters for [`TensorTrainOperator::compress`].
#[derive(Clone, Debug, PartialEq)]
pub struct CompressionSettings {
    /// Hard cap `D_max` on every bond.
    pub max_bond: usize,
    /// Singular values below `svd_cutoff · σ_max` (per bond) are dropped.
    pub svd_cutoff: f64,
    /// Upper bound on full left-right ALS sweeps after SVD truncation.
    pub max_sweeps: usize,
    /// Sweeps stop once the relative residual changes by less than this.
    pub sweep_tol: f64,
}

impl Default for CompressionSettings {
    fn default() -> Self {
        Self {
            max_bond: 50,
            svd_cutoff: 0.0,
            max_sweeps: 4,
            sweep_tol: 1e-8,
        }
    }
}

impl CompressionSettings {
    pub fn with_max_bond(max_bond: usize) -> Self {
        Self {
            max_bond,
            ..Self::default()
        }
    }

    /// Truncation disabled: only numerically zero singular values are dropped.
    pub fn exact() -> Self {
        Self {
            max_bond: usize::MAX,
            svd_cutoff: 1e-14,
            max_sweeps: 0,
            sweep_tol: 1e-8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_bond < 1 {
            return Err(Error::InvalidArgument("max_bond must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.svd_cutoff) {
            return Err(Error::InvalidArgument(format!(
                "svd_cutoff must lie in [0, 1), got {}",
                self.svd_cutoff
            )));
        }
        if self.sweep_tol.is_nan() || self.sweep_tol <= 0.0 {
            return Err(Error::InvalidArgument("sweep_tol must be positive".into()));
        }
        Ok(())
    }
}

/// Outcome of one compression.
#[derive(Clone, Debug, PartialEq)]
pub struct CompressionReport {
    /// `‖result − input‖_F / ‖input‖_F` (0 for the zero operator).
    pub residual: f64,
    /// Residual after the SVD stage followed by one entry per completed sweep.
    pub sweep_residuals: Vec<f64>,
    /// Whether any singular value was discarded.
    pub truncated: bool,
    /// False when the sweep budget ran out before the residual settled.
    pub converged: bool,
}

impl CompressionReport {
    fn exact() -> Self {
        Self {
            residual: 0.0,
            sweep_residuals: vec![0.0],
            truncated: false,
            converged: true,
        }
    }
}

/// Relative truncation weight below which ALS refinement is skipped.
const REFINE_THRESHOLD: f64 = 1e-10;

impl<T: Scalar> TensorTrainOperator<T> {
    /// Compresses to at most `settings.max_bond`.
    ///
    /// Pipeline: left-canonicalize by QR, truncate right-to-left by SVD, then
    /// refine with single-site ALS sweeps while the residual keeps improving.
    pub fn compress(&self, settings: &CompressionSettings) -> Result<(Self, CompressionReport)> {
        settings.validate()?;
        let phys = self.phys;
        let len = self.len();

        let mut cores = self.cores.clone();
        left_canonicalize(&mut cores);
        let norm = cores[len - 1]
            .data
            .iter()
            .map(|v| v.modulus_squared())
            .sum::<f64>()
            .sqrt();
        if norm == 0.0 || !norm.is_finite() {
            if !norm.is_finite() {
                return Err(Error::NumericalFailure("non-finite operator norm".into()));
            }
            return Ok((Self::zero(len, phys)?, CompressionReport::exact()));
        }

        let mut discarded = 0.0f64;
        let mut truncated = false;
        for k in (1..len).rev() {
            let m = cores[k].right_unfolding();
            let right = cores[k].right;
            let svd = linalg::svd(&m)?;
            let sigma_max = svd.s[0];
            let keep = svd
                .s
                .iter()
                .take_while(|&&s| s > 0.0 && s > settings.svd_cutoff * sigma_max)
                .count()
                .clamp(1, settings.max_bond);
            for &s in &svd.s[keep..] {
                if s > 0.0 {
                    truncated = true;
                }
                discarded += s * s;
            }
            let vt_kept = svd.v_adjoint.rows(0, keep).into_owned();
            let us = DMatrix::from_fn(svd.u.nrows(), keep, |r, c| svd.u[(r, c)] * T::of_real(svd.s[c]));
            cores[k] = Core::from_right_unfolding(vt_kept, phys, right);
            let prev_left = cores[k - 1].left;
            let merged = linalg::matmul(&cores[k - 1].left_unfolding(), &us);
            cores[k - 1] = Core::from_left_unfolding(merged, prev_left, phys);
        }

        let svd_residual = (discarded.sqrt() / norm).min(1.0);
        let mut report = CompressionReport {
            residual: if truncated { svd_residual } else { 0.0 },
            sweep_residuals: vec![if truncated { svd_residual } else { 0.0 }],
            truncated,
            converged: true,
        };

        if truncated && settings.max_sweeps > 0 && svd_residual > REFINE_THRESHOLD && len > 1 {
            let target = &self.cores;
            let mut prev = svd_residual;
            report.converged = false;
            for _ in 0..settings.max_sweeps {
                let res = als_sweep(target, &mut cores, norm);
                report.sweep_residuals.push(res);
                let change = (prev - res) / prev.max(f64::MIN_POSITIVE);
                prev = res;
                if change < settings.sweep_tol {
                    report.converged = true;
                    break;
                }
            }
            report.residual = prev;
            if !report.converged {
                log::debug!(
                    "compression sweeps did not settle after {} sweeps (residual {:.3e})",
                    settings.max_sweeps,
                    prev
                );
            }
        }

        Ok((Self::from_cores_unchecked(cores, phys), report))
    }
}

/// QR sweep leaving cores `0..L-1` left-orthonormal.
pub(super) fn left_canonicalize<T: Scalar>(cores: &mut [Core<T>]) {
    let len = cores.len();
    for k in 0..len.saturating_sub(1) {
        let (phys, left) = (cores[k].phys, cores[k].left);
        let (q, r) = linalg::qr(&cores[k].left_unfolding());
        cores[k] = Core::from_left_unfolding(q, left, phys);
        let next = &cores[k + 1];
        let (next_phys, next_right) = (next.phys, next.right);
        let merged = linalg::matmul(&r, &next.right_unfolding());
        cores[k + 1] = Core::from_right_unfolding(merged, next_phys, next_right);
    }
}

/// Optimal single-site core `L_env · X_k · R_env`.
fn local_fit<T: Scalar>(left_env: &DMatrix<T>, x: &Core<T>, right_env: &DMatrix<T>) -> DMatrix<T> {
    let d2 = x.phys * x.phys;
    let t = linalg::matmul(left_env, &x.right_unfolding());
    let t = DMatrix::from_column_slice(left_env.nrows() * d2, x.right, t.as_slice());
    linalg::matmul(&t, right_env)
}

/// `R_b[x, y] = Σ X_b[x, p, x'] R_{b+1}[x', y'] conj(Y_b[y, p, y'])`.
fn extend_right<T: Scalar>(right_env: &DMatrix<T>, x: &Core<T>, y: &Core<T>) -> DMatrix<T> {
    let t = linalg::matmul(&x.left_unfolding(), right_env);
    let t = DMatrix::from_column_slice(x.left, x.phys * x.phys * y.right, t.as_slice());
    linalg::matmul_adjoint(&t, &y.right_unfolding())
}

/// `L_{b+1}[y', x'] = Σ conj(Y_b[y, p, y']) L_b[y, x] X_b[x, p, x']`.
fn extend_left<T: Scalar>(left_env: &DMatrix<T>, x: &Core<T>, y: &Core<T>) -> DMatrix<T> {
    let t = linalg::matmul(left_env, &x.right_unfolding());
    let t = DMatrix::from_column_slice(y.left * x.phys * x.phys, x.right, t.as_slice());
    linalg::adjoint_matmul(&y.left_unfolding(), &t)
}

/// One left-to-right plus right-to-left ALS sweep fitting `fit` to `target`.
///
/// `fit` must enter right-canonical (orthogonality centre at site 0) and leaves
/// in the same gauge. Returns the relative residual after the sweep.
fn als_sweep<T: Scalar>(target: &[Core<T>], fit: &mut [Core<T>], target_norm: f64) -> f64 {
    let len = fit.len();
    let phys = fit[0].phys;
    let one = DMatrix::from_element(1, 1, T::one());

    let mut right_envs = vec![one.clone(); len + 1];
    for b in (1..len).rev() {
        right_envs[b] = extend_right(&right_envs[b + 1], &target[b], &fit[b]);
    }
    let mut left_envs = vec![one.clone(); len + 1];
    let mut centre_norm_sq = 0.0;

    for b in 0..len {
        let left = fit[b].left;
        let local = local_fit(&left_envs[b], &target[b], &right_envs[b + 1]);
        if b + 1 == len {
            centre_norm_sq = local.norm_squared();
            fit[b] = Core::from_left_unfolding(local, left, phys);
            break;
        }
        let (q, _) = linalg::qr(&local);
        fit[b] = Core::from_left_unfolding(q, left, phys);
        // the next core is overwritten by its own fit; only its left bond must track q
        let next = &fit[b + 1];
        if next.left != fit[b].right {
            fit[b + 1] = Core::zeros(fit[b].right, phys, next.right);
        }
        left_envs[b + 1] = extend_left(&left_envs[b], &target[b], &fit[b]);
    }

    for b in (0..len).rev() {
        let right = fit[b].right;
        let local = local_fit(&left_envs[b], &target[b], &right_envs[b + 1]);
        let local = DMatrix::from_column_slice(fit[b].left, phys * phys * right, local.as_slice());
        if b == 0 {
            centre_norm_sq = local.norm_squared();
            fit[0] = Core::from_right_unfolding(local, phys, right);
            break;
        }
        // LQ via QR of the adjoint
        let q_adj = linalg::qr(&local.adjoint()).0.adjoint();
        fit[b] = Core::from_right_unfolding(q_adj, phys, right);
        let prev = &fit[b - 1];
        if prev.right != fit[b].left {
            fit[b - 1] = Core::zeros(prev.left, phys, fit[b].left);
        }
        right_envs[b] = extend_right(&right_envs[b + 1], &target[b], &fit[b]);
    }

    let tn2 = target_norm * target_norm;
    ((tn2 - centre_norm_sq).max(0.0)).sqrt() / target_norm
}
