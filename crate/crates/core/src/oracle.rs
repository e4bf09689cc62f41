//! Dense brute-force references for small systems.
//!
//! Nothing here touches tensor-train arithmetic: Hamiltonians are summed from
//! dense Kronecker products of Pauli strings, traces come from a full
//! eigendecomposition, and the global Lanczos recurrence runs on plain
//! matrices. Results serve as ground truth for the tensor-train path.

use crate::error::{Error, Result};
use crate::krylov::{JacobiMatrix, SpectralFunction};
use crate::linalg::hermitian_eigenvalues;
use crate::spin::InteractionSpec;
use crate::tt::{TensorTrainOperator, DEFAULT_DENSE_CAP};
use crate::Scalar;
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Relative hermiticity tolerance for eigendecomposition.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// `β_{i+1} ≤ BREAKDOWN_TOL · β_1` ends a dense run.
pub const BREAKDOWN_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    matrix: DMatrix<Complex64>,
}

impl DenseOperator {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        Self::with_cap(matrix, DEFAULT_DENSE_CAP)
    }

    pub fn with_cap(matrix: DMatrix<Complex64>, cap: usize) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::ShapeMismatch(format!(
                "dense operator must be square and non-empty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.nrows() > cap {
            return Err(Error::DenseCapExceeded {
                dim: matrix.nrows(),
                cap,
            });
        }
        Ok(Self { matrix })
    }

    pub fn from_real(matrix: &DMatrix<f64>) -> Result<Self> {
        Self::new(matrix.map(|x| Complex64::new(x, 0.0)))
    }

    pub fn from_tt<T: Scalar>(op: &TensorTrainOperator<T>) -> Result<Self> {
        Self::new(op.to_dense()?.map(|x| x.to_c64()))
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_real(&self) -> bool {
        self.matrix.iter().all(|z| z.im == 0.0)
    }

    /// `‖A − A*‖_F / ‖A‖_F`.
    pub fn hermiticity_residual(&self) -> f64 {
        let norm = self.matrix.norm();
        if norm == 0.0 {
            return 0.0;
        }
        (&self.matrix - self.matrix.adjoint()).norm() / norm
    }
}

/// Dense Hamiltonian summed from the spec's Pauli strings.
pub fn dense_hamiltonian(spec: &InteractionSpec) -> Result<DenseOperator> {
    let n = 1usize
        .checked_shl(spec.length() as u32)
        .filter(|&n| n <= DEFAULT_DENSE_CAP)
        .ok_or(Error::DenseCapExceeded {
            dim: usize::MAX,
            cap: DEFAULT_DENSE_CAP,
        })?;
    let mut h = DMatrix::<Complex64>::zeros(n, n);
    for (c, s) in spec.pauli_terms() {
        if c != 0.0 {
            h += s.to_dense() * Complex64::new(c, 0.0);
        }
    }
    DenseOperator::new(h)
}

/// Index sets of the connected components of the nonzero pattern.
fn components(m: &DMatrix<Complex64>) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut comp = vec![start];
        let mut k = 0;
        while k < comp.len() {
            let r = comp[k];
            for c in 0..n {
                if !seen[c] && (m[(r, c)] != Complex64::new(0.0, 0.0) || m[(c, r)] != Complex64::new(0.0, 0.0)) {
                    seen[c] = true;
                    comp.push(c);
                }
            }
            k += 1;
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// All eigenvalues, ascending. The matrix is first split into the diagonal
/// blocks of its sparsity pattern, which for spin Hamiltonians with a
/// conserved parity cuts the work substantially.
pub fn dense_eigenvalues(a: &DenseOperator) -> Result<Vec<f64>> {
    let res = a.hermiticity_residual();
    if res > HERMITIAN_TOL {
        return Err(Error::NumericalFailure(format!(
            "dense operator is not Hermitian (relative residual {res:.3e})"
        )));
    }
    let m = &a.matrix;
    let real = a.is_real();
    let mut values = Vec::with_capacity(a.dim());
    for comp in components(m) {
        let k = comp.len();
        if real {
            let block = DMatrix::from_fn(k, k, |i, j| m[(comp[i], comp[j])].re);
            values.extend(hermitian_eigenvalues(&block)?);
        } else {
            let block = DMatrix::from_fn(k, k, |i, j| m[(comp[i], comp[j])]);
            values.extend(hermitian_eigenvalues(&block)?);
        }
    }
    if values.iter().any(|x| !x.is_finite()) {
        return Err(Error::NumericalFailure(
            "dense eigensolver produced non-finite values".into(),
        ));
    }
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// `Tr f(A) = Σ_k f(λ_k)`.
pub fn dense_trace_fn(a: &DenseOperator, f: &SpectralFunction) -> Result<f64> {
    Ok(dense_eigenvalues(a)?.iter().map(|&l| f.apply(l)).sum())
}

/// Largest `|λ_k + λ_{n−1−k}|` over the sorted spectrum.
pub fn point_symmetry_defect(eigenvalues: &[f64]) -> f64 {
    let n = eigenvalues.len();
    (0..n)
        .map(|k| (eigenvalues[k] + eigenvalues[n - 1 - k]).abs())
        .fold(0.0, f64::max)
}

fn frob_inner(x: &DMatrix<Complex64>, y: &DMatrix<Complex64>) -> Complex64 {
    x.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum()
}

/// Output of the dense recurrence.
#[derive(Clone, Debug)]
pub struct DenseLanczos {
    /// `betas` has one entry per alpha: the trailing one is `β_{K+1}`,
    /// exactly zero after breakdown.
    pub jacobi: JacobiMatrix,
    /// `U_1..U_K` when retention was requested, else just the last one.
    pub basis: Vec<DMatrix<Complex64>>,
    /// `U_{K+1}` when the run stopped without breakdown.
    pub next: Option<DMatrix<Complex64>>,
    pub breakdown: bool,
}

impl DenseLanczos {
    pub fn iterations(&self) -> usize {
        self.jacobi.alphas.len()
    }
}

/// Global Lanczos in dense arithmetic, in the same line order as the
/// tensor-train driver and without truncation.
pub fn dense_global_lanczos(a: &DenseOperator, k: usize, retain_all: bool) -> Result<DenseLanczos> {
    if k == 0 {
        return Err(Error::InvalidArgument("at least one iteration is required".into()));
    }
    let n = a.dim();
    let m = a.matrix();
    let mut v = DMatrix::<Complex64>::identity(n, n);
    let beta1 = v.norm();
    let mut beta = beta1;
    let mut jacobi = JacobiMatrix::new(beta1);
    let mut basis = Vec::new();
    let mut u_prev: Option<DMatrix<Complex64>> = None;
    let mut breakdown = false;

    for i in 1..=k {
        let u = &v / Complex64::new(beta, 0.0);
        let mut w = m * &u;
        if let Some(prev) = &u_prev {
            w -= prev * Complex64::new(beta, 0.0);
        }
        let alpha = frob_inner(&u, &w).re;
        w -= &u * Complex64::new(alpha, 0.0);
        jacobi.alphas.push(alpha);
        if i > 1 {
            jacobi.betas.push(beta);
        }
        let next_beta = w.norm();
        if retain_all {
            basis.push(u.clone());
        }
        u_prev = Some(u);
        v = w;
        if next_beta <= BREAKDOWN_TOL * beta1 {
            jacobi.betas.push(0.0);
            breakdown = true;
            break;
        }
        beta = next_beta;
        if i == k {
            jacobi.betas.push(beta);
        }
    }
    if !retain_all {
        basis.extend(u_prev);
    }
    let next = (!breakdown).then(|| &v / Complex64::new(beta, 0.0));
    Ok(DenseLanczos {
        jacobi,
        basis,
        next,
        breakdown,
    })
}

/// `‖A 𝐔_i − 𝐔_i (T_i ⊗ I) − β_{i+1} U_{i+1} E_iᵀ‖_F / ‖A‖_F` with
/// `i = basis.len()`.
///
/// `basis` may carry `U_{i+1}` as an extra trailing entry; it is required
/// whenever `β_{i+1}` (the `i`-th entry of `j.betas`) is nonzero.
pub fn lanczos_residual(a: &DenseOperator, basis: &[DMatrix<Complex64>], j: &JacobiMatrix) -> Result<f64> {
    let i = j.alphas.len().min(basis.len());
    if i == 0 {
        return Err(Error::InvalidArgument("empty basis".into()));
    }
    if basis.len() > i + 1 {
        return Err(Error::ShapeMismatch(format!(
            "basis has {} entries for a Jacobi matrix of size {i}",
            basis.len()
        )));
    }
    let n = a.dim();
    if basis.iter().any(|u| u.nrows() != n || u.ncols() != n) {
        return Err(Error::ShapeMismatch("basis operator dimension differs from A".into()));
    }
    let beta_next = j.betas.get(i - 1).copied().unwrap_or(0.0);
    if beta_next != 0.0 && basis.len() != i + 1 {
        return Err(Error::ShapeMismatch(format!(
            "U_{} is needed for β_{} ≠ 0",
            i + 1,
            i + 1
        )));
    }
    let m = a.matrix();
    let c = |x: f64| Complex64::new(x, 0.0);
    let mut total = 0.0;
    for col in 0..i {
        let mut r = m * &basis[col] - &basis[col] * c(j.alphas[col]);
        if col > 0 {
            r -= &basis[col - 1] * c(j.betas[col - 1]);
        }
        let coupling = j.betas.get(col).copied().unwrap_or(0.0);
        if coupling != 0.0 {
            r -= &basis[col + 1] * c(coupling);
        }
        total += r.norm_squared();
    }
    let norm = m.norm();
    Ok(if norm == 0.0 { total.sqrt() } else { total.sqrt() / norm })
}

/// Largest `|⟨U_p, U_q⟩ − δ_pq|` over a basis.
pub fn orthonormality_defect(basis: &[DMatrix<Complex64>]) -> f64 {
    let mut worst = 0.0f64;
    for p in 0..basis.len() {
        for q in p..basis.len() {
            let delta = if p == q { 1.0 } else { 0.0 };
            worst = worst.max((frob_inner(&basis[p], &basis[q]) - Complex64::new(delta, 0.0)).norm());
        }
    }
    worst
}
