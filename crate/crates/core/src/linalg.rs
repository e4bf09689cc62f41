//! Dense factorizations, delegated to `faer` and returned as `nalgebra` matrices.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use faer::{Mat, MatRef, Side};
use nalgebra::DMatrix;

fn view<T: Scalar>(m: &DMatrix<T>) -> MatRef<'_, T> {
    MatRef::from_column_major_slice(m.as_slice(), m.nrows(), m.ncols())
}

fn to_faer<T: Scalar>(m: &DMatrix<T>) -> Mat<T> {
    view(m).to_owned()
}

fn from_faer<T: Scalar>(m: MatRef<'_, T>) -> DMatrix<T> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// `A B` through faer's blocked kernels (nalgebra's generic product is
/// unblocked for complex scalars).
pub(crate) fn matmul<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    let c = view(a) * view(b);
    from_faer(c.as_ref())
}

/// `Aᴴ B`.
pub(crate) fn adjoint_matmul<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    let c = view(a).adjoint() * view(b);
    from_faer(c.as_ref())
}

/// `A Bᴴ`.
pub(crate) fn matmul_adjoint<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    let c = view(a) * view(b).adjoint();
    from_faer(c.as_ref())
}

/// Thin SVD `M = U diag(s) Vᴴ` with `s` non-increasing.
pub(crate) struct Svd<T> {
    pub u: DMatrix<T>,
    pub s: Vec<f64>,
    pub v_adjoint: DMatrix<T>,
}

pub(crate) fn svd<T: Scalar>(m: &DMatrix<T>) -> Result<Svd<T>> {
    let f = to_faer(m);
    let svd = f
        .thin_svd()
        .map_err(|e| Error::NumericalFailure(format!("SVD did not converge: {e:?}")))?;
    let s: Vec<f64> = svd.S().column_vector().iter().map(|x| x.to_c64().re).collect();
    if s.iter().any(|x| !x.is_finite()) {
        return Err(Error::NumericalFailure(
            "SVD produced non-finite singular values".into(),
        ));
    }
    Ok(Svd {
        u: from_faer(svd.U()),
        s,
        v_adjoint: from_faer(svd.V()).adjoint(),
    })
}

/// Thin QR: `Q` is `m × min(m, n)` with orthonormal columns, `R` is `min(m, n) × n`.
pub(crate) fn qr<T: Scalar>(m: &DMatrix<T>) -> (DMatrix<T>, DMatrix<T>) {
    let f = to_faer(m);
    let qr = f.qr();
    (from_faer(qr.compute_thin_Q().as_ref()), from_faer(qr.thin_R()))
}

/// Eigenvalues of a Hermitian matrix in ascending order (lower triangle is read).
pub fn hermitian_eigenvalues<T: Scalar>(m: &DMatrix<T>) -> Result<Vec<f64>> {
    let f = to_faer(m);
    let mut values: Vec<f64> = f
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::NumericalFailure(format!("eigensolver did not converge: {e:?}")))?
        .into_iter()
        .collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Eigenpairs of a real symmetric matrix; eigenvectors are the columns.
pub fn symmetric_eigen(m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let f = to_faer(m);
    let eig = f
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::NumericalFailure(format!("eigensolver did not converge: {e:?}")))?;
    let values: Vec<f64> = eig.S().column_vector().iter().copied().collect();
    Ok((values, from_faer(eig.U())))
}
