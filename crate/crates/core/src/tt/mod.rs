//! Tensor-train (matrix product operator) representation of operators on `C^(d^L)`.
//!
//! An operator is stored as a chain of `L` cores. Core `k` carries a left bond
//! `D_{k-1}`, a physical row index, a physical column index and a right bond
//! `D_k`, with `D_0 = D_L = 1`. The entry `A[i_1..i_L, j_1..j_L]` is the product
//! of the core slices `C_1[i_1, j_1] ⋯ C_L[i_L, j_L]`.
//!
//! Core data is kept column-major over `(left, row, col, right)` so that both the
//! left unfolding `(left·d·d) × right` and the right unfolding
//! `left × (d·d·right)` are free reinterpretations of the same buffer.

mod compress;
pub mod io;

pub use compress::{CompressionReport, CompressionSettings};

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Scalar;
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Default cap on `d^L` for dense reconstruction.
pub const DEFAULT_DENSE_CAP: usize = 1 << 12;

/// Norms below this fraction of the operand scale are treated as zero.
pub const ZERO_TOL: f64 = 1e-12;

/// One four-index core tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct Core<T> {
    left: usize,
    right: usize,
    phys: usize,
    data: Vec<T>,
}

impl<T: Scalar> Core<T> {
    pub fn zeros(left: usize, phys: usize, right: usize) -> Self {
        Self {
            left,
            right,
            phys,
            data: vec![T::zero(); left * phys * phys * right],
        }
    }

    /// Builds a core from `f(left, row, col, right)`.
    pub fn from_fn(left: usize, phys: usize, right: usize, mut f: impl FnMut(usize, usize, usize, usize) -> T) -> Self {
        let mut core = Self::zeros(left, phys, right);
        for r in 0..right {
            for j in 0..phys {
                for i in 0..phys {
                    for l in 0..left {
                        let idx = core.index(l, i, j, r);
                        core.data[idx] = f(l, i, j, r);
                    }
                }
            }
        }
        core
    }

    /// Reinterprets a `(left·d·d) × right` matrix as a core.
    pub(crate) fn from_left_unfolding(m: DMatrix<T>, left: usize, phys: usize) -> Self {
        debug_assert_eq!(m.nrows(), left * phys * phys);
        let right = m.ncols();
        Self {
            left,
            right,
            phys,
            data: m.as_slice().to_vec(),
        }
    }

    /// Reinterprets a `left × (d·d·right)` matrix as a core.
    pub(crate) fn from_right_unfolding(m: DMatrix<T>, phys: usize, right: usize) -> Self {
        debug_assert_eq!(m.ncols(), phys * phys * right);
        let left = m.nrows();
        Self {
            left,
            right,
            phys,
            data: m.as_slice().to_vec(),
        }
    }

    #[inline]
    fn index(&self, l: usize, i: usize, j: usize, r: usize) -> usize {
        l + self.left * (i + self.phys * (j + self.phys * r))
    }

    #[inline]
    pub fn get(&self, l: usize, i: usize, j: usize, r: usize) -> T {
        self.data[self.index(l, i, j, r)]
    }

    pub fn left_dim(&self) -> usize {
        self.left
    }

    pub fn right_dim(&self) -> usize {
        self.right
    }

    pub fn phys_dim(&self) -> usize {
        self.phys
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub(crate) fn left_unfolding(&self) -> DMatrix<T> {
        DMatrix::from_column_slice(self.left * self.phys * self.phys, self.right, &self.data)
    }

    pub(crate) fn right_unfolding(&self) -> DMatrix<T> {
        DMatrix::from_column_slice(self.left, self.phys * self.phys * self.right, &self.data)
    }

    /// Sum over the physical diagonal: the `left × right` bond matrix `Σ_i C[:, i, i, :]`.
    fn physical_trace(&self) -> DMatrix<T> {
        DMatrix::from_fn(self.left, self.right, |l, r| {
            (0..self.phys).fold(T::zero(), |acc, i| acc + self.get(l, i, i, r))
        })
    }

    fn map_physical(&self, transpose: bool, conjugate: bool) -> Self {
        Self::from_fn(self.left, self.phys, self.right, |l, i, j, r| {
            let v = if transpose {
                self.get(l, j, i, r)
            } else {
                self.get(l, i, j, r)
            };
            if conjugate {
                v.conjugate()
            } else {
                v
            }
        })
    }
}

/// Operator on `C^(d^L)` stored as a tensor train.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorTrainOperator<T = Complex64> {
    cores: Vec<Core<T>>,
    phys: usize,
}

impl<T: Scalar> TensorTrainOperator<T> {
    /// Validates bond bookkeeping and wraps the cores.
    pub fn new(cores: Vec<Core<T>>) -> Result<Self> {
        let first = cores
            .first()
            .ok_or_else(|| Error::InvalidArgument("a tensor train needs at least one core".into()))?;
        let phys = first.phys;
        if phys == 0 {
            return Err(Error::InvalidArgument("physical dimension must be positive".into()));
        }
        if first.left != 1 || cores.last().map(|c| c.right) != Some(1) {
            return Err(Error::ShapeMismatch("boundary bonds must have dimension 1".into()));
        }
        for (k, pair) in cores.windows(2).enumerate() {
            if pair[0].right != pair[1].left {
                return Err(Error::ShapeMismatch(format!(
                    "bond {} mismatch: core {} has right bond {}, core {} has left bond {}",
                    k + 1,
                    k,
                    pair[0].right,
                    k + 1,
                    pair[1].left
                )));
            }
        }
        if let Some(k) = cores.iter().position(|c| c.phys != phys) {
            return Err(Error::ShapeMismatch(format!(
                "core {k} has physical dimension {} but core 0 has {phys}",
                cores[k].phys
            )));
        }
        if let Some(k) = cores.iter().position(|c| c.left == 0 || c.right == 0) {
            return Err(Error::ShapeMismatch(format!("core {k} has an empty bond")));
        }
        Ok(Self { cores, phys })
    }

    pub(crate) fn from_cores_unchecked(cores: Vec<Core<T>>, phys: usize) -> Self {
        Self { cores, phys }
    }

    /// `I_{d^L}` with bond dimension 1 everywhere.
    pub fn identity(length: usize, phys: usize) -> Result<Self> {
        if length < 1 {
            return Err(Error::InvalidArgument("identity needs L >= 1".into()));
        }
        if phys < 1 {
            return Err(Error::InvalidArgument("identity needs d >= 1".into()));
        }
        let core = Core::from_fn(1, phys, 1, |_, i, j, _| if i == j { T::one() } else { T::zero() });
        Ok(Self {
            cores: vec![core; length],
            phys,
        })
    }

    /// The zero operator with bond dimension 1.
    pub fn zero(length: usize, phys: usize) -> Result<Self> {
        let mut id = Self::identity(length, phys)?;
        id.cores[0] = Core::zeros(1, phys, 1);
        Ok(id)
    }

    /// Kronecker product of single-site `d × d` matrices (bond dimension 1).
    pub fn product(sites: &[DMatrix<T>]) -> Result<Self> {
        let phys = sites
            .first()
            .map(|m| m.nrows())
            .ok_or_else(|| Error::InvalidArgument("product of zero site operators".into()))?;
        let cores = sites
            .iter()
            .map(|m| {
                if m.nrows() != phys || m.ncols() != phys {
                    return Err(Error::ShapeMismatch(format!(
                        "site operator is {}x{}, expected {phys}x{phys}",
                        m.nrows(),
                        m.ncols()
                    )));
                }
                Ok(Core::from_fn(1, phys, 1, |_, i, j, _| m[(i, j)]))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(cores)
    }

    pub fn len(&self) -> usize {
        self.cores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cores.is_empty()
    }

    pub fn phys_dim(&self) -> usize {
        self.phys
    }

    pub fn cores(&self) -> &[Core<T>] {
        &self.cores
    }

    /// Matrix dimension `d^L`, or `None` on overflow.
    pub fn dim(&self) -> Option<usize> {
        self.phys.checked_pow(self.len() as u32)
    }

    /// Bond dimensions `D_0..=D_L`.
    pub fn bond_dims(&self) -> Vec<usize> {
        std::iter::once(1).chain(self.cores.iter().map(|c| c.right)).collect()
    }

    /// `max_k D_k`.
    pub fn bond_dimension(&self) -> usize {
        self.cores.iter().map(|c| c.right.max(c.left)).max().unwrap_or(1)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.len() != other.len() || self.phys != other.phys {
            return Err(Error::ShapeMismatch(format!(
                "operands have (L, d) = ({}, {}) and ({}, {})",
                self.len(),
                self.phys,
                other.len(),
                other.phys
            )));
        }
        Ok(())
    }

    /// `Tr X`, contracting each core's physical diagonal and multiplying the bond matrices.
    pub fn trace(&self) -> T {
        let mut acc = DMatrix::from_element(1, 1, T::one());
        for core in &self.cores {
            acc *= core.physical_trace();
        }
        acc[(0, 0)]
    }

    /// Frobenius inner product `Tr X* Y`.
    pub fn inner(&self, other: &Self) -> Result<T> {
        self.check_compatible(other)?;
        let mut env = DMatrix::from_element(1, 1, T::one());
        for (x, y) in self.cores.iter().zip(&other.cores) {
            env = transfer_step(&env, x, y);
        }
        Ok(env[(0, 0)])
    }

    /// `‖X‖_F`, read off the last core after a QR left-canonicalization.
    ///
    /// Going through the canonical form avoids the cancellation that
    /// `sqrt(<X, X>)` suffers when `X` is a nearly vanishing difference.
    pub fn frobenius_norm(&self) -> Result<f64> {
        let mut cores = self.cores.clone();
        compress::left_canonicalize(&mut cores);
        let last = &cores[cores.len() - 1];
        let norm = last.data.iter().map(|v| v.modulus_squared()).sum::<f64>().sqrt();
        if !norm.is_finite() {
            return Err(Error::NumericalFailure(format!("operator norm is {norm}")));
        }
        Ok(norm)
    }

    /// `c · X`, scaling the first core only.
    pub fn scale(&self, c: T) -> Self {
        let mut out = self.clone();
        for v in &mut out.cores[0].data {
            *v *= c;
        }
        out
    }

    /// Exact sum via block-diagonal core concatenation; bond dimensions add.
    pub fn add_exact(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let len = self.len();
        if len == 1 {
            let mut core = self.cores[0].clone();
            for (a, b) in core.data.iter_mut().zip(&other.cores[0].data) {
                *a += *b;
            }
            return Ok(Self::from_cores_unchecked(vec![core], self.phys));
        }
        let d = self.phys;
        let cores = self
            .cores
            .iter()
            .zip(&other.cores)
            .enumerate()
            .map(|(k, (x, y))| {
                let first = k == 0;
                let last = k + 1 == len;
                let left = if first { 1 } else { x.left + y.left };
                let right = if last { 1 } else { x.right + y.right };
                let mut core = Core::zeros(left, d, right);
                for r in 0..x.right {
                    for j in 0..d {
                        for i in 0..d {
                            for l in 0..x.left {
                                let idx = core.index(l, i, j, r);
                                core.data[idx] = x.get(l, i, j, r);
                            }
                        }
                    }
                }
                let (l0, r0) = (if first { 0 } else { x.left }, if last { 0 } else { x.right });
                for r in 0..y.right {
                    for j in 0..d {
                        for i in 0..d {
                            for l in 0..y.left {
                                let idx = core.index(l0 + l, i, j, r0 + r);
                                core.data[idx] += y.get(l, i, j, r);
                            }
                        }
                    }
                }
                core
            })
            .collect();
        Ok(Self::from_cores_unchecked(cores, d))
    }

    /// Exact product `self · other`, core-wise; bond dimensions multiply.
    pub fn multiply_exact(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let d = self.phys;
        let cores = self
            .cores
            .iter()
            .zip(&other.cores)
            .map(|(a, x)| {
                let left = a.left * x.left;
                let right = a.right * x.right;
                let mut core = Core::zeros(left, d, right);
                for rx in 0..x.right {
                    for ra in 0..a.right {
                        let r = ra + a.right * rx;
                        for j in 0..d {
                            for k in 0..d {
                                for lx in 0..x.left {
                                    let xv = x.get(lx, k, j, rx);
                                    if xv == T::zero() {
                                        continue;
                                    }
                                    for i in 0..d {
                                        for la in 0..a.left {
                                            let av = a.get(la, i, k, ra);
                                            let idx = core.index(la + a.left * lx, i, j, r);
                                            core.data[idx] += av * xv;
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
                core
            })
            .collect();
        Ok(Self::from_cores_unchecked(cores, d))
    }

    /// `X + Y` compressed under `settings`.
    pub fn add(&self, other: &Self, settings: &CompressionSettings) -> Result<(Self, CompressionReport)> {
        self.add_exact(other)?.compress(settings)
    }

    /// `A · X` compressed under `settings`.
    pub fn multiply(&self, other: &Self, settings: &CompressionSettings) -> Result<(Self, CompressionReport)> {
        self.multiply_exact(other)?.compress(settings)
    }

    /// Physical transpose of every core.
    pub fn transpose(&self) -> Self {
        self.map_cores(true, false)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        self.map_cores(true, true)
    }

    /// Entrywise complex conjugate.
    pub fn conjugate(&self) -> Self {
        self.map_cores(false, true)
    }

    fn map_cores(&self, transpose: bool, conjugate: bool) -> Self {
        let cores = self
            .cores
            .iter()
            .map(|c| c.map_physical(transpose, conjugate))
            .collect();
        Self::from_cores_unchecked(cores, self.phys)
    }

    /// Full `d^L × d^L` matrix; refused when `d^L` exceeds `cap`.
    ///
    /// Row and column indices are big-endian in the site order, matching the
    /// Kronecker product `C_1 ⊗ C_2 ⊗ ⋯`.
    pub fn to_dense_capped(&self, cap: usize) -> Result<DMatrix<T>> {
        let dim = self.dim().filter(|&n| n <= cap).ok_or(Error::DenseCapExceeded {
            dim: self.dim().unwrap_or(usize::MAX),
            cap,
        })?;
        let d = self.phys;
        // state[(row, col, bond)] with row/col over the sites contracted so far
        let mut n = 1usize;
        let mut bond = 1usize;
        let mut state = vec![T::one()];
        for core in &self.cores {
            let m = n * d;
            let mut next = vec![T::zero(); m * m * core.right];
            for r in 0..core.right {
                for b in 0..bond {
                    for j in 0..d {
                        for i in 0..d {
                            let c = core.get(b, i, j, r);
                            if c == T::zero() {
                                continue;
                            }
                            for col in 0..n {
                                for row in 0..n {
                                    let s = state[row + n * (col + n * b)];
                                    let nr = row * d + i;
                                    let nc = col * d + j;
                                    next[nr + m * (nc + m * r)] += s * c;
                                }
                            }
                        }
                    }
                }
            }
            state = next;
            n = m;
            bond = core.right;
        }
        debug_assert_eq!(n, dim);
        Ok(DMatrix::from_column_slice(dim, dim, &state))
    }

    /// [`Self::to_dense_capped`] with the default cap of `2^12`.
    pub fn to_dense(&self) -> Result<DMatrix<T>> {
        self.to_dense_capped(DEFAULT_DENSE_CAP)
    }

    /// Tensor-train decomposition of a dense `d^L × d^L` matrix by sequential SVDs.
    pub fn from_dense(
        matrix: &DMatrix<T>,
        phys: usize,
        settings: &CompressionSettings,
    ) -> Result<(Self, CompressionReport)> {
        let n = matrix.nrows();
        if matrix.ncols() != n || phys < 2 {
            return Err(Error::InvalidArgument(format!(
                "from_dense needs a square matrix and d >= 2, got {}x{} with d = {phys}",
                n,
                matrix.ncols()
            )));
        }
        let mut length = 0;
        let mut p = 1usize;
        while p < n {
            p *= phys;
            length += 1;
        }
        if p != n || length == 0 {
            return Err(Error::InvalidArgument(format!(
                "dimension {n} is not a power of {phys}"
            )));
        }
        // One bond-1 core per site would need a full rank-one split; instead build the
        // exact chain by peeling one site at a time off the left.
        let d2 = phys * phys;
        // tensor[(left, i_k, j_k, rest_rows, rest_cols)] flattened as matrix
        // rows (left, i_k, j_k), cols (rest_i, rest_j).
        let mut rest = n;
        let mut left = 1usize;
        let mut current: Vec<T> = Vec::with_capacity(n * n);
        // Reorder into (left=1, i_1, j_1, i_rest, j_rest), column-major in that order.
        for jr in 0..n / phys {
            for ir in 0..n / phys {
                for j1 in 0..phys {
                    for i1 in 0..phys {
                        let row = i1 * (n / phys) + ir;
                        let col = j1 * (n / phys) + jr;
                        current.push(matrix[(row, col)]);
                    }
                }
            }
        }
        let mut cores = Vec::with_capacity(length);
        for site in 0..length {
            if site + 1 == length {
                let m = DMatrix::from_column_slice(left * d2, 1, &current);
                cores.push(Core::from_left_unfolding(m, left, phys));
                break;
            }
            let sub = rest / phys;
            let m = DMatrix::from_column_slice(left * d2, sub * sub, &current);
            let (q, r) = linalg::qr(&m);
            let k = q.ncols();
            cores.push(Core::from_left_unfolding(q, left, phys));
            // r is k × (sub·sub) with columns (i_rest, j_rest); split off the next site.
            let next_sub = sub / phys;
            let mut next = Vec::with_capacity(k * sub * sub);
            for jr in 0..next_sub {
                for ir in 0..next_sub {
                    for j in 0..phys {
                        for i in 0..phys {
                            for l in 0..k {
                                let ri = i * next_sub + ir;
                                let rj = j * next_sub + jr;
                                next.push(r[(l, ri + sub * rj)]);
                            }
                        }
                    }
                }
            }
            current = next;
            left = k;
            rest = sub;
        }
        Self::new(cores)?.compress(settings)
    }

    /// Widens to complex storage.
    pub fn to_complex(&self) -> TensorTrainOperator<Complex64> {
        let cores = self
            .cores
            .iter()
            .map(|c| Core {
                left: c.left,
                right: c.right,
                phys: c.phys,
                data: c.data.iter().map(|v| v.to_c64()).collect(),
            })
            .collect();
        TensorTrainOperator::from_cores_unchecked(cores, self.phys)
    }
}

impl TensorTrainOperator<Complex64> {
    /// Real storage when every stored entry has zero imaginary part.
    pub fn to_real(&self) -> Option<TensorTrainOperator<f64>> {
        let cores = self
            .cores
            .iter()
            .map(|c| {
                let data = c.data.iter().map(|z| f64::from_c64(*z)).collect::<Option<Vec<_>>>()?;
                Some(Core {
                    left: c.left,
                    right: c.right,
                    phys: c.phys,
                    data,
                })
            })
            .collect::<Option<Vec<_>>>()?;
        Some(TensorTrainOperator::from_cores_unchecked(cores, self.phys))
    }
}

/// One site of the overlap `Σ conj(X) ⋅ env ⋅ Y`, mapping a `D_x × D_y` left
/// environment to the next bond.
pub(crate) fn transfer_step<T: Scalar>(env: &DMatrix<T>, x: &Core<T>, y: &Core<T>) -> DMatrix<T> {
    let d2 = x.phys * x.phys;
    // z[lx, (p, ry)] = env[lx, ly] y[ly, (p, ry)]
    let z = linalg::matmul(env, &y.right_unfolding());
    let z = DMatrix::from_column_slice(x.left * d2, y.right, z.as_slice());
    linalg::adjoint_matmul(&x.left_unfolding(), &z)
}
