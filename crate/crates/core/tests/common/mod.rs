#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ttrace::diagnostics::{exchange, SymmetryKind};
use ttrace::spin::{expected_couplings, Axis, Boundary, InteractionSpec, InteractionTerm, WitnessFamily};
use ttrace::tt::Core;
use ttrace::TensorTrainOperator;

pub type Op = TensorTrainOperator<Complex64>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn distinct_axes(rng: &mut ChaCha8Rng, n: usize) -> Vec<Axis> {
    let mut axes = Axis::ALL.to_vec();
    axes.shuffle(rng);
    axes.truncate(n);
    axes
}

/// Random odd number in `[lo, hi]` (both inclusive, `lo` odd).
fn odd_in(rng: &mut ChaCha8Rng, lo: usize, hi: usize) -> usize {
    let count = (hi - lo) / 2 + 1;
    lo + 2 * rng.random_range(0..count)
}

fn distinct_odd(rng: &mut ChaCha8Rng, max: usize, n: usize) -> Vec<usize> {
    let mut pool: Vec<usize> = (1..=max).filter(|b| b % 2 == 1).collect();
    pool.shuffle(rng);
    pool.truncate(n.max(1));
    pool
}

fn term(rng: &mut ChaCha8Rng, axis: Axis, block: usize, length: usize, boundary: Boundary) -> InteractionTerm {
    let couplings = (0..expected_couplings(block, length, boundary))
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    InteractionTerm { axis, block, couplings }
}

fn build(rng: &mut ChaCha8Rng, length: usize, boundary: Boundary, groups: &[(Axis, usize)]) -> InteractionSpec {
    let terms = groups.iter().map(|&(a, b)| term(rng, a, b, length, boundary)).collect();
    InteractionSpec::new(length, boundary, terms).expect("generated spec is valid")
}

/// Smallest chain length the generator below supports for a family.
pub fn min_length(family: WitnessFamily) -> usize {
    use WitnessFamily::*;
    match family {
        SingleOpen | OddLengthsOneAxisOpen | OddLengthsTwoAxesOpen => 1,
        SinglePeriodicOdd | TwoAxesOpen | TwoAxesOddPeriodic | ThreeAxesOpen | OddLengthsTwoAxesPeriodic => 2,
        OneAxisOddLengthsOpen | OneAxisDivisibleOpen => 3,
        TwoAxesThreeOddLengthsOpen => 3,
    }
}

/// Random member of a witness family with random couplings in `[-1, 1)`.
pub fn random_family_spec(rng: &mut ChaCha8Rng, family: WitnessFamily, length: usize) -> InteractionSpec {
    use Boundary::{Open, Periodic};
    use WitnessFamily::*;
    let l = length;
    assert!(l >= min_length(family));
    match family {
        SingleOpen => {
            let a = distinct_axes(rng, 1)[0];
            let i = rng.random_range(1..=l);
            build(rng, l, Open, &[(a, i)])
        }
        SinglePeriodicOdd => {
            let a = distinct_axes(rng, 1)[0];
            let i = odd_in(rng, 1, l);
            build(rng, l, Periodic, &[(a, i)])
        }
        TwoAxesOpen => {
            let ax = distinct_axes(rng, 2);
            let (i, k) = (rng.random_range(1..=l), rng.random_range(1..=l));
            build(rng, l, Open, &[(ax[0], i), (ax[1], k)])
        }
        OneAxisOddLengthsOpen => {
            let a = distinct_axes(rng, 1)[0];
            let b = distinct_odd(rng, l, 2);
            build(rng, l, Open, &[(a, b[0]), (a, b[1])])
        }
        OneAxisDivisibleOpen => {
            let a = distinct_axes(rng, 1)[0];
            let small = rng.random_range(1..=l / 3);
            let q = odd_in(rng, 3, l / small);
            build(rng, l, Open, &[(a, small), (a, small * q)])
        }
        TwoAxesOddPeriodic => {
            let ax = distinct_axes(rng, 2);
            let (i, k) = (odd_in(rng, 1, l), odd_in(rng, 1, l));
            build(rng, l, Periodic, &[(ax[0], i), (ax[1], k)])
        }
        ThreeAxesOpen => {
            let ax = distinct_axes(rng, 3);
            let i = odd_in(rng, 1, if l.is_multiple_of(2) { l - 1 } else { l - 2 });
            let k = rng.random_range(i + 1..=l);
            let m = odd_in(rng, 1, if l.is_multiple_of(2) { l - 1 } else { l });
            build(rng, l, Open, &[(ax[0], i), (ax[1], k), (ax[2], m)])
        }
        TwoAxesThreeOddLengthsOpen => {
            let ax = distinct_axes(rng, 2);
            let top = if l.is_multiple_of(2) { l - 1 } else { l };
            let k = odd_in(rng, 3, top);
            let i = odd_in(rng, 1, k - 2);
            let m = loop {
                let m = odd_in(rng, 1, top);
                if m != k {
                    break m;
                }
            };
            build(rng, l, Open, &[(ax[0], i), (ax[1], k), (ax[1], m)])
        }
        OddLengthsOneAxisOpen => {
            let a = distinct_axes(rng, 1)[0];
            let n = rng.random_range(1..=3);
            let groups: Vec<_> = distinct_odd(rng, l, n).into_iter().map(|b| (a, b)).collect();
            build(rng, l, Open, &groups)
        }
        OddLengthsTwoAxesPeriodic | OddLengthsTwoAxesOpen => {
            let boundary = if family == OddLengthsTwoAxesOpen {
                Open
            } else {
                Periodic
            };
            let n_axes = if family == OddLengthsTwoAxesOpen {
                2
            } else {
                rng.random_range(1..=2)
            };
            let mut groups = Vec::new();
            for a in distinct_axes(rng, n_axes) {
                let n = rng.random_range(1..=2);
                groups.extend(distinct_odd(rng, l, n).into_iter().map(|b| (a, b)));
            }
            build(rng, l, boundary, &groups)
        }
    }
}

/// Random spec with all three axes on a periodic chain.
pub fn random_three_axis_periodic(rng: &mut ChaCha8Rng, length: usize) -> InteractionSpec {
    let groups: Vec<_> = distinct_axes(rng, 3)
        .into_iter()
        .map(|a| (a, rng.random_range(1..=length)))
        .collect();
    build(rng, length, Boundary::Periodic, &groups)
}

/// Random tensor train with bonds drawn from `1..=max_bond`.
pub fn random_mpo(rng: &mut ChaCha8Rng, length: usize, max_bond: usize, complex: bool) -> Op {
    let mut bonds = vec![1];
    for _ in 1..length {
        bonds.push(rng.random_range(1..=max_bond));
    }
    bonds.push(1);
    let cores = (0..length)
        .map(|s| {
            let (left, right) = (bonds[s], bonds[s + 1]);
            let data: Vec<Complex64> = (0..left * 4 * right)
                .map(|_| {
                    let re = rng.random_range(-1.0..1.0);
                    let im = if complex { rng.random_range(-1.0..1.0) } else { 0.0 };
                    Complex64::new(re, im)
                })
                .collect();
            Core::from_fn(left, 2, right, |l, i, j, r| data[l + left * (i + 2 * (j + 2 * r))])
        })
        .collect();
    TensorTrainOperator::new(cores).unwrap()
}

fn half_sum(a: &Op, b: &Op) -> Op {
    a.add_exact(b).unwrap().scale(c(0.5))
}

/// Random Hermitian input that has `kind` (and is real for the three real kinds).
pub fn random_input_with(rng: &mut ChaCha8Rng, kind: SymmetryKind, length: usize) -> Op {
    let x = random_mpo(rng, length, 2, !kind.is_real_kind());
    let h = half_sum(&x, &x.adjoint());
    let j: Op = exchange(length, 2).unwrap();
    let conj_by_j = |m: &Op| j.multiply_exact(&m.multiply_exact(&j).unwrap()).unwrap();
    match kind {
        SymmetryKind::Symmetric | SymmetryKind::Hermitian => h,
        SymmetryKind::Persymmetric | SymmetryKind::Centrosymmetric | SymmetryKind::Perhermitian => {
            half_sum(&h, &conj_by_j(&h))
        }
        SymmetryKind::Centrohermitian => half_sum(&h, &conj_by_j(&h.conjugate())),
    }
}

/// `A − (Tr A / N) I`.
pub fn traceless(a: &Op) -> Op {
    let n = 2f64.powi(a.len() as i32);
    let shift = TensorTrainOperator::identity(a.len(), 2).unwrap().scale(-a.trace() / n);
    a.add_exact(&shift).unwrap()
}

pub fn dense(a: &Op) -> DMatrix<Complex64> {
    a.to_dense().unwrap()
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

pub type Dense = DMatrix<Complex64>;

fn frob(m: &Dense) -> f64 {
    m.norm()
}

fn frob_inner(a: &Dense, b: &Dense) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Anti-diagonal permutation of size `n`.
pub fn dense_exchange(n: usize) -> Dense {
    DMatrix::from_fn(n, n, |r, col| if r + col + 1 == n { c(1.0) } else { c(0.0) })
}

/// Dense residual of `u` against one symmetry kind, normalized by `‖u‖_F`.
pub fn dense_symmetry_residual(u: &Dense, kind: SymmetryKind) -> f64 {
    let j = dense_exchange(u.nrows());
    let diff = match kind {
        SymmetryKind::Symmetric => u - u.transpose(),
        SymmetryKind::Hermitian => u - u.adjoint(),
        SymmetryKind::Persymmetric => u * &j - &j * u.transpose(),
        SymmetryKind::Perhermitian => u * &j - &j * u.adjoint(),
        SymmetryKind::Centrosymmetric => &j * u - u * &j,
        SymmetryKind::Centrohermitian => &j * u - u.map(|z| z.conj()) * &j,
    };
    frob(&diff) / frob(u)
}

/// Whether `a` has `kind`; the real kinds also require real entries.
pub fn has_kind(a: &Dense, kind: SymmetryKind) -> bool {
    let real = a.iter().all(|z| z.im.abs() <= 1e-12 * frob(a));
    (real || !kind.is_real_kind()) && dense_symmetry_residual(a, kind) <= 1e-12
}

/// Relative norm of the part of `u` lying in `span{A^j : j ≤ degree, j ≢ degree mod 2}`.
pub fn parity_defect(a: &Dense, u: &Dense, degree: usize) -> f64 {
    let n = a.nrows();
    let mut powers = vec![Dense::identity(n, n)];
    for _ in 0..degree {
        let next = a * powers.last().unwrap();
        powers.push(next);
    }
    let mut q: Vec<Dense> = Vec::new();
    for (j, p) in powers.into_iter().enumerate() {
        if j % 2 == degree % 2 {
            continue;
        }
        let scale = frob(&p);
        let mut v = p;
        for _ in 0..2 {
            for e in &q {
                let coef = frob_inner(e, &v);
                v -= e * coef;
            }
        }
        let norm = frob(&v);
        if norm > 1e-8 * scale {
            q.push(v / c(norm));
        }
    }
    let projected = q.iter().map(|e| frob_inner(e, u).norm_sqr()).sum::<f64>().sqrt();
    projected / frob(u)
}

/// Residuals of the basis-inheritance theorems over a retained basis, computed densely.
#[derive(Clone, Debug, Default)]
pub struct TheoremResiduals {
    /// Max `|Tr U_i| / ‖U_i‖_F` over `i ≥ 2`.
    pub trace: f64,
    pub commutation: f64,
    pub symmetry: std::collections::BTreeMap<SymmetryKind, f64>,
    /// Present only when every `α_i` vanishes.
    pub parity: Option<f64>,
}

pub fn theorem_residuals(a: &Op, basis: &[Op], alphas: &[f64], beta1: f64) -> TheoremResiduals {
    let ad = dense(a);
    let kinds: Vec<SymmetryKind> = SymmetryKind::ALL.into_iter().filter(|&k| has_kind(&ad, k)).collect();
    let chiral = alphas.iter().all(|x| x.abs() <= 1e-10 * beta1);
    let mut out = TheoremResiduals::default();
    for (n, u) in basis.iter().enumerate() {
        let ud = dense(u);
        let norm = frob(&ud);
        if n > 0 {
            out.trace = out.trace.max(ud.trace().norm() / norm);
        }
        let comm = frob(&(&ad * &ud - &ud * &ad)) / (frob(&ad) * norm);
        out.commutation = out.commutation.max(comm);
        for &k in &kinds {
            let r = dense_symmetry_residual(&ud, k);
            let e = out.symmetry.entry(k).or_insert(0.0);
            *e = e.max(r);
        }
        if chiral {
            let p = parity_defect(&ad, &ud, n);
            out.parity = Some(out.parity.unwrap_or(0.0).max(p));
        }
    }
    out
}

/// Iterations the dense oracle takes before its residual falls below `1e-9 · β_1`.
pub fn steps_before_breakdown(a: &Op, max: usize) -> usize {
    use ttrace::oracle::{dense_global_lanczos, DenseOperator};
    let o = dense_global_lanczos(&DenseOperator::from_tt(a).unwrap(), max, false).unwrap();
    let k = 1 + o
        .jacobi
        .betas
        .iter()
        .take_while(|&&b| b > 1e-9 * o.jacobi.beta1)
        .count();
    k.min(o.jacobi.alphas.len())
}

/// Steps whose basis operators stay well conditioned: the prefix on which the
/// roundoff amplification `ε ∏_{j≤i} ‖A‖₂ / β_j` of the three-term recurrence
/// stays at or below `budget`.
pub fn conditioned_steps(a: &Op, max: usize, budget: f64) -> usize {
    use ttrace::oracle::{dense_eigenvalues, dense_global_lanczos, DenseOperator};
    let d = DenseOperator::from_tt(a).unwrap();
    let spectral = dense_eigenvalues(&d)
        .unwrap()
        .iter()
        .fold(0.0f64, |m, x| m.max(x.abs()));
    let o = dense_global_lanczos(&d, max, false).unwrap();
    let mut growth = f64::EPSILON;
    let mut k = 1;
    for &b in o.jacobi.betas.iter().take(o.jacobi.alphas.len().saturating_sub(1)) {
        growth *= (spectral / b).max(1.0);
        if growth > budget {
            break;
        }
        k += 1;
    }
    k
}

/// Untruncated run that keeps every `U_i`, with monitors off.
pub fn exact_basis_run(
    a: &Op,
    mode: ttrace::krylov::LanczosMode,
    k: usize,
) -> ttrace::krylov::QuadratureReport<Complex64> {
    use ttrace::krylov::{run_lanczos_with, LanczosOptions, SpectralFunction, StoppingCriteria};
    let opts = LanczosOptions {
        retain_basis: true,
        monitors: ttrace::diagnostics::MonitorSettings::disabled(),
        ..LanczosOptions::default()
    };
    run_lanczos_with(
        a,
        &SpectralFunction::exp_neg_beta(1.0),
        mode,
        &ttrace::CompressionSettings::exact(),
        &StoppingCriteria::fixed(k),
        &opts,
    )
    .unwrap()
}
