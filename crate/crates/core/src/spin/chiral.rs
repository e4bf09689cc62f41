//! Constructive search for a Hermitian unitary Pauli string `R` with `RH = −HR`.
//!
//! Each supported family of spin Hamiltonians comes with an explicit
//! construction. The dispatcher tries the families from most to least
//! specific and returns the first candidate that passes the symbol-algebra
//! check against every interaction term. A `None` result only means that no
//! known construction applies; the spectrum may still be symmetric.

use super::model::{Boundary, InteractionSpec};
use super::pauli::{Axis, PauliLabel, PauliString};
use crate::error::Result;
use crate::scalar::Scalar;
use crate::tt::{CompressionSettings, TensorTrainOperator};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::fmt;

/// Hamiltonian family for which a witness construction is known.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WitnessFamily {
    /// One Pauli axis, one block length, open chain.
    SingleOpen,
    /// One Pauli axis, one odd block length, periodic chain.
    SinglePeriodicOdd,
    /// Two different axes with one block length each, open chain.
    TwoAxesOpen,
    /// One axis with two odd block lengths, open chain.
    OneAxisOddLengthsOpen,
    /// One axis with two block lengths whose ratio is an odd integer, open chain.
    OneAxisDivisibleOpen,
    /// Two axes with odd block lengths, periodic chain.
    TwoAxesOddPeriodic,
    /// Three axes `(α, i), (β, k), (γ, m)` with `i, m` odd and `i < k`, open chain.
    ThreeAxesOpen,
    /// Axis `α` with odd length `i`, axis `β` with odd lengths `k, m`, `i < k`, open chain.
    TwoAxesThreeOddLengthsOpen,
    /// One axis, any number of odd block lengths, open chain.
    OddLengthsOneAxisOpen,
    /// At most two axes, any number of odd block lengths, periodic chain.
    OddLengthsTwoAxesPeriodic,
    /// Two axes, any number of odd block lengths, open chain.
    OddLengthsTwoAxesOpen,
}

impl WitnessFamily {
    pub const ALL: [WitnessFamily; 11] = [
        WitnessFamily::SingleOpen,
        WitnessFamily::SinglePeriodicOdd,
        WitnessFamily::TwoAxesOpen,
        WitnessFamily::OneAxisOddLengthsOpen,
        WitnessFamily::OneAxisDivisibleOpen,
        WitnessFamily::TwoAxesOddPeriodic,
        WitnessFamily::ThreeAxesOpen,
        WitnessFamily::TwoAxesThreeOddLengthsOpen,
        WitnessFamily::OddLengthsOneAxisOpen,
        WitnessFamily::OddLengthsTwoAxesPeriodic,
        WitnessFamily::OddLengthsTwoAxesOpen,
    ];
}

impl fmt::Display for WitnessFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            WitnessFamily::SingleOpen => "single-open",
            WitnessFamily::SinglePeriodicOdd => "single-periodic-odd",
            WitnessFamily::TwoAxesOpen => "two-axes-open",
            WitnessFamily::OneAxisOddLengthsOpen => "one-axis-odd-lengths-open",
            WitnessFamily::OneAxisDivisibleOpen => "one-axis-divisible-open",
            WitnessFamily::TwoAxesOddPeriodic => "two-axes-odd-periodic",
            WitnessFamily::ThreeAxesOpen => "three-axes-open",
            WitnessFamily::TwoAxesThreeOddLengthsOpen => "two-axes-three-odd-lengths-open",
            WitnessFamily::OddLengthsOneAxisOpen => "odd-lengths-one-axis-open",
            WitnessFamily::OddLengthsTwoAxesPeriodic => "odd-lengths-two-axes-periodic",
            WitnessFamily::OddLengthsTwoAxesOpen => "odd-lengths-two-axes-open",
        };
        f.write_str(name)
    }
}

/// A verified chiral witness together with the family that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct ChiralWitness {
    pub unitary: PauliString,
    pub family: WitnessFamily,
}

/// Distinct `(axis, block)` groups of a spec.
type Groups = Vec<(Axis, usize)>;

fn groups(spec: &InteractionSpec) -> Groups {
    let mut g: Vec<(Axis, usize)> = spec.terms().iter().map(|t| (t.axis, t.block)).collect();
    g.sort();
    g.dedup();
    g
}

fn axes(g: &Groups) -> Vec<Axis> {
    let mut a: Vec<Axis> = g.iter().map(|(ax, _)| *ax).collect();
    a.sort();
    a.dedup();
    a
}

fn odd(n: usize) -> bool {
    n % 2 == 1
}

/// `(I^{⊗ period-1} ⊗ σ)^{⊗ L/period} ⊗ I^{⊗ L % period}`.
fn grid_string(len: usize, period: usize, axis: Axis) -> PauliString {
    let labels = (0..len)
        .map(|s| {
            if (s + 1) % period == 0 {
                axis.label()
            } else {
                PauliLabel::I
            }
        })
        .collect();
    PauliString::new(labels)
}

/// Sites (1-based) that are multiples of `i` carry `σ_β`, multiples of `k`
/// carry `σ_α`, common multiples carry the third axis.
fn two_period_string(len: usize, (alpha, i): (Axis, usize), (beta, k): (Axis, usize)) -> PauliString {
    let gamma = alpha.third(beta);
    let labels = (1..=len)
        .map(|p| match (p % i == 0, p % k == 0) {
            (true, true) => gamma.label(),
            (true, false) => beta.label(),
            (false, true) => alpha.label(),
            (false, false) => PauliLabel::I,
        })
        .collect();
    PauliString::new(labels)
}

/// `(σ_β^{⊗ k-1} ⊗ σ_α)^{⊗ L/k} ⊗ σ_β^{⊗ L % k}`.
fn alternating_string(len: usize, alpha: Axis, beta: Axis, k: usize) -> PauliString {
    let full = (len / k) * k;
    let labels = (0..len)
        .map(|s| {
            if s < full && (s + 1) % k == 0 {
                alpha.label()
            } else {
                beta.label()
            }
        })
        .collect();
    PauliString::new(labels)
}

/// Candidate strings for one family, or empty when the spec is outside it.
fn candidates(family: WitnessFamily, spec: &InteractionSpec) -> Vec<PauliString> {
    let g = groups(spec);
    let ax = axes(&g);
    let len = spec.length();
    let open = spec.boundary() == Boundary::Open;
    let all_odd = g.iter().all(|(_, b)| odd(*b));
    match family {
        WitnessFamily::SingleOpen if open && g.len() == 1 => {
            let (alpha, i) = g[0];
            vec![grid_string(len, i, alpha.partner())]
        }
        WitnessFamily::SinglePeriodicOdd if !open && g.len() == 1 && odd(g[0].1) => {
            vec![PauliString::uniform(g[0].0.partner(), len)]
        }
        WitnessFamily::TwoAxesOpen if open && g.len() == 2 && ax.len() == 2 => {
            let (a, b) = (g[0], g[1]);
            if a.1 == b.1 {
                vec![grid_string(len, a.1, a.0.third(b.0))]
            } else {
                vec![two_period_string(len, a, b)]
            }
        }
        WitnessFamily::OneAxisOddLengthsOpen if open && g.len() == 2 && ax.len() == 1 && all_odd => {
            vec![PauliString::uniform(ax[0].partner(), len)]
        }
        WitnessFamily::OneAxisDivisibleOpen if open && g.len() == 2 && ax.len() == 1 => {
            let (small, large) = (g[0].1.min(g[1].1), g[0].1.max(g[1].1));
            if large % small == 0 && odd(large / small) {
                vec![grid_string(len, small, ax[0].partner())]
            } else {
                vec![]
            }
        }
        WitnessFamily::TwoAxesOddPeriodic if !open && g.len() == 2 && ax.len() == 2 && all_odd => {
            vec![PauliString::uniform(ax[0].third(ax[1]), len)]
        }
        WitnessFamily::ThreeAxesOpen if open && g.len() == 3 && ax.len() == 3 => {
            // every role assignment satisfying the hypotheses, in a fixed order
            let mut out = Vec::new();
            for a in 0..3 {
                for b in 0..3 {
                    if a == b {
                        continue;
                    }
                    let c = 3 - a - b;
                    let ((alpha, i), (beta, k), (_, m)) = (g[a], g[b], g[c]);
                    if odd(i) && odd(m) && i < k {
                        out.push(alternating_string(len, alpha, beta, k));
                    }
                }
            }
            out
        }
        WitnessFamily::TwoAxesThreeOddLengthsOpen if open && g.len() == 3 && ax.len() == 2 && all_odd => {
            let single = ax
                .iter()
                .copied()
                .find(|a| g.iter().filter(|(x, _)| x == a).count() == 1);
            match single {
                Some(alpha) => {
                    let i = g.iter().find(|(x, _)| *x == alpha).map(|(_, b)| *b).unwrap_or(0);
                    let beta_max = g
                        .iter()
                        .filter(|(x, _)| *x != alpha)
                        .map(|(_, b)| *b)
                        .max()
                        .unwrap_or(0);
                    if i < beta_max {
                        vec![PauliString::uniform(ax[0].third(ax[1]), len)]
                    } else {
                        vec![]
                    }
                }
                None => vec![],
            }
        }
        WitnessFamily::OddLengthsOneAxisOpen if open && ax.len() == 1 && all_odd => {
            vec![PauliString::uniform(ax[0].partner(), len)]
        }
        WitnessFamily::OddLengthsTwoAxesPeriodic if !open && ax.len() <= 2 && all_odd => {
            let r = if ax.len() == 1 {
                ax[0].partner()
            } else {
                ax[0].third(ax[1])
            };
            vec![PauliString::uniform(r, len)]
        }
        WitnessFamily::OddLengthsTwoAxesOpen if open && ax.len() == 2 && all_odd => {
            vec![PauliString::uniform(ax[0].third(ax[1]), len)]
        }
        _ => vec![],
    }
}

/// Families whose structural hypotheses the spec meets, in dispatch order.
pub fn matching_families(spec: &InteractionSpec) -> Vec<WitnessFamily> {
    WitnessFamily::ALL
        .into_iter()
        .filter(|f| !candidates(*f, spec).is_empty())
        .collect()
}

/// Returns the first verified witness in dispatch order, or `None`.
pub fn construct_chiral_unitary(spec: &InteractionSpec) -> Option<ChiralWitness> {
    let terms = spec.pauli_terms();
    for family in WitnessFamily::ALL {
        for candidate in candidates(family, spec) {
            if anticommutes_with_all(&terms, &candidate) {
                return Some(ChiralWitness {
                    unitary: candidate,
                    family,
                });
            }
            log::debug!("{family} construction {candidate} fails the symbol check; trying the next family");
        }
    }
    None
}

/// Structural check: `R` anticommutes with every declared interaction string.
pub fn anticommutes_with_all(terms: &[(f64, PauliString)], r: &PauliString) -> bool {
    terms.iter().all(|(_, p)| p.anticommutes_with(r))
}

/// `‖RH + HR‖_F / ‖H‖_F` for `H = Σ h_t P_t` by symbol algebra alone.
///
/// Equal strings are merged first; distinct Pauli strings are Frobenius
/// orthogonal, so only the commuting part contributes, with weight 2.
pub fn pauli_anticommutation_residual(terms: &[(f64, PauliString)], r: &PauliString) -> f64 {
    let mut merged: BTreeMap<String, (f64, bool)> = BTreeMap::new();
    for (h, p) in terms {
        let key = p.to_string();
        let entry = merged.entry(key).or_insert((0.0, p.anticommutes_with(r)));
        entry.0 += h;
    }
    let total: f64 = merged.values().map(|(h, _)| h * h).sum();
    if total == 0.0 {
        return 0.0;
    }
    let commuting: f64 = merged.values().filter(|(_, anti)| !anti).map(|(h, _)| h * h).sum();
    2.0 * (commuting / total).sqrt()
}

/// `‖RH + HR‖_F / ‖H‖_F` in tensor-train arithmetic.
pub fn verify_anticommutation<T: Scalar>(
    h: &TensorTrainOperator<T>,
    r: &PauliString,
    settings: &CompressionSettings,
) -> Result<f64> {
    let h: TensorTrainOperator<Complex64> = h.to_complex();
    let r = r.to_mpo()?;
    let (rh, _) = r.multiply(&h, settings)?;
    let (hr, _) = h.multiply(&r, settings)?;
    let (sum, _) = rh.add(&hr, settings)?;
    let norm = h.frobenius_norm()?;
    if norm == 0.0 {
        return Ok(0.0);
    }
    Ok(sum.frobenius_norm()? / norm)
}
