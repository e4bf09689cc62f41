use super::pauli::{Axis, PauliLabel, PauliString};
use crate::error::{Error, Result};
use crate::tt::{Core, TensorTrainOperator};
use num_complex::Complex64;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Boundary {
    Open,
    Periodic,
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Open => "open",
            Boundary::Periodic => "periodic",
        })
    }
}

impl FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "open" | "obc" => Ok(Boundary::Open),
            "periodic" | "pbc" => Ok(Boundary::Periodic),
            other => Err(Error::InvalidArgument(format!("unknown boundary '{other}'"))),
        }
    }
}

/// A family of blocks `σ_axis^{⊗block}` at every offset along the chain.
///
/// `couplings` holds one value per open offset `j = 0..=L-block`, followed for
/// periodic chains by `block - 1` wrap-around couplings (the wrap term with
/// `k` leading sites uses entry `L - block + k`).
#[derive(Clone, Debug, PartialEq)]
pub struct InteractionTerm {
    pub axis: Axis,
    pub block: usize,
    pub couplings: Vec<f64>,
}

impl InteractionTerm {
    pub fn uniform(axis: Axis, block: usize, coupling: f64, length: usize, boundary: Boundary) -> Self {
        let count = expected_couplings(block, length, boundary);
        Self {
            axis,
            block,
            couplings: vec![coupling; count],
        }
    }
}

/// Number of couplings a term of the given block length carries.
pub fn expected_couplings(block: usize, length: usize, boundary: Boundary) -> usize {
    let open = (length + 1).saturating_sub(block);
    match boundary {
        Boundary::Open => open,
        Boundary::Periodic => open + block.saturating_sub(1),
    }
}

/// Declarative spin-chain Hamiltonian.
#[derive(Clone, Debug, PartialEq)]
pub struct InteractionSpec {
    length: usize,
    boundary: Boundary,
    terms: Vec<InteractionTerm>,
}

impl InteractionSpec {
    pub fn new(length: usize, boundary: Boundary, terms: Vec<InteractionTerm>) -> Result<Self> {
        if length < 1 {
            return Err(Error::InvalidArgument("chain length must be at least 1".into()));
        }
        if terms.is_empty() {
            return Err(Error::InvalidArgument("a Hamiltonian needs at least one term".into()));
        }
        for (n, term) in terms.iter().enumerate() {
            if term.block < 1 || term.block > length {
                return Err(Error::InvalidArgument(format!(
                    "term {n}: block length {} must lie in 1..={length}",
                    term.block
                )));
            }
            let want = expected_couplings(term.block, length, boundary);
            if term.couplings.len() != want {
                return Err(Error::InvalidArgument(format!(
                    "term {n}: {} couplings given, {boundary} chain with block {} needs {want}",
                    term.couplings.len(),
                    term.block
                )));
            }
            if term.couplings.iter().any(|h| !h.is_finite()) {
                return Err(Error::InvalidArgument(format!("term {n}: non-finite coupling")));
            }
        }
        Ok(Self {
            length,
            boundary,
            terms,
        })
    }

    /// Transverse-field Ising chain `J Σ σxσx + g Σ σz`.
    pub fn tfim(length: usize, coupling: f64, field: f64, boundary: Boundary) -> Result<Self> {
        let mut terms = Vec::new();
        if length >= 2 {
            terms.push(InteractionTerm::uniform(Axis::X, 2, coupling, length, boundary));
        }
        terms.push(InteractionTerm::uniform(Axis::Z, 1, field, length, boundary));
        Self::new(length, boundary, terms)
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn terms(&self) -> &[InteractionTerm] {
        &self.terms
    }

    /// All couplings of every term are equal.
    pub fn is_uniform(&self) -> bool {
        let mut all = self.terms.iter().flat_map(|t| t.couplings.iter());
        match all.next() {
            Some(first) => all.all(|h| h == first),
            None => true,
        }
    }

    /// Expansion into weighted Pauli strings, one per block placement.
    pub fn pauli_terms(&self) -> Vec<(f64, PauliString)> {
        let l = self.length;
        let mut out = Vec::new();
        for term in &self.terms {
            let i = term.block;
            let sigma = term.axis.label();
            for j in 0..=l - i {
                let mut labels = vec![PauliLabel::I; l];
                labels[j..j + i].fill(sigma);
                out.push((term.couplings[j], PauliString::new(labels)));
            }
            if self.boundary == Boundary::Periodic {
                for k in 1..i {
                    let mut labels = vec![PauliLabel::I; l];
                    labels[..k].fill(sigma);
                    labels[l - (i - k)..].fill(sigma);
                    out.push((term.couplings[l - i + k], PauliString::new(labels)));
                }
            }
        }
        out
    }

    /// Exact MPO from a finite-automaton construction.
    ///
    /// Bond states are "nothing placed yet", "block completed" and one state per
    /// partially placed block; unreachable states are trimmed per bond, so an
    /// open chain has bond dimension at most `2 + Σ (block - 1)`.
    pub fn build_hamiltonian(&self) -> Result<TensorTrainOperator<Complex64>> {
        let l = self.length;
        let mut transitions: Vec<Vec<Transition>> = vec![Vec::new(); l];
        for site in transitions.iter_mut() {
            site.push(Transition::identity(State::Start, State::Start));
            site.push(Transition::identity(State::Done, State::Done));
        }
        for (t, term) in self.terms.iter().enumerate() {
            let i = term.block;
            let sigma = term.axis.label();
            for (j, &h) in term.couplings.iter().take(l - i + 1).enumerate() {
                if h == 0.0 {
                    continue;
                }
                let to = if i == 1 {
                    State::Done
                } else {
                    State::Open { term: t, placed: 1 }
                };
                transitions[j].push(Transition::new(State::Start, to, sigma, h));
            }
            for placed in 1..i {
                let to = if placed + 1 == i {
                    State::Done
                } else {
                    State::Open {
                        term: t,
                        placed: placed + 1,
                    }
                };
                for site in transitions.iter_mut() {
                    site.push(Transition::new(State::Open { term: t, placed }, to, sigma, 1.0));
                }
            }
            if self.boundary == Boundary::Periodic {
                for split in 1..i {
                    let h = term.couplings[l - i + split];
                    if h == 0.0 {
                        continue;
                    }
                    let wrap = |placed| State::Wrap { term: t, split, placed };
                    let tail_start = l - (i - split);
                    let mut placed = 0;
                    for (s, site) in transitions.iter_mut().enumerate() {
                        let on_block = s < split || s >= tail_start;
                        let from = if placed == 0 { State::Start } else { wrap(placed) };
                        if on_block {
                            let to = if placed + 1 == i { State::Done } else { wrap(placed + 1) };
                            let coeff = if placed == 0 { h } else { 1.0 };
                            site.push(Transition::new(from, to, sigma, coeff));
                            placed += 1;
                        } else {
                            site.push(Transition::identity(from, from));
                        }
                    }
                }
            }
        }
        automaton_to_mpo(&transitions, l)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum State {
    Start,
    Done,
    Open { term: usize, placed: usize },
    Wrap { term: usize, split: usize, placed: usize },
}

#[derive(Clone, Debug)]
struct Transition {
    from: State,
    to: State,
    label: PauliLabel,
    coeff: f64,
}

impl Transition {
    fn new(from: State, to: State, label: PauliLabel, coeff: f64) -> Self {
        Self { from, to, label, coeff }
    }

    fn identity(from: State, to: State) -> Self {
        Self::new(from, to, PauliLabel::I, 1.0)
    }
}

fn automaton_to_mpo(transitions: &[Vec<Transition>], l: usize) -> Result<TensorTrainOperator<Complex64>> {
    let mut forward: Vec<BTreeSet<State>> = vec![BTreeSet::new(); l + 1];
    forward[0].insert(State::Start);
    for s in 0..l {
        let next: BTreeSet<State> = transitions[s]
            .iter()
            .filter(|t| forward[s].contains(&t.from))
            .map(|t| t.to)
            .collect();
        forward[s + 1] = next;
    }
    let mut backward: Vec<BTreeSet<State>> = vec![BTreeSet::new(); l + 1];
    backward[l].insert(State::Done);
    for s in (0..l).rev() {
        let prev: BTreeSet<State> = transitions[s]
            .iter()
            .filter(|t| backward[s + 1].contains(&t.to))
            .map(|t| t.from)
            .collect();
        backward[s] = prev;
    }
    let alive: Vec<BTreeMap<State, usize>> = forward
        .iter()
        .zip(&backward)
        .map(|(f, b)| f.intersection(b).enumerate().map(|(n, s)| (*s, n)).collect())
        .collect();
    if alive.iter().any(|a| a.is_empty()) {
        return TensorTrainOperator::zero(l, 2);
    }
    let matrices = [PauliLabel::I, PauliLabel::X, PauliLabel::Y, PauliLabel::Z].map(|p| p.matrix());
    let cores = (0..l)
        .map(|s| {
            let (left, right) = (&alive[s], &alive[s + 1]);
            let mut entries: BTreeMap<(usize, usize, usize, usize), Complex64> = BTreeMap::new();
            for t in &transitions[s] {
                if let (Some(&a), Some(&b)) = (left.get(&t.from), right.get(&t.to)) {
                    let m = &matrices[t.label as usize];
                    for i in 0..2 {
                        for j in 0..2 {
                            *entries.entry((a, i, j, b)).or_default() += m[(i, j)] * t.coeff;
                        }
                    }
                }
            }
            Core::from_fn(left.len(), 2, right.len(), |a, i, j, b| {
                entries.get(&(a, i, j, b)).copied().unwrap_or_default()
            })
        })
        .collect();
    TensorTrainOperator::new(cores)
}
