use crate::error::{Error, Result};
use crate::tt::TensorTrainOperator;
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::fmt;
use std::str::FromStr;

/// Pauli axis `x`, `y` or `z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    /// Deterministic choice of an axis different from `self`: x→z, y→x, z→x.
    pub fn partner(self) -> Axis {
        match self {
            Axis::X => Axis::Z,
            Axis::Y => Axis::X,
            Axis::Z => Axis::X,
        }
    }

    /// The axis different from both `self` and `other` (`self != other`).
    pub fn third(self, other: Axis) -> Axis {
        debug_assert_ne!(self, other);
        Axis::ALL
            .into_iter()
            .find(|&a| a != self && a != other)
            .expect("three axes")
    }

    pub fn label(self) -> PauliLabel {
        match self {
            Axis::X => PauliLabel::X,
            Axis::Y => PauliLabel::Y,
            Axis::Z => PauliLabel::Z,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        })
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            other => Err(Error::InvalidArgument(format!("unknown Pauli axis '{other}'"))),
        }
    }
}

/// Single-site factor of a Pauli string.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PauliLabel {
    I,
    X,
    Y,
    Z,
}

impl PauliLabel {
    /// Symplectic bits `(x, z)`: X = (1,0), Z = (0,1), Y = (1,1).
    fn bits(self) -> (bool, bool) {
        match self {
            PauliLabel::I => (false, false),
            PauliLabel::X => (true, false),
            PauliLabel::Y => (true, true),
            PauliLabel::Z => (false, true),
        }
    }

    pub fn anticommutes(self, other: PauliLabel) -> bool {
        let (ax, az) = self.bits();
        let (bx, bz) = other.bits();
        (ax & bz) ^ (az & bx)
    }

    pub fn matrix(self) -> DMatrix<Complex64> {
        let o = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let entries = match self {
            PauliLabel::I => [one, o, o, one],
            PauliLabel::X => [o, one, one, o],
            PauliLabel::Y => [o, -i, i, o],
            PauliLabel::Z => [one, o, o, -one],
        };
        DMatrix::from_row_slice(2, 2, &entries)
    }

    fn symbol(self) -> char {
        match self {
            PauliLabel::I => 'I',
            PauliLabel::X => 'X',
            PauliLabel::Y => 'Y',
            PauliLabel::Z => 'Z',
        }
    }

    /// `self · other = phase · result`, with the phase as a power of `i`.
    fn product(self, other: PauliLabel) -> (u8, PauliLabel) {
        use PauliLabel::*;
        match (self, other) {
            (I, p) | (p, I) => (0, p),
            (a, b) if a == b => (0, I),
            (X, Y) => (1, Z),
            (Y, Z) => (1, X),
            (Z, X) => (1, Y),
            (Y, X) => (3, Z),
            (Z, Y) => (3, X),
            (X, Z) => (3, Y),
            _ => unreachable!(),
        }
    }
}

/// Global phase `i^k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Phase {
    #[default]
    One,
    I,
    MinusOne,
    MinusI,
}

impl Phase {
    fn from_power(k: u8) -> Self {
        match k % 4 {
            0 => Phase::One,
            1 => Phase::I,
            2 => Phase::MinusOne,
            _ => Phase::MinusI,
        }
    }

    fn power(self) -> u8 {
        match self {
            Phase::One => 0,
            Phase::I => 1,
            Phase::MinusOne => 2,
            Phase::MinusI => 3,
        }
    }

    pub fn value(self) -> Complex64 {
        match self {
            Phase::One => Complex64::new(1.0, 0.0),
            Phase::I => Complex64::new(0.0, 1.0),
            Phase::MinusOne => Complex64::new(-1.0, 0.0),
            Phase::MinusI => Complex64::new(0.0, -1.0),
        }
    }
}

/// Kronecker product of per-site Pauli labels times a global phase.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    labels: Vec<PauliLabel>,
    phase: Phase,
}

impl PauliString {
    pub fn new(labels: Vec<PauliLabel>) -> Self {
        Self {
            labels,
            phase: Phase::One,
        }
    }

    pub fn with_phase(labels: Vec<PauliLabel>, phase: Phase) -> Self {
        Self { labels, phase }
    }

    pub fn identity(len: usize) -> Self {
        Self::new(vec![PauliLabel::I; len])
    }

    /// `σ^{⊗L}`.
    pub fn uniform(axis: Axis, len: usize) -> Self {
        Self::new(vec![axis.label(); len])
    }

    pub fn labels(&self) -> &[PauliLabel] {
        &self.labels
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Hermitian exactly when the phase is real.
    pub fn is_hermitian(&self) -> bool {
        matches!(self.phase, Phase::One | Phase::MinusOne)
    }

    /// Parity of sites where the two labels anticommute.
    pub fn anticommutes_with(&self, other: &PauliString) -> bool {
        debug_assert_eq!(self.len(), other.len());
        self.labels
            .iter()
            .zip(&other.labels)
            .filter(|(a, b)| a.anticommutes(**b))
            .count()
            % 2
            == 1
    }

    pub fn multiply(&self, other: &PauliString) -> Result<PauliString> {
        if self.len() != other.len() {
            return Err(Error::ShapeMismatch(format!(
                "Pauli strings of length {} and {}",
                self.len(),
                other.len()
            )));
        }
        let mut power = self.phase.power() + other.phase.power();
        let labels = self
            .labels
            .iter()
            .zip(&other.labels)
            .map(|(a, b)| {
                let (k, p) = a.product(*b);
                power += k;
                p
            })
            .collect();
        Ok(Self {
            labels,
            phase: Phase::from_power(power),
        })
    }

    /// Bond-dimension-1 operator; the phase is folded into the first site.
    pub fn to_mpo(&self) -> Result<TensorTrainOperator<Complex64>> {
        let mut sites: Vec<_> = self.labels.iter().map(|l| l.matrix()).collect();
        if let Some(first) = sites.first_mut() {
            *first *= self.phase.value();
        }
        TensorTrainOperator::product(&sites)
    }

    /// Dense Kronecker product (no size cap: callers keep `L` small).
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::from_element(1, 1, self.phase.value());
        for l in &self.labels {
            m = m.kronecker(&l.matrix());
        }
        m
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            Phase::One => "",
            Phase::I => "i",
            Phase::MinusOne => "-",
            Phase::MinusI => "-i",
        };
        f.write_str(prefix)?;
        for l in &self.labels {
            write!(f, "{}", l.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (phase, body) = if let Some(rest) = s.strip_prefix("-i") {
            (Phase::MinusI, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (Phase::MinusOne, rest)
        } else if let Some(rest) = s.strip_prefix('i') {
            (Phase::I, rest)
        } else {
            (Phase::One, s.strip_prefix('+').unwrap_or(s))
        };
        let labels = body
            .chars()
            .map(|c| match c.to_ascii_uppercase() {
                'I' => Ok(PauliLabel::I),
                'X' => Ok(PauliLabel::X),
                'Y' => Ok(PauliLabel::Y),
                'Z' => Ok(PauliLabel::Z),
                other => Err(Error::InvalidArgument(format!("bad Pauli symbol '{other}'"))),
            })
            .collect::<Result<Vec<_>>>()?;
        if labels.is_empty() {
            return Err(Error::InvalidArgument("empty Pauli string".into()));
        }
        Ok(Self { labels, phase })
    }
}
