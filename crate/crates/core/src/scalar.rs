//! Scalar abstraction shared by the real fast path and the complex general path.

use nalgebra::ComplexField;
use num_complex::Complex64;
use std::fmt::Debug;

/// Field element stored in tensor cores.
///
/// Implemented for `f64` (real-symmetric inputs such as the transverse-field
/// Ising chain) and `Complex64` (anything touching `σ_y`).
pub trait Scalar:
    ComplexField<RealField = f64> + faer::traits::ComplexField<Real = f64> + Copy + Debug + Send + Sync + 'static
{
    const IS_COMPLEX: bool;

    fn to_c64(self) -> Complex64;

    /// Narrowing conversion; `None` when the imaginary part cannot be represented.
    fn from_c64(z: Complex64) -> Option<Self>;

    fn of_real(x: f64) -> Self {
        Self::from_real(x)
    }
}

impl Scalar for f64 {
    const IS_COMPLEX: bool = false;

    fn to_c64(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }

    fn from_c64(z: Complex64) -> Option<Self> {
        (z.im == 0.0).then_some(z.re)
    }
}

impl Scalar for Complex64 {
    const IS_COMPLEX: bool = true;

    fn to_c64(self) -> Complex64 {
        self
    }

    fn from_c64(z: Complex64) -> Option<Self> {
        Some(z)
    }
}
