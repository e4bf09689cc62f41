//! Trace-function estimation for operators stored as tensor trains.
//!
//! The crate approximates `Tr f(A)` for Hermitian operators of dimension `d^L`
//! by running the global Lanczos recurrence directly on matrix product
//! operators, starting from the identity, and evaluating the Gauss quadrature
//! rule of the resulting Jacobi matrix. Operators whose spectrum is symmetric
//! around zero admit a cheaper recurrence with a zero diagonal; the
//! [`spin`] module constructs Pauli-string witnesses of that symmetry for
//! spin-chain Hamiltonians.

pub mod bench;
pub mod diagnostics;
pub mod error;
pub mod krylov;
pub mod linalg;
pub mod oracle;
pub mod scalar;
pub mod spin;
pub mod tt;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use tt::{CompressionReport, CompressionSettings, TensorTrainOperator};
