//! Spin-chain Hamiltonians as tensor trains and their chiral-symmetry witnesses.

mod chiral;
mod model;
mod pauli;

pub use chiral::{
    anticommutes_with_all, construct_chiral_unitary, matching_families, pauli_anticommutation_residual,
    verify_anticommutation, ChiralWitness, WitnessFamily,
};
pub use model::{expected_couplings, Boundary, InteractionSpec, InteractionTerm};
pub use pauli::{Axis, PauliLabel, PauliString, Phase};
