//! Lattice geometry and the model Hamiltonians built on it.

mod fermion;
mod geometry;
mod models;

pub use fermion::{fock, jordan_wigner, number_operator, FermionTerm};
pub use geometry::{build_lattice, Direction, Edge, Lattice};
pub use models::{
    build_bnnni, build_hcbh, build_hubbard, build_spinless_hubbard, build_tfim, build_tfxym, LatticeTerm, Model,
    ModelConfig, ModelTag,
};

