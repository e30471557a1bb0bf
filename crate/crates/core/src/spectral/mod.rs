//! Statevectors, matrix-free operator application, eigensolvers and exact moments.

pub mod dense;
mod eigen;
mod lanczos;
mod moments;
mod op;
mod state;

pub use eigen::{degeneracy_tolerance, ground_state, ground_state_with, EigenSolution, SolverMethod, SolverOptions};
pub use lanczos::LanczosOptions;
pub use moments::{
    commutator_expectation, correlation, covariance_sym, expectation, moment_stats, part_stats, variance, MomentStats,
};
pub use op::{apply, SparseOp};
pub use state::{StateVector, MAX_STATE_QUBITS};

pub(crate) use lanczos::pdot;
