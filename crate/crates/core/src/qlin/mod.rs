//! Small dense complex linear algebra: matrices, Hermitian
//! eigendecomposition, validated unitary/density types, and random
//! ensembles. Everything downstream builds on this module.

pub mod eigen;
pub mod matrix;
pub mod random;
pub mod state;

pub use eigen::{eigh, expi, principal_log_unitary, Eigh, PrincipalLog};
pub use matrix::{check_dim, ComplexMatrix, MAX_DIM, MIN_DIM};
pub use random::{haar_unitary, hs_density, near_pure_density};
pub use state::{DensityMatrix, UnitaryMatrix};
