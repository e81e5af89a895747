//! Dense complex linear algebra used throughout the crate.

pub mod eig;
pub mod matrix;
pub mod ops;
pub mod tolerances;

pub use eig::{hermitian_eig, hermitian_eig_with, hermitian_eigenvalues, hermitian_eigenvalues_with, HermitianEigen};
pub use matrix::{inner, norm, normalize, ComplexMatrix, C64, I, ONE, ZERO};
pub use ops::{check_positive, kron, kron_vec, partial_trace, trace_norm, trace_norm_with, unitary_exp};
pub use tolerances::Tolerances;
