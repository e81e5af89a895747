use serde::{Deserialize, Serialize};

/// Every numerical threshold used by the crate, in one place.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative Hermiticity check: `max|M - M^dagger| < hermitian * max|M|`.
    pub hermitian: f64,
    /// Relative eigen-reconstruction residual expected from the solver.
    pub eig_residual: f64,
    /// Eigenvalues with `|x|` below this count as zero and are kept in the
    /// optimal projector.
    pub zero_eigenvalue: f64,
    /// Negative eigenvalues of a density matrix above `-psd_clip` are clipped
    /// (with a diagnostic).
    pub psd_clip: f64,
    /// Negative eigenvalues below `-psd_fail` are a truncation failure.
    pub psd_fail: f64,
    /// Idempotency tolerance for projector checks.
    pub projector: f64,
    /// Allowed deviation of a physical state norm from one.
    pub state_norm: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        hermitian: 1e-12,
        eig_residual: 1e-10,
        zero_eigenvalue: 1e-12,
        psd_clip: 1e-9,
        psd_fail: 1e-6,
        projector: 1e-9,
        state_norm: 1e-9,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}
