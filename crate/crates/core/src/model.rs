//! Physical parameters, Fock truncation, and Hamiltonian builders for one
//! three-level system in one cavity, with its centre-of-mass oscillator.
//!
//! Product basis ordering: `|q> (x) |n>_field (x) |k>_trap`, flat index
//! `(q * n_field + n) * n_trap + k`. Qubit level 0 never couples; the
//! cavity transition is `|1> <-> |2>` with `sigma_+ = |2><1|`.

use log::warn;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{ComplexMatrix, ZERO};

pub const MAX_FIELD_DIM: usize = 4096;
/// Largest full-space dimension the dense builders will allocate.
pub const MAX_DENSE_DIM: usize = 4096;
pub const TRAP_MARGIN: usize = 6;
const LAMB_DICKE_LIMIT: f64 = 0.5;

/// All quantities in units of `|g|` (frequencies) and `1/|g|` (times).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub g_abs: f64,
    /// Phase of `g`; the motional coupling `gamma` carries the same phase.
    pub g_phase: f64,
    pub gamma_abs: f64,
    pub omega_t: f64,
    pub delta: f64,
    /// Coherent drive amplitude, `n_bar = |alpha|^2`.
    pub alpha: C64,
    /// Interaction time in each cavity.
    pub tau: f64,
    /// Free propagation time between the two cavity windows.
    pub t_prop: f64,
    /// `omega_c * t`, enters only through phases.
    pub omega_c_t: f64,
    /// `omega_0 * t`, enters only through phases.
    pub omega_0_t: f64,
    /// `|g| / Gamma`, used for pulse time budgeting.
    pub gamma_decay_ratio: Option<f64>,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self {
            g_abs: 1.0,
            g_phase: 0.0,
            gamma_abs: 0.0,
            omega_t: 1.0,
            delta: 0.0,
            alpha: C64::new(10.0, 0.0),
            tau: 0.0,
            t_prop: 0.0,
            omega_c_t: 0.0,
            omega_0_t: 0.0,
            gamma_decay_ratio: None,
        }
    }
}

impl PhysicalParams {
    pub fn n_bar(&self) -> f64 {
        self.alpha.norm_sqr()
    }

    pub fn g(&self) -> C64 {
        C64::from_polar(self.g_abs, self.g_phase)
    }

    pub fn gamma(&self) -> C64 {
        C64::from_polar(self.gamma_abs, self.g_phase)
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    /// `gamma/g` within the Lamb-Dicke regime assumed by the linearized coupling.
    pub fn lamb_dicke_ok(&self) -> bool {
        self.gamma_abs <= LAMB_DICKE_LIMIT * self.g_abs
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.g_abs,
            self.g_phase,
            self.gamma_abs,
            self.omega_t,
            self.delta,
            self.alpha.re,
            self.alpha.im,
            self.tau,
            self.t_prop,
            self.omega_c_t,
            self.omega_0_t,
        ]
        .iter()
        .all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("non-finite physical parameter".into()));
        }
        if self.g_abs <= 0.0 {
            return Err(Error::InvalidParameter(format!("|g| must be positive, got {}", self.g_abs)));
        }
        if self.gamma_abs < 0.0 {
            return Err(Error::InvalidParameter(format!("|gamma| must be >= 0, got {}", self.gamma_abs)));
        }
        if self.omega_t <= 0.0 {
            return Err(Error::InvalidParameter(format!("omega_t must be positive, got {}", self.omega_t)));
        }
        if self.tau < 0.0 || self.t_prop < 0.0 {
            return Err(Error::InvalidParameter("tau and T must be >= 0".into()));
        }
        if let Some(r) = self.gamma_decay_ratio {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::InvalidParameter(format!("|g|/Gamma must be positive, got {r}")));
            }
        }
        if !self.lamb_dicke_ok() {
            warn!("|gamma|/|g| = {:.3} exceeds {LAMB_DICKE_LIMIT}: outside the Lamb-Dicke regime", self.gamma_abs / self.g_abs);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HilbertDims {
    /// Field levels `0..n_field`.
    pub n_field: usize,
    pub n_trap: usize,
    pub leak_tol: f64,
}

impl HilbertDims {
    pub fn new(n_field: usize, n_trap: usize, leak_tol: f64) -> Self {
        Self { n_field, n_trap, leak_tol }
    }

    pub fn full_dim(&self) -> usize {
        3 * self.n_field * self.n_trap
    }

    #[inline]
    pub fn index(&self, q: usize, n: usize, k: usize) -> usize {
        (q * self.n_field + n) * self.n_trap + k
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_field == 0 || self.n_trap == 0 {
            return Err(Error::Truncation("dimensions must be at least 1".into()));
        }
        if self.n_field > MAX_FIELD_DIM {
            return Err(Error::Truncation(format!("n_field = {} exceeds {MAX_FIELD_DIM}", self.n_field)));
        }
        Ok(())
    }
}

/// `ln n!` for `n = 0..len`.
pub fn ln_factorials(len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut acc = 0.0;
    for n in 0..len {
        if n > 1 {
            acc += (n as f64).ln();
        }
        out.push(acc);
    }
    out
}

/// Amplitudes `<n|alpha> = e^{-|alpha|^2/2} alpha^n / sqrt(n!)` for `n < dim`
/// (not renormalized).
pub fn coherent_state(alpha: C64, dim: usize) -> Vec<C64> {
    let r2 = alpha.norm_sqr();
    if r2 == 0.0 {
        let mut v = vec![ZERO; dim];
        if dim > 0 {
            v[0] = C64::new(1.0, 0.0);
        }
        return v;
    }
    let lnr = alpha.norm().ln();
    let arg = alpha.arg();
    let lf = ln_factorials(dim);
    (0..dim)
        .map(|n| {
            let lnmag = -0.5 * r2 + n as f64 * lnr - 0.5 * lf[n];
            C64::from_polar(lnmag.exp(), n as f64 * arg)
        })
        .collect()
}

/// Poisson weight of photon numbers `>= n` for mean `nbar`.
pub fn poisson_tail(nbar: f64, n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    if nbar == 0.0 {
        return 0.0;
    }
    let lnb = nbar.ln();
    let mut lnfact: f64 = (2..=n).map(|k| (k as f64).ln()).sum();
    let mut sum = 0.0;
    let mut k = n;
    loop {
        let term = (-nbar + k as f64 * lnb - lnfact).exp();
        sum += term;
        if (k as f64 > nbar && term < 1e-18 * sum.max(1e-300)) || term == 0.0 && k as f64 > nbar {
            break;
        }
        k += 1;
        lnfact += (k as f64).ln();
    }
    sum.min(1.0)
}

fn smallest_with_tail_below(nbar: f64, leak_tol: f64) -> usize {
    let mut n = 1;
    while poisson_tail(nbar, n) >= leak_tol {
        n += 1;
    }
    n
}

/// Smallest field and trap truncations meeting the leakage tolerance, never
/// below the default guard margins.
pub fn choose_truncation(params: &PhysicalParams, leak_tol: f64) -> Result<HilbertDims> {
    params.validate()?;
    if !(leak_tol > 0.0 && leak_tol <= 1e-3) {
        return Err(Error::InvalidParameter(format!("leak_tol must lie in (0, 1e-3], got {leak_tol}")));
    }
    let nbar = params.n_bar();
    let guard = (nbar + 8.0 * nbar.sqrt() + 10.0).ceil();
    if guard > MAX_FIELD_DIM as f64 {
        return Err(Error::Truncation(format!("n_bar = {nbar} needs n_field > {MAX_FIELD_DIM}")));
    }
    let n_field = (guard as usize).max(smallest_with_tail_below(nbar, leak_tol));
    if n_field > MAX_FIELD_DIM {
        return Err(Error::Truncation(format!("n_bar = {nbar} needs n_field > {MAX_FIELD_DIM}")));
    }
    let n_trap = if params.gamma_abs == 0.0 {
        1
    } else {
        let d_max = 2.0 * params.gamma_abs * (n_field as f64).sqrt() / params.omega_t;
        smallest_with_tail_below(d_max * d_max, leak_tol) + TRAP_MARGIN
    };
    Ok(HilbertDims::new(n_field, n_trap, leak_tol))
}

pub fn annihilation(dim: usize) -> ComplexMatrix {
    let mut a = ComplexMatrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

fn check_dense(dims: &HilbertDims) -> Result<usize> {
    dims.validate()?;
    let d = dims.full_dim();
    if d > MAX_DENSE_DIM {
        return Err(Error::Truncation(format!("dense Hamiltonian of dimension {d} exceeds {MAX_DENSE_DIM}; use the excitation blocks")));
    }
    Ok(d)
}

fn fill_hamiltonian(params: &PhysicalParams, dims: &HilbertDims, gamma: C64) -> Result<ComplexMatrix> {
    let d = check_dense(dims)?;
    let (nf, nt) = (dims.n_field, dims.n_trap);
    let g = params.g();
    let mut h = ComplexMatrix::zeros(d, d);
    for q in 0..3 {
        let z = match q {
            1 => -0.5 * params.delta,
            2 => 0.5 * params.delta,
            _ => 0.0,
        };
        for n in 0..nf {
            for k in 0..nt {
                let i = dims.index(q, n, k);
                h[(i, i)] = C64::new(params.omega_t * k as f64 + z, 0.0);
            }
        }
    }
    for n in 1..nf {
        let sn = (n as f64).sqrt();
        for k in 0..nt {
            let from = dims.index(1, n, k);
            let to = dims.index(2, n - 1, k);
            h[(to, from)] += g * sn;
            h[(from, to)] += g.conj() * sn;
            // (b + b^dagger) on the trap index
            for (k2, amp) in [(k.wrapping_sub(1), (k as f64).sqrt()), (k + 1, ((k + 1) as f64).sqrt())] {
                if k2 < nt {
                    let to = dims.index(2, n - 1, k2);
                    h[(to, from)] += gamma * sn * amp;
                    h[(from, to)] += gamma.conj() * sn * amp;
                }
            }
        }
    }
    Ok(h)
}

/// Full interaction-picture Hamiltonian, including the motional sidebands.
pub fn build_h_interaction(params: &PhysicalParams, dims: &HilbertDims) -> Result<ComplexMatrix> {
    params.validate()?;
    fill_hamiltonian(params, dims, params.gamma())
}

/// Target Hamiltonian without motional coupling.
pub fn build_h_ideal(params: &PhysicalParams, dims: &HilbertDims) -> Result<ComplexMatrix> {
    params.validate()?;
    fill_hamiltonian(params, dims, ZERO)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    /// `|0> (x) |n> (x) trap`: trap oscillation only.
    Ground { n: usize },
    /// `{|1,n>, |2,n-1>} (x) trap`; `n = 0` and `n = n_field` are single-state
    /// edges of the truncation.
    Excitation { n: usize },
}

#[derive(Debug, Clone)]
pub struct Block {
    pub kind: BlockKind,
    /// Full-space indices, in the block's local order.
    pub indices: Vec<usize>,
    pub h: ComplexMatrix,
}

fn excitation_indices(dims: &HilbertDims, n: usize) -> (Vec<usize>, usize) {
    let mut idx = Vec::with_capacity(2 * dims.n_trap);
    let mut upper = 0;
    if n < dims.n_field {
        idx.extend((0..dims.n_trap).map(|k| dims.index(1, n, k)));
        upper = dims.n_trap;
    }
    if n >= 1 {
        idx.extend((0..dims.n_trap).map(|k| dims.index(2, n - 1, k)));
    }
    (idx, upper)
}

/// One excitation block `{|1,n>, |2,n-1>} (x) trap` of the Hamiltonian,
/// built directly at size `2 n_trap` (never touches the full space).
pub fn excitation_block(params: &PhysicalParams, dims: &HilbertDims, n: usize, with_motion: bool) -> Block {
    let nt = dims.n_trap;
    let (indices, upper) = excitation_indices(dims, n);
    let m = indices.len();
    let mut h = ComplexMatrix::zeros(m, m);
    let z1 = if upper > 0 { -0.5 * params.delta } else { 0.5 * params.delta };
    for s in 0..m {
        let k = s % nt;
        let z = if s < upper { z1 } else { 0.5 * params.delta };
        h[(s, s)] = C64::new(params.omega_t * k as f64 + z, 0.0);
    }
    if upper > 0 && m > upper {
        let sn = (n as f64).sqrt();
        let g = params.g();
        let gamma = if with_motion { params.gamma() } else { ZERO };
        for k in 0..nt {
            let from = k;
            h[(nt + k, from)] += g * sn;
            h[(from, nt + k)] += g.conj() * sn;
            for (k2, amp) in [(k.wrapping_sub(1), (k as f64).sqrt()), (k + 1, ((k + 1) as f64).sqrt())] {
                if k2 < nt {
                    h[(nt + k2, from)] += gamma * sn * amp;
                    h[(from, nt + k2)] += gamma.conj() * sn * amp;
                }
            }
        }
    }
    Block { kind: BlockKind::Excitation { n }, indices, h }
}

/// Block decomposition of the interaction Hamiltonian: every ground-level
/// block followed by the excitation blocks `n = 0..=n_field`.
pub fn excitation_blocks(params: &PhysicalParams, dims: &HilbertDims) -> Result<Vec<Block>> {
    params.validate()?;
    dims.validate()?;
    let nt = dims.n_trap;
    let trap_ladder = ComplexMatrix::from_real_diagonal(&(0..nt).map(|k| params.omega_t * k as f64).collect::<Vec<_>>());
    let mut blocks: Vec<Block> = (0..dims.n_field)
        .map(|n| Block { kind: BlockKind::Ground { n }, indices: (0..nt).map(|k| dims.index(0, n, k)).collect(), h: trap_ladder.clone() })
        .collect();
    blocks.extend((0..=dims.n_field).map(|n| excitation_block(params, dims, n, true)));
    Ok(blocks)
}

/// `(|0> + |1>)/sqrt(2) (x) |alpha> (x) |0>_trap` on the full product space.
pub fn initial_state_decoupling(params: &PhysicalParams, dims: &HilbertDims) -> Result<Vec<C64>> {
    params.validate()?;
    dims.validate()?;
    let leak = poisson_tail(params.n_bar(), dims.n_field);
    if leak > dims.leak_tol {
        return Err(Error::Truncation(format!(
            "coherent drive leaks {leak:.3e} beyond n_field = {} (tolerance {:.3e})",
            dims.n_field, dims.leak_tol
        )));
    }
    let mut field = coherent_state(params.alpha, dims.n_field);
    crate::numerics::normalize(&mut field);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut psi = vec![ZERO; dims.full_dim()];
    for (n, &c) in field.iter().enumerate() {
        psi[dims.index(0, n, 0)] = c * s;
        psi[dims.index(1, n, 0)] = c * s;
    }
    Ok(psi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> (PhysicalParams, HilbertDims) {
        let p = PhysicalParams { gamma_abs: 0.3, omega_t: 1.5, delta: 0.4, g_phase: 0.7, alpha: C64::new(1.0, 0.5), ..Default::default() };
        (p, HilbertDims::new(5, 4, 1e-6))
    }

    #[test]
    fn annihilation_examples() {
        let a = annihilation(2);
        assert_eq!(a[(0, 1)], C64::new(1.0, 0.0));
        assert_eq!(a[(1, 0)], ZERO);
        let n = annihilation(5).adjoint().matmul(&annihilation(5));
        assert!((n[(3, 3)].re - 3.0).abs() < 1e-14);
    }

    #[test]
    fn commutator_is_identity_below_top_row() {
        let a = annihilation(6);
        let ad = a.adjoint();
        let c = &a.matmul(&ad) - &ad.matmul(&a);
        for i in 0..5 {
            for j in 0..6 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((c[(i, j)] - C64::new(want, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn hamiltonians_hermitian_and_ground_sector_inert() {
        let (p, d) = small();
        let h = build_h_interaction(&p, &d).unwrap();
        assert!(h.hermitian_asymmetry() < 1e-12 * h.max_abs());
        for n in 0..d.n_field {
            for k in 0..d.n_trap {
                let i = d.index(0, n, k);
                for j in 0..d.full_dim() {
                    let want = if i == j { p.omega_t * k as f64 } else { 0.0 };
                    assert_eq!(h[(i, j)], C64::new(want, 0.0));
                }
            }
        }
        let hid = build_h_ideal(&p, &d).unwrap();
        assert!(hid.hermitian_asymmetry() == 0.0);
        let p0 = PhysicalParams { gamma_abs: 0.0, ..p };
        assert_eq!(build_h_interaction(&p0, &d).unwrap(), hid);
    }

    #[test]
    fn dense_guard() {
        let p = PhysicalParams::default();
        assert!(matches!(build_h_interaction(&p, &HilbertDims::new(200, 20, 1e-10)), Err(Error::Truncation(_))));
    }

    #[test]
    fn truncation_examples() {
        let p0 = PhysicalParams { alpha: ZERO, ..Default::default() };
        let d = choose_truncation(&p0, 1e-10).unwrap();
        assert_eq!(d.n_field, 10);
        assert_eq!(d.n_trap, 1);
        let p = PhysicalParams { gamma_abs: 0.4, omega_t: 10.0, ..Default::default() };
        let d = choose_truncation(&p, 1e-10).unwrap();
        assert_eq!(d.n_field, 190);
        assert!(poisson_tail(100.0, d.n_field) < 1e-10);
        let big = PhysicalParams { alpha: C64::new(70.0, 0.0), ..Default::default() };
        assert!(matches!(choose_truncation(&big, 1e-10), Err(Error::Truncation(_))));
        assert!(choose_truncation(&p, 0.0).is_err());
        assert!(choose_truncation(&p, 1e-2).is_err());
    }

    #[test]
    fn initial_state_norm() {
        let p = PhysicalParams { gamma_abs: 0.4, omega_t: 10.0, ..Default::default() };
        let d = choose_truncation(&p, 1e-10).unwrap();
        let psi = initial_state_decoupling(&p, &d).unwrap();
        assert!((crate::numerics::norm(&psi) - 1.0).abs() < 1e-9);
        let tight = HilbertDims::new(120, d.n_trap, 1e-10);
        assert!(initial_state_decoupling(&p, &tight).is_err());
    }
}
