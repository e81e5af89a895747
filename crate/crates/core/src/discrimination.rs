//! Minimum-error discrimination of the photon-detector field state and the
//! post-selected Bell fidelity.

use log::warn;
use num_complex::Complex64 as C64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{kappa, phase_phi, prior_p, FieldCoefficients};
use crate::error::{Error, Result};
use crate::model::{coherent_state, HilbertDims, PhysicalParams};
use crate::numerics::{hermitian_eig_with, hermitian_eigenvalues_with, normalize, ComplexMatrix, Tolerances, ONE};

/// Two-hypothesis ensemble `{(p, rho_1), (1 - p, rho_2)}` on the field.
#[derive(Debug, Clone)]
pub struct FieldEnsemble {
    pub p: f64,
    pub rho1: ComplexMatrix,
    pub rho2: ComplexMatrix,
    pub basis_dim: usize,
    /// Messages about clipped negative eigenvalues.
    pub diagnostics: Vec<String>,
}

fn clip_negative(rho: &ComplexMatrix, which: &'static str, tol: &Tolerances, diagnostics: &mut Vec<String>) -> Result<ComplexMatrix> {
    let vals = hermitian_eigenvalues_with(rho, tol)?;
    let min = vals.first().copied().unwrap_or(0.0);
    if min < -tol.psd_fail {
        return Err(Error::NotPositive { which, min });
    }
    if min >= -tol.psd_clip {
        return Ok(rho.clone());
    }
    let msg = format!("{which}: clipped eigenvalue {min:.3e} to zero");
    warn!("{msg}");
    diagnostics.push(msg);
    let eig = hermitian_eig_with(rho, tol)?;
    let clipped = eig.map(|x| C64::new(x.max(0.0), 0.0));
    let tr = clipped.trace().re;
    Ok(clipped.scale_real(1.0 / tr))
}

impl FieldEnsemble {
    /// Validates unit traces and positivity; tiny negative eigenvalues are
    /// clipped with a diagnostic.
    pub fn new(p: f64, rho1: ComplexMatrix, rho2: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) || !p.is_finite() {
            return Err(Error::InvalidParameter(format!("prior must lie in [0, 1], got {p}")));
        }
        if rho1.rows() != rho2.rows() {
            return Err(Error::DimensionMismatch(format!("rho1 is {}-dim, rho2 is {}-dim", rho1.rows(), rho2.rows())));
        }
        rho1.check_hermitian(tol.hermitian)?;
        rho2.check_hermitian(tol.hermitian)?;
        for (name, r) in [("rho1", &rho1), ("rho2", &rho2)] {
            let tr = r.trace();
            if (tr.re - 1.0).abs() > tol.state_norm || tr.im.abs() > tol.state_norm {
                return Err(Error::InvalidParameter(format!("{name} has trace {tr}")));
            }
        }
        let mut diagnostics = Vec::new();
        let rho1 = clip_negative(&rho1, "rho1", tol, &mut diagnostics)?;
        let rho2 = clip_negative(&rho2, "rho2", tol, &mut diagnostics)?;
        let basis_dim = rho1.rows();
        Ok(Self { p, rho1, rho2, basis_dim, diagnostics })
    }

    /// `X = p rho_1 - (1 - p) rho_2`
    pub fn helstrom_operator(&self) -> ComplexMatrix {
        let mut x = self.rho1.scale_real(self.p);
        x.add_scaled(&self.rho2, C64::new(-(1.0 - self.p), 0.0));
        x
    }
}

/// Field state of the photon detector at interaction time `tau`, split into the
/// Bell-heralding sectors `(1,0), (0,1)` and the rest.
pub fn assemble_field_state(params: &PhysicalParams, tau: f64, dims: &HilbertDims) -> Result<FieldEnsemble> {
    let coeffs = FieldCoefficients::compute(tau, params, dims.n_field)?;
    ensemble_from_coefficients(&coeffs, params, &Tolerances::DEFAULT)
}

pub fn ensemble_from_coefficients(coeffs: &FieldCoefficients, params: &PhysicalParams, tol: &Tolerances) -> Result<FieldEnsemble> {
    let p = prior_p(coeffs.tau, params, coeffs.n_field)?;
    let bell = coeffs.bell_part();
    let rest = coeffs.rest_part();
    let p_trace = bell.trace().re;
    if (p_trace - p).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!("prior {p} disagrees with sector trace {p_trace}")));
    }
    if p <= 0.0 {
        return Err(Error::UndefinedConditional(p));
    }
    let rest_trace = rest.trace().re;
    if rest_trace <= 0.0 {
        return Err(Error::UndefinedConditional(rest_trace));
    }
    FieldEnsemble::new(p, bell.scale_real(1.0 / p), rest.scale_real(1.0 / rest_trace), tol)
}

#[derive(Debug, Clone)]
pub struct HelstromProjector {
    pub t: ComplexMatrix,
    /// Number of eigenvalues of `X` kept (including zeros).
    pub rank: usize,
    /// Ascending spectrum of `X`.
    pub spectrum: Vec<f64>,
}

/// Projector onto the non-negative eigenspace of `X`. Eigenvalues with
/// `|x| < zero_eigenvalue` count as non-negative.
pub fn helstrom_projector(ensemble: &FieldEnsemble) -> Result<HelstromProjector> {
    helstrom_projector_with(ensemble, &Tolerances::DEFAULT)
}

pub fn helstrom_projector_with(ensemble: &FieldEnsemble, tol: &Tolerances) -> Result<HelstromProjector> {
    let x = ensemble.helstrom_operator();
    let eig = hermitian_eig_with(&x, tol)?;
    let n = x.rows();
    let first = eig.values.iter().position(|&v| v >= -tol.zero_eigenvalue).unwrap_or(n);
    let mut t = ComplexMatrix::zeros(n, n);
    let kept = first..n;
    for i in 0..n {
        let vi = eig.vectors.row(i);
        for j in i..n {
            let vj = eig.vectors.row(j);
            let s: C64 = kept.clone().map(|k| vi[k] * vj[k].conj()).sum();
            t[(i, j)] = s;
            t[(j, i)] = s.conj();
        }
    }
    Ok(HelstromProjector { t, rank: n - first, spectrum: eig.values })
}

fn check_projector(t: &ComplexMatrix, dim: usize, tol: &Tolerances) -> Result<()> {
    if t.rows() != dim || !t.is_square() {
        return Err(Error::DimensionMismatch(format!("projector is {}x{}, ensemble is {dim}-dim", t.rows(), t.cols())));
    }
    let asym = t.hermitian_asymmetry();
    if asym > tol.projector {
        return Err(Error::NotProjector(format!("max |T - T^dagger| = {asym:.3e}")));
    }
    let idem = t.matmul(t).max_abs_diff(t);
    if idem > tol.projector {
        return Err(Error::NotProjector(format!("max |T^2 - T| = {idem:.3e}")));
    }
    Ok(())
}

/// `E(T) = p Tr((1 - T) rho_1) + (1 - p) Tr(T rho_2)`
pub fn error_probability(t: &ComplexMatrix, ensemble: &FieldEnsemble) -> Result<f64> {
    check_projector(t, ensemble.basis_dim, &Tolerances::DEFAULT)?;
    let p = ensemble.p;
    Ok(p * (1.0 - t.trace_product(&ensemble.rho1).re) + (1.0 - p) * t.trace_product(&ensemble.rho2).re)
}

/// `E_min = (1 - ||p rho_1 - (1 - p) rho_2||_1) / 2`
pub fn min_error(ensemble: &FieldEnsemble) -> Result<f64> {
    let x = ensemble.helstrom_operator();
    let tn: f64 = hermitian_eigenvalues_with(&x, &Tolerances::DEFAULT)?.iter().map(|v| v.abs()).sum();
    Ok(0.5 * (1.0 - tn))
}

/// `P_Bell = p Tr(rho_1 T)`
pub fn p_bell(ensemble: &FieldEnsemble, t: &ComplexMatrix) -> Result<f64> {
    check_projector(t, ensemble.basis_dim, &Tolerances::DEFAULT)?;
    Ok(p_bell_unchecked(ensemble, t))
}

fn p_bell_unchecked(ensemble: &FieldEnsemble, t: &ComplexMatrix) -> f64 {
    ensemble.p * t.trace_product(&ensemble.rho1).re
}

/// `Tr_traps |g_10><g_01|` in the field number basis:
/// `1/4 c_n c_m^* e^{i(Phi_n - Phi_m)} cos(|g| sqrt(n) tau) cos(|g| sqrt(m) tau) e^{-kappa (n+m)} e^{-i omega_c t (n-m)}`.
pub fn cross_coefficient(n: usize, m: usize, tau: f64, params: &PhysicalParams) -> Result<C64> {
    if params.delta != 0.0 {
        return Err(Error::NonZeroDetuning(params.delta));
    }
    let c = coherent_state(params.alpha, n.max(m) + 1);
    Ok(cross_entry(&c, n, m, tau, params))
}

fn cross_vector(c: &[C64], tau: f64, params: &PhysicalParams) -> Vec<C64> {
    let k = kappa(tau, params);
    (0..c.len())
        .map(|n| {
            let ph = phase_phi(n, tau, params) - params.omega_c_t * n as f64;
            let amp = 0.5 * (params.g_abs * (n as f64).sqrt() * tau).cos() * (-k * n as f64).exp();
            c[n] * C64::from_polar(amp, ph)
        })
        .collect()
}

fn cross_entry(c: &[C64], n: usize, m: usize, tau: f64, params: &PhysicalParams) -> C64 {
    let v = cross_vector(&c[..n.max(m) + 1], tau, params);
    v[n] * v[m].conj()
}

/// Full cross matrix `c(n, m)`, `n, m < n_field` (rank one).
pub fn cross_matrix(tau: f64, params: &PhysicalParams, n_field: usize) -> Result<ComplexMatrix> {
    if params.delta != 0.0 {
        return Err(Error::NonZeroDetuning(params.delta));
    }
    let v = cross_vector(&coherent_state(params.alpha, n_field), tau, params);
    Ok(ComplexMatrix::outer(&v, &v))
}

/// Bell fidelity of the qubit pair conditioned on the outcome `T`:
/// `F^2 = [p Tr(T rho_1) + 2 Re Tr(T c)] / (2 Tr(T rho_F))`.
pub fn bell_fidelity(ensemble: &FieldEnsemble, t: &ComplexMatrix, cross: &ComplexMatrix) -> Result<f64> {
    check_projector(t, ensemble.basis_dim, &Tolerances::DEFAULT)?;
    bell_fidelity_unchecked(ensemble, t, cross)
}

fn bell_fidelity_unchecked(ensemble: &FieldEnsemble, t: &ComplexMatrix, cross: &ComplexMatrix) -> Result<f64> {
    let p = ensemble.p;
    let bell = p * t.trace_product(&ensemble.rho1).re;
    let norm = bell + (1.0 - p) * t.trace_product(&ensemble.rho2).re;
    if norm <= 1e-300 {
        return Err(Error::UndefinedConditional(norm));
    }
    let f2 = (bell + 2.0 * t.trace_product(cross).re) / (2.0 * norm);
    Ok(f2.max(0.0).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscriminationResult {
    pub tau: f64,
    pub p: f64,
    pub e_min: f64,
    pub p_bell: f64,
    pub f_opt: f64,
    pub rank_t: usize,
}

/// Full pipeline at one interaction time.
pub fn evaluate(params: &PhysicalParams, tau: f64, dims: &HilbertDims) -> Result<DiscriminationResult> {
    let ensemble = assemble_field_state(params, tau, dims)?;
    let proj = helstrom_projector(&ensemble)?;
    let cross = cross_matrix(tau, params, dims.n_field)?;
    let trace_norm: f64 = proj.spectrum.iter().map(|v| v.abs()).sum();
    Ok(DiscriminationResult {
        tau,
        p: ensemble.p,
        e_min: 0.5 * (1.0 - trace_norm),
        p_bell: p_bell_unchecked(&ensemble, &proj.t),
        f_opt: bell_fidelity_unchecked(&ensemble, &proj.t, &cross)?,
        rank_t: proj.rank,
    })
}

/// One result per grid point, in grid order.
pub fn sweep(params: &PhysicalParams, tau_grid: &[f64], dims: &HilbertDims) -> Result<Vec<DiscriminationResult>> {
    if tau_grid.is_empty() {
        return Err(Error::InvalidParameter("empty tau grid".into()));
    }
    params.validate()?;
    tau_grid.par_iter().map(|&tau| evaluate(params, tau, dims)).collect()
}

/// `points` equally spaced values from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..points).map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64).collect(),
    }
}

/// Longest contiguous run of results with `|p - 1/4| <= tol`, as an index range.
pub fn collapse_window(results: &[DiscriminationResult], tol: f64) -> Option<std::ops::Range<usize>> {
    let mut best: Option<std::ops::Range<usize>> = None;
    let mut start = None;
    for (i, r) in results.iter().enumerate() {
        let inside = (r.p - 0.25).abs() <= tol;
        match (inside, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                if best.as_ref().map_or(true, |b| i - s > b.len()) {
                    best = Some(s..i);
                }
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        if best.as_ref().map_or(true, |b| results.len() - s > b.len()) {
            best = Some(s..results.len());
        }
    }
    best
}

/// Index of the largest `F_opt` (first on ties).
pub fn best_fidelity(results: &[DiscriminationResult]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, r) in results.iter().enumerate() {
        if best.map_or(true, |b| r.f_opt > results[b].f_opt) {
            best = Some(i);
        }
    }
    best
}

fn random_complex(rng: &mut impl Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Orthogonal projector onto a random `rank`-dimensional subspace.
pub fn random_projector(dim: usize, rank: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(rank);
    while basis.len() < rank.min(dim) {
        let mut v: Vec<C64> = (0..dim).map(|_| random_complex(rng)).collect();
        for _ in 0..2 {
            for b in &basis {
                let c: C64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        if normalize(&mut v) > 1e-8 {
            basis.push(v);
        }
    }
    let mut t = ComplexMatrix::zeros(dim, dim);
    for b in &basis {
        t.add_scaled(&ComplexMatrix::outer(b, b), ONE);
    }
    t
}

/// Random full-rank density matrix `A A^dagger / Tr`.
pub fn random_density(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let a = ComplexMatrix::from_fn(dim, dim, |_, _| random_complex(rng));
    let rho = a.matmul(&a.adjoint()).hermitian_part();
    let tr = rho.trace().re;
    rho.scale_real(1.0 / tr)
}

pub fn random_ensemble(dim: usize, rng: &mut impl Rng) -> Result<FieldEnsemble> {
    let p = rng.gen_range(0.05..0.95);
    let r1 = random_density(dim, rng);
    let r2 = random_density(dim, rng);
    FieldEnsemble::new(p, r1, r2, &Tolerances::DEFAULT)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalityReport {
    pub e_min: f64,
    /// `E(T)` at the Helstrom projector.
    pub e_at_optimum: f64,
    /// Smallest error among the random projectors.
    pub best_random: f64,
    pub samples: usize,
}

impl OptimalityReport {
    /// Largest amount by which a random projector beat `E_min` (negative when none did).
    pub fn violation(&self) -> f64 {
        self.e_min - self.best_random
    }
}

/// Compares the Helstrom bound with `samples` random projectors of random rank.
pub fn optimality_sweep(ensemble: &FieldEnsemble, samples: usize, seed: u64) -> Result<OptimalityReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let proj = helstrom_projector(ensemble)?;
    let e_min = min_error(ensemble)?;
    let e_at_optimum = error_probability(&proj.t, ensemble)?;
    let dim = ensemble.basis_dim;
    let mut best_random = f64::INFINITY;
    for _ in 0..samples {
        let rank = rng.gen_range(0..=dim);
        let t = random_projector(dim, rank, &mut rng);
        best_random = best_random.min(error_probability(&t, ensemble)?);
    }
    Ok(OptimalityReport { e_min, e_at_optimum, best_random, samples })
}

/// Pure-state ensemble helper: `rho = |psi><psi|` for a normalized copy of `psi`.
pub fn pure_density(psi: &[C64]) -> ComplexMatrix {
    let mut v = psi.to_vec();
    normalize(&mut v);
    ComplexMatrix::outer(&v, &v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::ZERO;

    fn basis(dim: usize, k: usize) -> Vec<C64> {
        let mut v = vec![ZERO; dim];
        v[k] = ONE;
        v
    }

    #[test]
    fn orthogonal_states() {
        let e = FieldEnsemble::new(0.5, pure_density(&basis(2, 0)), pure_density(&basis(2, 1)), &Tolerances::DEFAULT).unwrap();
        let proj = helstrom_projector(&e).unwrap();
        assert!(proj.t.max_abs_diff(&pure_density(&basis(2, 0))) < 1e-14);
        assert!(min_error(&e).unwrap().abs() < 1e-14);
    }

    #[test]
    fn identical_states() {
        let r = random_density(4, &mut ChaCha8Rng::seed_from_u64(1));
        let e = FieldEnsemble::new(0.3, r.clone(), r, &Tolerances::DEFAULT).unwrap();
        let proj = helstrom_projector(&e).unwrap();
        assert!((error_probability(&proj.t, &e).unwrap() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn pure_state_closed_form() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let u = basis(2, 0);
        let v = vec![C64::new(h, 0.0), C64::new(0.0, h)];
        let e = FieldEnsemble::new(0.5, pure_density(&u), pure_density(&v), &Tolerances::DEFAULT).unwrap();
        let want = 0.5 * (1.0 - (1.0f64 - 0.5).sqrt());
        assert!((min_error(&e).unwrap() - want).abs() < 1e-14);
        assert!((want - 0.146_446_609_4).abs() < 1e-10);
    }

    #[test]
    fn trivial_projectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let e = random_ensemble(5, &mut rng).unwrap();
        let i5 = ComplexMatrix::identity(5);
        assert!((error_probability(&i5, &e).unwrap() - (1.0 - e.p)).abs() < 1e-14);
        assert!((error_probability(&ComplexMatrix::zeros(5, 5), &e).unwrap() - e.p).abs() < 1e-14);
        assert!((p_bell(&e, &i5).unwrap() - e.p).abs() < 1e-14);
        let bad = ComplexMatrix::identity(5).scale_real(0.5);
        assert!(matches!(error_probability(&bad, &e), Err(Error::NotProjector(_))));
    }

    #[test]
    fn ensemble_validation() {
        let r = pure_density(&basis(3, 0));
        let mut neg = r.clone();
        neg[(1, 1)] = C64::new(-1e-3, 0.0);
        neg[(0, 0)] = C64::new(1.0 + 1e-3, 0.0);
        assert!(matches!(FieldEnsemble::new(0.5, r.clone(), neg, &Tolerances::DEFAULT), Err(Error::NotPositive { .. })));
        let mut tiny = r.clone();
        tiny[(1, 1)] = C64::new(-1e-8, 0.0);
        tiny[(0, 0)] = C64::new(1.0 + 1e-8, 0.0);
        let e = FieldEnsemble::new(0.5, r.clone(), tiny, &Tolerances::DEFAULT).unwrap();
        assert_eq!(e.diagnostics.len(), 1);
        assert!(FieldEnsemble::new(1.5, r.clone(), r, &Tolerances::DEFAULT).is_err());
    }

    #[test]
    fn cross_examples() {
        let p = PhysicalParams { gamma_abs: 0.0, alpha: C64::new(1.1, 0.2), omega_c_t: 0.6, ..Default::default() };
        let c00 = cross_coefficient(0, 0, 1.3, &p).unwrap();
        assert!((c00.re - 0.25 * (-p.n_bar()).exp()).abs() < 1e-15);
        let c = coherent_state(p.alpha, 5);
        let want = 0.25 * c[2] * c[4].conj() * (2f64.sqrt() * 1.3).cos() * (2.0 * 1.3f64).cos() * C64::from_polar(1.0, -0.6 * (2.0 - 4.0));
        assert!((cross_coefficient(2, 4, 1.3, &p).unwrap() - want).norm() < 1e-15);
    }

    #[test]
    fn collapse_window_picks_longest_run() {
        let mk = |p: f64| DiscriminationResult { tau: 0.0, p, e_min: 0.0, p_bell: 0.0, f_opt: 0.0, rank_t: 0 };
        let rs: Vec<_> = [0.5, 0.25, 0.3, 0.251, 0.249, 0.255, 0.4].iter().map(|&p| mk(p)).collect();
        assert_eq!(collapse_window(&rs, 0.01), Some(3..6));
        assert_eq!(collapse_window(&rs[..1], 0.01), None);
    }

    #[test]
    fn grid() {
        assert_eq!(linear_grid(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
        assert_eq!(linear_grid(2.0, 5.0, 1), vec![2.0]);
    }
}
