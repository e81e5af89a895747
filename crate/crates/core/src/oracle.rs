//! Brute-force reference simulations.
//!
//! [`RamseyOracle`] propagates the full two-cavity sequence on
//! `qubit_A (x) qubit_B (x) field (x) trap_A (x) trap_B` with a Taylor-series
//! integrator and a sparse copy of the dense single-cavity Hamiltonian from
//! [`crate::model`]. It shares no code with the closed forms in
//! [`crate::analytic`] and is only practical for small drive amplitudes.

use num_complex::Complex64 as C64;

use crate::analytic::{analytic_evolve_dressed, dressed_coefficients, Sign};
use crate::error::{Error, Result};
use crate::model::{build_h_interaction, coherent_state, excitation_block, poisson_tail, HilbertDims, PhysicalParams};
use crate::numerics::{hermitian_eig, hermitian_eigenvalues, ComplexMatrix, ONE, ZERO};

/// Largest full tensor dimension the oracle accepts.
pub const MAX_ORACLE_DIM: usize = 400_000;

struct Csr {
    row_start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
    norm_bound: f64,
}

impl Csr {
    fn from_dense(m: &ComplexMatrix) -> Self {
        let mut row_start = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut norm_bound = 0.0f64;
        for i in 0..m.rows() {
            let mut row_sum = 0.0;
            for (j, &v) in m.row(i).iter().enumerate() {
                if v != ZERO {
                    cols.push(j);
                    vals.push(v);
                    row_sum += v.norm();
                }
            }
            norm_bound = norm_bound.max(row_sum);
            row_start.push(cols.len());
        }
        Self { row_start, cols, vals, norm_bound }
    }
}

/// Layout of the two-cavity tensor space.
#[derive(Debug, Clone, Copy)]
struct Layout {
    nf: usize,
    nt: usize,
}

impl Layout {
    fn dim(&self) -> usize {
        9 * self.nf * self.nt * self.nt
    }

    #[inline]
    fn index(&self, qa: usize, qb: usize, n: usize, ka: usize, kb: usize) -> usize {
        (((qa * 3 + qb) * self.nf + n) * self.nt + ka) * self.nt + kb
    }
}

/// Single-cavity Hamiltonian acting on one (qubit, trap) pair of the tensor space.
struct CavityOperator<'a> {
    h: &'a Csr,
    layout: Layout,
    cavity_b: bool,
}

impl CavityOperator<'_> {
    fn apply(&self, input: &[C64], out: &mut [C64]) {
        let (nf, nt) = (self.layout.nf, self.layout.nt);
        out.iter_mut().for_each(|z| *z = ZERO);
        let split = |r: usize| (r / (nf * nt), (r / nt) % nf, r % nt);
        for r in 0..self.h.row_start.len() - 1 {
            let (q_r, n_r, k_r) = split(r);
            for idx in self.h.row_start[r]..self.h.row_start[r + 1] {
                let (q_c, n_c, k_c) = split(self.h.cols[idx]);
                let v = self.h.vals[idx];
                for q_s in 0..3 {
                    for k_s in 0..nt {
                        let (to, from) = if self.cavity_b {
                            (self.layout.index(q_s, q_r, n_r, k_s, k_r), self.layout.index(q_s, q_c, n_c, k_s, k_c))
                        } else {
                            (self.layout.index(q_r, q_s, n_r, k_r, k_s), self.layout.index(q_c, q_s, n_c, k_c, k_s))
                        };
                        out[to] += v * input[from];
                    }
                }
            }
        }
    }

    /// `psi <- exp(-i H t) psi` by Taylor series on steps with `||H|| dt <= 1`.
    fn propagate(&self, psi: &mut [C64], t: f64) {
        if t == 0.0 {
            return;
        }
        let steps = (self.h.norm_bound * t).ceil().max(1.0) as usize;
        let dt = t / steps as f64;
        let mut term = vec![ZERO; psi.len()];
        let mut next = vec![ZERO; psi.len()];
        for _ in 0..steps {
            term.copy_from_slice(psi);
            for k in 1..80 {
                self.apply(&term, &mut next);
                let s = C64::new(0.0, -dt / k as f64);
                let mut size = 0.0;
                for (p, (tm, nx)) in psi.iter_mut().zip(term.iter_mut().zip(&next)) {
                    *tm = *nx * s;
                    *p += *tm;
                    size += tm.norm_sqr();
                }
                if size.sqrt() < 1e-18 {
                    break;
                }
            }
        }
    }
}

/// Truncations for the oracle: field and trap tails below `leak_tol`.
pub fn oracle_dims(params: &PhysicalParams, leak_tol: f64) -> Result<HilbertDims> {
    let mut nf = 1;
    while poisson_tail(params.n_bar(), nf) >= leak_tol {
        nf += 1;
    }
    nf += 2;
    let nt = if params.gamma_abs == 0.0 {
        1
    } else {
        let d = 2.0 * params.gamma_abs * (nf as f64).sqrt() / params.omega_t;
        let mut k = 1;
        while poisson_tail(d * d, k) >= leak_tol {
            k += 1;
        }
        k + 4
    };
    Ok(HilbertDims::new(nf, nt, leak_tol))
}

/// Full state after the two-cavity sequence, computed by direct propagation.
pub struct RamseyOracle {
    layout: Layout,
    pub dims: HilbertDims,
    pub psi: Vec<C64>,
}

impl RamseyOracle {
    pub fn run(params: &PhysicalParams, dims: HilbertDims) -> Result<Self> {
        params.validate()?;
        let layout = Layout { nf: dims.n_field, nt: dims.n_trap };
        if layout.dim() > MAX_ORACLE_DIM {
            return Err(Error::Truncation(format!("oracle dimension {} exceeds {MAX_ORACLE_DIM}", layout.dim())));
        }
        let h = Csr::from_dense(&build_h_interaction(params, &dims)?);
        let (nf, nt) = (layout.nf, layout.nt);

        let mut field = coherent_state(params.alpha, nf);
        let s: f64 = field.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        field.iter_mut().for_each(|z| *z /= s);
        let mut psi = vec![ZERO; layout.dim()];
        for qa in 0..2 {
            for qb in 0..2 {
                for (n, &c) in field.iter().enumerate() {
                    psi[layout.index(qa, qb, n, 0, 0)] = 0.5 * c;
                }
            }
        }

        let trap_phase = |psi: &mut [C64], which_a: bool, t: f64| {
            let rot: Vec<C64> = (0..nt).map(|k| C64::from_polar(1.0, -params.omega_t * k as f64 * t)).collect();
            for (i, z) in psi.iter_mut().enumerate() {
                let k = if which_a { (i / nt) % nt } else { i % nt };
                *z *= rot[k];
            }
        };

        let tau = params.tau;
        CavityOperator { h: &h, layout, cavity_b: false }.propagate(&mut psi, tau);
        trap_phase(&mut psi, false, tau);
        trap_phase(&mut psi, true, params.t_prop);
        trap_phase(&mut psi, false, params.t_prop);
        CavityOperator { h: &h, layout, cavity_b: true }.propagate(&mut psi, tau);
        trap_phase(&mut psi, true, tau);

        // lab frame: omega_0 on level 0, -+omega_c/2 on levels 1, 2, omega_c per photon
        let level = |q: usize| match q {
            0 => params.omega_0_t,
            1 => -0.5 * params.omega_c_t,
            _ => 0.5 * params.omega_c_t,
        };
        for qa in 0..3 {
            for qb in 0..3 {
                for n in 0..nf {
                    let ph = C64::from_polar(1.0, -(level(qa) + level(qb) + params.omega_c_t * n as f64));
                    for ka in 0..nt {
                        for kb in 0..nt {
                            psi[layout.index(qa, qb, n, ka, kb)] *= ph;
                        }
                    }
                }
            }
        }
        Ok(Self { layout, dims, psi })
    }

    /// `Tr_traps <i,j| psi><psi |k,l>` as a field operator.
    pub fn field_block(&self, (i, j): (usize, usize), (k, l): (usize, usize)) -> ComplexMatrix {
        let (nf, nt) = (self.layout.nf, self.layout.nt);
        let mut m = ComplexMatrix::zeros(nf, nf);
        for n in 0..nf {
            let a = self.layout.index(i, j, n, 0, 0);
            for mm in 0..nf {
                let b = self.layout.index(k, l, mm, 0, 0);
                let mut acc = ZERO;
                for t in 0..nt * nt {
                    acc += self.psi[a + t] * self.psi[b + t].conj();
                }
                m[(n, mm)] = acc;
            }
        }
        m
    }

    pub fn sector(&self, i: usize, j: usize) -> ComplexMatrix {
        self.field_block((i, j), (i, j))
    }

    pub fn rho_field(&self) -> ComplexMatrix {
        let mut rho = ComplexMatrix::zeros(self.layout.nf, self.layout.nf);
        for i in 0..3 {
            for j in 0..3 {
                rho.add_scaled(&self.sector(i, j), ONE);
            }
        }
        rho
    }

    /// Discrimination figures computed directly from the simulated state:
    /// the qubit pair is conditioned on the optimal projector and compared
    /// with the Bell state `(|01> + |10>)/sqrt 2`.
    pub fn summary(&self) -> Result<OracleSummary> {
        let bell = &self.sector(1, 0) + &self.sector(0, 1);
        let rho = self.rho_field();
        let rest = &rho - &bell;
        let p = bell.trace().re;
        let x = &bell - &rest;
        let eig = hermitian_eig(&x)?;
        let nf = self.layout.nf;
        let mut t = ComplexMatrix::zeros(nf, nf);
        for (k, &lam) in eig.values.iter().enumerate() {
            if lam >= -1e-12 {
                let v = eig.vector(k);
                t.add_scaled(&ComplexMatrix::outer(&v, &v), ONE);
            }
        }
        let trace_norm: f64 = hermitian_eigenvalues(&x)?.iter().map(|l| l.abs()).sum();
        let e_min = 0.5 * (1.0 - trace_norm);
        let p_bell = t.trace_product(&bell).re;

        // conditional two-qubit state on the 3x3 level space
        let norm = t.trace_product(&rho).re;
        let mut rho_ab = ComplexMatrix::zeros(9, 9);
        for a in 0..9 {
            for b in 0..9 {
                let blk = self.field_block((a / 3, a % 3), (b / 3, b % 3));
                rho_ab[(a, b)] = t.trace_product(&blk) / norm;
            }
        }
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut psi_plus = vec![ZERO; 9];
        psi_plus[1] = C64::new(h, 0.0);
        psi_plus[3] = C64::new(h, 0.0);
        let f2 = rho_ab.sandwich(&psi_plus, &psi_plus).re;
        Ok(OracleSummary { p, e_min, p_bell, f_opt: f2.max(0.0).sqrt(), rho_field: rho, rho_ab })
    }
}

#[derive(Debug, Clone)]
pub struct OracleSummary {
    pub p: f64,
    pub e_min: f64,
    pub p_bell: f64,
    pub f_opt: f64,
    pub rho_field: ComplexMatrix,
    pub rho_ab: ComplexMatrix,
}

/// `1 - Re <analytic|numeric>` for a dressed state `|+-,n> (x) |0>_trap` evolved
/// for time `t`, comparing the closed form with the numeric exponential of the
/// excitation block (trap truncated at `n_trap`).
pub fn dressed_evolution_deficit(n: usize, sign: Sign, t: f64, params: &PhysicalParams, n_trap: usize) -> Result<f64> {
    let dims = HilbertDims::new(n + 1, n_trap, 1e-12);
    let block = excitation_block(params, &dims, n, true);
    let d = dressed_coefficients(n, params)?;
    let (a, b) = match sign {
        Sign::Plus => (d.alpha_plus, d.beta_plus),
        Sign::Minus => (d.alpha_minus, d.beta_minus),
    };
    let mut psi0 = vec![ZERO; 2 * n_trap];
    psi0[0] = a;
    psi0[n_trap] = b;
    let numeric = hermitian_eig(&block.h)?.evolve(&psi0, t);

    let ev = analytic_evolve_dressed(n, sign, t, params)?;
    let coh = coherent_state(ev.displacement, n_trap);
    let mut analytic = vec![ZERO; 2 * n_trap];
    for k in 0..n_trap {
        analytic[k] = ev.phase * a * coh[k];
        analytic[n_trap + k] = ev.phase * b * coh[k];
    }
    let ov: C64 = analytic.iter().zip(&numeric).map(|(x, y)| x.conj() * y).sum();
    Ok(1.0 - ov.re)
}
