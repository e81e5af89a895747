//! Closed-form dynamics at zero detuning: dressed doublets, polaron-type
//! displacement of the trap oscillator, the nine branches of the two-cavity
//! Ramsey sequence and the field-state coefficients they produce.
//!
//! Two independent routes to the field state are provided. [`FieldCoefficients`]
//! evaluates the closed-form sector coefficients; [`BranchState`] keeps the
//! branches as explicit sums of coherent trap states and traces the traps out
//! with [`coherent_overlap`]. Tests hold the two against each other and
//! against the brute-force simulation in [`crate::oracle`].

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{coherent_state, PhysicalParams};
use crate::numerics::{ComplexMatrix, ONE, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// `|+,n> = alpha_plus |1,n> + beta_plus |2,n-1>`, likewise for `|-,n>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DressedCoeffs {
    pub n: usize,
    pub alpha_plus: C64,
    pub alpha_minus: C64,
    pub beta_plus: C64,
    pub beta_minus: C64,
    /// `Omega_R(n) = sqrt(delta^2/4 + |g|^2 n)`
    pub rabi: f64,
}

pub fn dressed_coefficients(n: usize, params: &PhysicalParams) -> Result<DressedCoeffs> {
    if n == 0 {
        return Err(Error::NoDoublet);
    }
    let half = 0.5 * params.delta;
    let rabi = (half * half + params.g_abs * params.g_abs * n as f64).sqrt();
    let big = ((rabi + half) / (2.0 * rabi)).sqrt();
    let small = ((rabi - half).max(0.0) / (2.0 * rabi)).sqrt();
    Ok(DressedCoeffs {
        n,
        alpha_plus: C64::from_polar(small, -params.g_phase),
        alpha_minus: C64::new(big, 0.0),
        beta_plus: C64::new(big, 0.0),
        beta_minus: -C64::from_polar(small, params.g_phase),
        rabi,
    })
}

fn require_resonance(params: &PhysicalParams) -> Result<()> {
    if params.delta != 0.0 {
        return Err(Error::NonZeroDetuning(params.delta));
    }
    Ok(())
}

/// `alpha_n(t) = (|gamma| sqrt(n) / omega_t) (1 - e^{-i omega_t t})`
pub fn displacement_alpha(n: usize, t: f64, params: &PhysicalParams) -> C64 {
    let w = params.omega_t;
    (ONE - C64::from_polar(1.0, -w * t)) * (params.gamma_abs * (n as f64).sqrt() / w)
}

/// `Phi_n(t) = (|gamma|^2 n / omega_t^2) (omega_t t - sin(omega_t t))`
pub fn phase_phi(n: usize, t: f64, params: &PhysicalParams) -> f64 {
    let w = params.omega_t;
    params.gamma_abs * params.gamma_abs * n as f64 / (w * w) * (w * t - (w * t).sin())
}

/// `(|gamma|/omega_t)^2 (1 - cos(omega_t tau))`, so that `|alpha_n(tau)|^2 = 2 n kappa`.
pub fn kappa(tau: f64, params: &PhysicalParams) -> f64 {
    let w = params.omega_t;
    let r = params.gamma_abs / w;
    r * r * (1.0 - (w * tau).cos())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DressedEvolution {
    /// `e^{i Phi_n(t) -+ i |g| sqrt(n) t}`
    pub phase: C64,
    /// Trap coherent amplitude `-+ alpha_n(t)`.
    pub displacement: C64,
}

/// Image of `|+-, n> (x) |0>_trap` under `exp(-i H_I t)`.
pub fn analytic_evolve_dressed(n: usize, sign: Sign, t: f64, params: &PhysicalParams) -> Result<DressedEvolution> {
    require_resonance(params)?;
    if n == 0 {
        return Err(Error::NoDoublet);
    }
    let s = sign.value();
    let rabi_phase = -s * params.g_abs * (n as f64).sqrt() * t;
    Ok(DressedEvolution {
        phase: C64::from_polar(1.0, phase_phi(n, t, params) + rabi_phase),
        displacement: displacement_alpha(n, t, params) * (-s),
    })
}

/// `<b1|b2>` for coherent states.
pub fn coherent_overlap(b1: C64, b2: C64) -> C64 {
    (-0.5 * b1.norm_sqr() - 0.5 * b2.norm_sqr() + b1.conj() * b2).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchAmplitudes {
    pub g1_plus: C64,
    pub g1_minus: C64,
    pub g2_plus: C64,
    pub g2_minus: C64,
    pub f_n: C64,
}

/// `f_n = e^{-|alpha|^2/2} alpha^n / sqrt(n!) / (2 sqrt 2)` and the four
/// phase-dressed amplitudes built from it.
pub fn branch_amplitudes(n: usize, tau: f64, params: &PhysicalParams) -> Result<BranchAmplitudes> {
    require_resonance(params)?;
    let c = coherent_state(params.alpha, n + 2);
    let scale = 1.0 / (2.0 * std::f64::consts::SQRT_2);
    let f_n = c[n] * scale;
    let f_n1 = c[n + 1] * scale;
    let g_unit = C64::from_polar(1.0, params.g_phase);
    let rot = |k: usize, s: f64| C64::from_polar(1.0, phase_phi(k, tau, params) + s * params.g_abs * (k as f64).sqrt() * tau);
    Ok(BranchAmplitudes {
        g1_plus: f_n * rot(n, 1.0),
        g1_minus: f_n * rot(n, -1.0),
        g2_plus: -f_n1 * g_unit * rot(n + 1, 1.0),
        g2_minus: f_n1 * g_unit * rot(n + 1, -1.0),
        f_n,
    })
}

fn check_label(i: usize, j: usize) -> Result<()> {
    if i > 2 || j > 2 {
        return Err(Error::InvalidBranch(i, j));
    }
    Ok(())
}

/// Global phase `Phi_ij` of branch `|i>_A |j>_B`, from the lab-frame energies
/// `omega_0` (level 0) and `-+ omega_c/2` (levels 1, 2) over the full sequence.
pub fn branch_phase(i: usize, j: usize, params: &PhysicalParams) -> Result<f64> {
    check_label(i, j)?;
    let level = |q: usize| match q {
        0 => params.omega_0_t,
        1 => -0.5 * params.omega_c_t,
        _ => 0.5 * params.omega_c_t,
    };
    Ok(level(i) + level(j))
}

/// One coherent component of a branch: field Fock state `|n>` times coherent
/// trap states `|beta_a>_A |beta_b>_B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchTerm {
    pub n: usize,
    pub amp: C64,
    pub beta_a: C64,
    pub beta_b: C64,
}

/// Unnormalized branch `|g_ij>` of the two-cavity sequence. The full state is
/// `sum_ij e^{-i phase} |i>_A |j>_B |g_ij>`.
#[derive(Debug, Clone)]
pub struct BranchState {
    pub label: (usize, usize),
    pub phase: f64,
    pub terms: Vec<BranchTerm>,
}

/// Effect of one cavity window on `|q_in> |n_in> |0>_trap` projected on
/// qubit level `q_out`: list of (amplitude, trap displacement).
fn cavity_kick(q_out: usize, n_in: usize, tau: f64, params: &PhysicalParams) -> Vec<(C64, C64)> {
    match q_out {
        0 => vec![(ONE, ZERO)],
        1 => {
            let base = C64::from_polar(0.5, phase_phi(n_in, tau, params));
            let th = params.g_abs * (n_in as f64).sqrt() * tau;
            let a = displacement_alpha(n_in, tau, params);
            vec![(base * C64::from_polar(1.0, th), a), (base * C64::from_polar(1.0, -th), -a)]
        }
        _ => {
            if n_in == 0 {
                return Vec::new();
            }
            let base = C64::from_polar(0.5, phase_phi(n_in, tau, params) + params.g_phase);
            let th = params.g_abs * (n_in as f64).sqrt() * tau;
            let a = displacement_alpha(n_in, tau, params);
            vec![(-base * C64::from_polar(1.0, th), a), (base * C64::from_polar(1.0, -th), -a)]
        }
    }
}

/// Builds `|g_ij>` with output field numbers `0..n_field`.
pub fn branch_state(i: usize, j: usize, tau: f64, params: &PhysicalParams, n_field: usize) -> Result<BranchState> {
    require_resonance(params)?;
    check_label(i, j)?;
    let absorbed = usize::from(i == 2) + usize::from(j == 2);
    let c = coherent_state(params.alpha, n_field + absorbed);
    let rot_a = C64::from_polar(1.0, -params.omega_t * (params.t_prop + tau));
    let mut terms = Vec::new();
    for n_out in 0..n_field {
        let n_in = n_out + absorbed;
        let n_mid = n_in - usize::from(i == 2);
        let field_phase = C64::from_polar(0.5, -params.omega_c_t * n_out as f64);
        for (amp_a, beta_a) in cavity_kick(i, n_in, tau, params) {
            for (amp_b, beta_b) in cavity_kick(j, n_mid, tau, params) {
                terms.push(BranchTerm { n: n_out, amp: c[n_in] * field_phase * amp_a * amp_b, beta_a: beta_a * rot_a, beta_b });
            }
        }
    }
    Ok(BranchState { label: (i, j), phase: branch_phase(i, j, params)?, terms })
}

impl BranchState {
    /// `Tr_traps |self><other|` in the field number basis.
    pub fn field_cross(&self, other: &BranchState, n_field: usize) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(n_field, n_field);
        for t1 in &self.terms {
            for t2 in &other.terms {
                if t1.n >= n_field || t2.n >= n_field {
                    continue;
                }
                let ov = coherent_overlap(t2.beta_a, t1.beta_a) * coherent_overlap(t2.beta_b, t1.beta_b);
                m[(t1.n, t2.n)] += t1.amp * t2.amp.conj() * ov;
            }
        }
        m
    }

    /// `Tr_traps |self><self|`
    pub fn field_operator(&self, n_field: usize) -> ComplexMatrix {
        self.field_cross(self, n_field)
    }

    pub fn norm_sqr(&self) -> f64 {
        let n_field = self.terms.iter().map(|t| t.n + 1).max().unwrap_or(0);
        self.field_operator(n_field).trace().re
    }
}

/// Per-point quantities shared by every closed-form coefficient.
struct Kinematics {
    c: Vec<C64>,
    sqrt: Vec<f64>,
    g_tau: f64,
    kappa: f64,
    /// `Phi_1(tau)`, the per-photon polaron phase.
    polaron: f64,
    omega_c_t: f64,
}

impl Kinematics {
    fn new(tau: f64, params: &PhysicalParams, n_field: usize) -> Self {
        let len = n_field + 2;
        Self {
            c: coherent_state(params.alpha, len),
            sqrt: (0..len).map(|n| (n as f64).sqrt()).collect(),
            g_tau: params.g_abs * tau,
            kappa: kappa(tau, params),
            polaron: phase_phi(1, tau, params),
            omega_c_t: params.omega_c_t,
        }
    }

    /// Trap trace `Tr{|s alpha_n><s' alpha_m|}`: `exp(-kappa (sqrt n -+ sqrt m)^2)`
    /// for equal / opposite signs, so `x` is `sqrt n -+ sqrt m`.
    #[inline]
    fn overlap(&self, x: f64) -> f64 {
        (-self.kappa * x * x).exp()
    }

    #[inline]
    fn cos(&self, x: f64) -> f64 {
        (self.g_tau * x).cos()
    }

    #[inline]
    fn rotation(&self, n: usize, m: usize, polaron_mult: f64) -> C64 {
        let d = n as f64 - m as f64;
        C64::from_polar(1.0, -(self.omega_c_t - polaron_mult * self.polaron) * d)
    }

    /// Single-cavity trap-traced factor: `+` for level 1, `-` for level 2.
    #[inline]
    fn single(&self, a: usize, b: usize, level2: bool) -> f64 {
        let (sa, sb) = (self.sqrt[a], self.sqrt[b]);
        let minus = self.cos(sa - sb) * self.overlap(sa - sb);
        let plus = self.cos(sa + sb) * self.overlap(sa + sb);
        if level2 {
            minus - plus
        } else {
            minus + plus
        }
    }

    fn coefficient(&self, i: usize, j: usize, n: usize, m: usize) -> C64 {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        match (lo, hi) {
            (0, 0) => 0.25 * self.c[n] * self.c[m].conj() * self.rotation(n, m, 0.0),
            (0, 1) => 0.125 * self.c[n] * self.c[m].conj() * self.single(n, m, false) * self.rotation(n, m, 1.0),
            (0, 2) => 0.125 * self.c[n + 1] * self.c[m + 1].conj() * self.single(n + 1, m + 1, true) * self.rotation(n, m, 1.0),
            (1, 1) => {
                let (sn, sm) = (self.sqrt[n], self.sqrt[m]);
                let e2 = |x: f64| (-2.0 * self.kappa * x * x).exp();
                let bracket = self.cos(sn - sm).powi(2) * e2(sn - sm)
                    + self.cos(sn + sm).powi(2) * e2(sn + sm)
                    + ((2.0 * self.g_tau * sn).cos() + (2.0 * self.g_tau * sm).cos()) * (-2.0 * self.kappa * (n + m) as f64).exp();
                0.0625 * self.c[n] * self.c[m].conj() * bracket * self.rotation(n, m, 2.0)
            }
            (1, 2) if i == 1 => {
                let (sn, sm) = (self.sqrt[n + 1], self.sqrt[m + 1]);
                let e2 = |x: f64| (-2.0 * self.kappa * x * x).exp();
                let bracket = self.cos(sn - sm).powi(2) * e2(sn - sm) - self.cos(sn + sm).powi(2) * e2(sn + sm);
                0.0625 * self.c[n + 1] * self.c[m + 1].conj() * bracket * self.rotation(n, m, 2.0)
            }
            (1, 2) => {
                // cavity A absorbs at n+1, cavity B sees n
                let bracket = self.single(n + 1, m + 1, true) * self.single(n, m, false);
                0.0625 * self.c[n + 1] * self.c[m + 1].conj() * bracket * self.rotation(n, m, 2.0)
            }
            _ => {
                let bracket = self.single(n + 2, m + 2, true) * self.single(n + 1, m + 1, true);
                0.0625 * self.c[n + 2] * self.c[m + 2].conj() * bracket * self.rotation(n, m, 2.0)
            }
        }
    }
}

/// Closed-form coefficient `a_ij(n, m)` of `|n><m|` in the field state.
pub fn field_coefficient(i: usize, j: usize, n: usize, m: usize, tau: f64, params: &PhysicalParams) -> Result<C64> {
    require_resonance(params)?;
    check_label(i, j)?;
    Ok(Kinematics::new(tau, params, n.max(m) + 1).coefficient(i, j, n, m))
}

/// All nine sector matrices `a_ij(n, m)`, `n, m < n_field`.
#[derive(Debug, Clone)]
pub struct FieldCoefficients {
    pub n_field: usize,
    pub tau: f64,
    sectors: Vec<ComplexMatrix>,
}

impl FieldCoefficients {
    pub fn compute(tau: f64, params: &PhysicalParams, n_field: usize) -> Result<Self> {
        require_resonance(params)?;
        let kin = Kinematics::new(tau, params, n_field);
        let mut sectors = Vec::with_capacity(9);
        for i in 0..3 {
            for j in 0..3 {
                let mut a = ComplexMatrix::zeros(n_field, n_field);
                // each sector is Hermitian: fill the upper triangle and mirror
                for n in 0..n_field {
                    for m in n..n_field {
                        let v = kin.coefficient(i, j, n, m);
                        a[(n, m)] = v;
                        a[(m, n)] = v.conj();
                    }
                }
                sectors.push(a);
            }
        }
        Ok(Self { n_field, tau, sectors })
    }

    pub fn sector(&self, i: usize, j: usize) -> &ComplexMatrix {
        &self.sectors[3 * i + j]
    }

    /// `Tr_{qubits, traps}` of the full state: every sector once.
    pub fn rho_field(&self) -> ComplexMatrix {
        let mut rho = ComplexMatrix::zeros(self.n_field, self.n_field);
        for s in &self.sectors {
            rho.add_scaled(s, ONE);
        }
        rho
    }

    /// Unnormalized Bell-compatible part `p rho_1 = a_10 + a_01`.
    pub fn bell_part(&self) -> ComplexMatrix {
        self.sector(1, 0) + self.sector(0, 1)
    }

    /// Unnormalized remainder `(1-p) rho_2`: every other sector.
    pub fn rest_part(&self) -> ComplexMatrix {
        let mut rho = ComplexMatrix::zeros(self.n_field, self.n_field);
        for i in 0..3 {
            for j in 0..3 {
                if (i, j) != (1, 0) && (i, j) != (0, 1) {
                    rho.add_scaled(self.sector(i, j), ONE);
                }
            }
        }
        rho
    }
}

/// Prior weight of the Bell-compatible sectors,
/// `p = 1/4 sum_n P(n) [1 + cos(2|g| sqrt(n) tau) e^{-4 n kappa}]` for `n < n_field`.
pub fn prior_p(tau: f64, params: &PhysicalParams, n_field: usize) -> Result<f64> {
    require_resonance(params)?;
    let c = coherent_state(params.alpha, n_field);
    let k = kappa(tau, params);
    Ok(0.25
        * c.iter()
            .enumerate()
            .map(|(n, cn)| {
                let x = 2.0 * params.g_abs * (n as f64).sqrt() * tau;
                cn.norm_sqr() * (1.0 + x.cos() * (-4.0 * n as f64 * k).exp())
            })
            .sum::<f64>())
}
