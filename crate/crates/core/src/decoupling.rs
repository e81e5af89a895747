//! Bang-bang decoupling of the trap oscillator during one cavity window.
//!
//! The Hamiltonian is evolved block by block (one block per excitation
//! number, see [`crate::model::excitation_blocks`]) and instantaneous pulses
//! `exp(-i phi b^dagger b)` are applied as phases on the trap index. The
//! fidelity is `|<psi_0| U_id^dagger(t) U(t) |psi_0>|^2` with `U_id` generated by
//! the motion-free Hamiltonian.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    build_h_ideal, build_h_interaction, excitation_block, excitation_blocks, initial_state_decoupling, HilbertDims, PhysicalParams,
};
use crate::numerics::{hermitian_eig, ComplexMatrix, HermitianEigen, ZERO};

const PHASE_TOL: f64 = 1e-9;
const UNITARITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleKind {
    Equidistant,
    Uhrig,
}

impl std::str::FromStr for ScheduleKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equidistant" => Ok(Self::Equidistant),
            "uhrig" => Ok(Self::Uhrig),
            other => Err(Error::InvalidSchedule(format!("unknown schedule kind '{other}'"))),
        }
    }
}

impl std::fmt::Display for ScheduleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Equidistant => "equidistant",
            Self::Uhrig => "uhrig",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    pub kind: ScheduleKind,
    pub count: usize,
    /// Pulse phase `chi t_p`.
    pub phi: f64,
    /// Implementation time of one pulse; enters only the budget.
    pub t_p: f64,
    pub tau: f64,
    pub times: Vec<f64>,
    /// Total extra time allowed for the pulses, if budgeted.
    pub budget: Option<f64>,
}

/// `phi` reduced to `[0, 2 pi)`; zero means the pulse is the identity.
fn reduced_phase(phi: f64) -> f64 {
    let r = phi.rem_euclid(TAU);
    if r < PHASE_TOL || TAU - r < PHASE_TOL {
        0.0
    } else {
        r
    }
}

pub fn make_schedule(kind: ScheduleKind, count: usize, tau: f64, phi: f64, t_p: f64) -> Result<PulseSchedule> {
    if count == 0 {
        return Err(Error::InvalidSchedule("at least one pulse is required".into()));
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidSchedule(format!("tau must be positive, got {tau}")));
    }
    if !(t_p >= 0.0 && t_p.is_finite()) {
        return Err(Error::InvalidSchedule(format!("pulse time must be >= 0, got {t_p}")));
    }
    if reduced_phase(phi) == 0.0 {
        return Err(Error::DegeneratePulse(phi));
    }
    let times = match kind {
        ScheduleKind::Equidistant => (1..=count).map(|j| tau * j as f64 / count as f64).collect(),
        ScheduleKind::Uhrig => (1..=count)
            .map(|j| {
                let s = (PI * j as f64 / (2 * count + 2) as f64).sin();
                tau * s * s
            })
            .collect(),
    };
    Ok(PulseSchedule { kind, count, phi, t_p, tau, times, budget: None })
}

/// Schedule whose `count` pulses share a total extra time `budget`; each pulse
/// takes `t_p = budget / count` and imprints the phase `chi t_p`.
pub fn make_budgeted_schedule(kind: ScheduleKind, count: usize, tau: f64, budget: f64, chi: f64) -> Result<PulseSchedule> {
    if !(budget > 0.0 && budget.is_finite()) {
        return Err(Error::InvalidSchedule(format!("budget must be positive, got {budget}")));
    }
    let t_p = budget / count.max(1) as f64;
    let mut s = make_schedule(kind, count, tau, chi * t_p, t_p)?;
    s.budget = Some(budget);
    Ok(s)
}

impl PulseSchedule {
    /// Free evolution without pulses.
    pub fn none(tau: f64) -> Self {
        Self { kind: ScheduleKind::Equidistant, count: 0, phi: PI, t_p: 0.0, tau, times: Vec::new(), budget: None }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau >= 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidSchedule(format!("tau must be >= 0, got {}", self.tau)));
        }
        if self.times.len() != self.count {
            return Err(Error::InvalidSchedule(format!("{} times for {} pulses", self.times.len(), self.count)));
        }
        let slack = 1e-12 * self.tau.max(1.0);
        for (k, &t) in self.times.iter().enumerate() {
            if !(t >= -slack && t <= self.tau + slack) {
                return Err(Error::InvalidSchedule(format!("pulse {k} at t = {t} lies outside [0, {}]", self.tau)));
            }
            if k > 0 && t <= self.times[k - 1] {
                return Err(Error::InvalidSchedule("pulse times must be strictly increasing".into()));
            }
        }
        if let Some(b) = self.budget {
            if self.count as f64 * self.t_p > b * (1.0 + 1e-12) {
                return Err(Error::InvalidSchedule(format!("N t_p = {} exceeds the budget {b}", self.count as f64 * self.t_p)));
            }
        }
        if self.count > 0 && reduced_phase(self.phi) == 0.0 {
            return Err(Error::DegeneratePulse(self.phi));
        }
        Ok(())
    }
}

/// Diagonal pulse `exp(-i phi b^dagger b)` on the trap (identity elsewhere).
#[derive(Debug, Clone, PartialEq)]
pub struct PulseOperator {
    pub phi: f64,
    /// `<k|p|k> = e^{-i phi k}`
    pub trap_diagonal: Vec<C64>,
}

impl PulseOperator {
    /// Diagonal of the pulse on the full product space.
    pub fn full_diagonal(&self, dims: &HilbertDims) -> Vec<C64> {
        (0..dims.full_dim()).map(|i| self.trap_diagonal[i % dims.n_trap]).collect()
    }
}

pub fn pulse_operator(phi: f64, dims: &HilbertDims) -> Result<PulseOperator> {
    if !phi.is_finite() || reduced_phase(phi) == 0.0 {
        return Err(Error::DegeneratePulse(phi));
    }
    Ok(PulseOperator { phi, trap_diagonal: (0..dims.n_trap).map(|k| C64::from_polar(1.0, -phi * k as f64)).collect() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionOrder {
    pub order: usize,
    pub satisfied: bool,
}

/// For each odd `j <= j_max`: whether `lambda_{n+j} != lambda_n (mod 2 pi)` for all `n`.
pub fn decoupling_condition(lambdas: &[f64], j_max: usize) -> Vec<ConditionOrder> {
    (1..=j_max)
        .step_by(2)
        .map(|j| {
            let satisfied = lambdas.windows(j + 1).all(|w| reduced_phase(w[j] - w[0]) != 0.0);
            ConditionOrder { order: j, satisfied }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BudgetReport {
    /// `N t_p / ((|g|/Gamma) tau)`
    pub ratio: f64,
    /// `T_p = tau + N t_p`
    pub total_time: f64,
    /// `ratio <= 0.1`, an order of magnitude below the decay time.
    pub satisfied: bool,
}

pub fn check_budget(schedule: &PulseSchedule, params: &PhysicalParams) -> Result<BudgetReport> {
    let ratio_g = params.gamma_decay_ratio.ok_or_else(|| Error::InvalidParameter("|g|/Gamma is required for budgeting".into()))?;
    let used = schedule.count as f64 * schedule.t_p;
    let ratio = used / (ratio_g * schedule.tau);
    Ok(BudgetReport { ratio, total_time: schedule.tau + used, satisfied: ratio <= 0.1 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityTrace {
    pub times: Vec<f64>,
    pub fidelities: Vec<f64>,
}

impl FidelityTrace {
    pub fn min(&self) -> f64 {
        self.fidelities.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn last(&self) -> f64 {
        self.fidelities.last().copied().unwrap_or(f64::NAN)
    }
}

struct BlockDynamics {
    trap: Vec<usize>,
    amp0: Vec<C64>,
    eig: HermitianEigen,
    ideal: HermitianEigen,
    /// Initial state in the eigenbasis of the ideal block.
    ideal_coeff: Vec<C64>,
}

fn unitarity_defect(v: &ComplexMatrix) -> f64 {
    v.adjoint().matmul(v).max_abs_diff(&ComplexMatrix::identity(v.rows()))
}

fn to_eigenbasis(eig: &HermitianEigen, psi: &[C64]) -> Vec<C64> {
    let v = &eig.vectors;
    let mut out = vec![ZERO; psi.len()];
    for (i, &p) in psi.iter().enumerate() {
        if p == ZERO {
            continue;
        }
        for (o, &vik) in out.iter_mut().zip(v.row(i)) {
            *o += vik.conj() * p;
        }
    }
    out
}

fn from_eigenbasis(eig: &HermitianEigen, coeff: &[C64]) -> Vec<C64> {
    (0..coeff.len()).map(|i| eig.vectors.row(i).iter().zip(coeff).map(|(&a, &b)| a * b).sum()).collect()
}

impl BlockDynamics {
    fn advance(&self, psi: &mut [C64], dt: f64) {
        if dt == 0.0 {
            return;
        }
        let mut c = to_eigenbasis(&self.eig, psi);
        for (ck, &l) in c.iter_mut().zip(&self.eig.values) {
            *ck *= C64::from_polar(1.0, -l * dt);
        }
        psi.copy_from_slice(&from_eigenbasis(&self.eig, &c));
    }

    fn ideal_state(&self, t: f64) -> Vec<C64> {
        let c: Vec<C64> = self.ideal_coeff.iter().zip(&self.ideal.values).map(|(&a, &l)| a * C64::from_polar(1.0, -l * t)).collect();
        from_eigenbasis(&self.ideal, &c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Event {
    Pulse,
    Sample(usize),
}

/// Precomputed block spectra of the real and ideal Hamiltonians for one
/// parameter set; reusable across schedules.
pub struct DecouplingSystem {
    pub params: PhysicalParams,
    pub dims: HilbertDims,
    blocks: Vec<BlockDynamics>,
}

impl DecouplingSystem {
    pub fn new(params: &PhysicalParams, dims: &HilbertDims) -> Result<Self> {
        let psi0 = initial_state_decoupling(params, dims)?;
        let real = excitation_blocks(params, dims)?;
        let blocks: Vec<Result<Option<BlockDynamics>>> = real
            .into_par_iter()
            .map(|b| {
                let amp0: Vec<C64> = b.indices.iter().map(|&i| psi0[i]).collect();
                if amp0.iter().all(|z| *z == ZERO) {
                    return Ok(None);
                }
                let ideal_h = match b.kind {
                    crate::model::BlockKind::Excitation { n } => excitation_block(params, dims, n, false).h,
                    crate::model::BlockKind::Ground { .. } => b.h.clone(),
                };
                let eig = hermitian_eig(&b.h)?;
                let ideal = hermitian_eig(&ideal_h)?;
                let defect = unitarity_defect(&eig.vectors).max(unitarity_defect(&ideal.vectors));
                if defect > UNITARITY_TOL {
                    return Err(Error::InvalidParameter(format!("block propagator not unitary: defect {defect:.3e}")));
                }
                let ideal_coeff = to_eigenbasis(&ideal, &amp0);
                let trap = b.indices.iter().map(|&i| i % dims.n_trap).collect();
                Ok(Some(BlockDynamics { trap, amp0, eig, ideal, ideal_coeff }))
            })
            .collect();
        let mut kept = Vec::new();
        for b in blocks {
            if let Some(b) = b? {
                kept.push(b);
            }
        }
        Ok(Self { params: *params, dims: *dims, blocks: kept })
    }

    /// Fidelity at each of the (ascending) `samples`; a pulse coinciding with a
    /// sample instant is applied first.
    pub fn fidelities(&self, schedule: &PulseSchedule, samples: &[f64]) -> Result<Vec<f64>> {
        schedule.validate()?;
        if samples.windows(2).any(|w| w[1] < w[0]) || samples.iter().any(|&t| !(t >= 0.0)) {
            return Err(Error::InvalidSchedule("sample times must be ascending and non-negative".into()));
        }
        let mut events: Vec<(f64, Event)> = schedule.times.iter().map(|&t| (t, Event::Pulse)).collect();
        events.extend(samples.iter().enumerate().map(|(k, &t)| (t, Event::Sample(k))));
        events.sort_by(|a, b| {
            a.0.total_cmp(&b.0).then_with(|| match (a.1, b.1) {
                (Event::Pulse, Event::Sample(_)) => std::cmp::Ordering::Less,
                (Event::Sample(_), Event::Pulse) => std::cmp::Ordering::Greater,
                _ => std::cmp::Ordering::Equal,
            })
        });
        let phases: Vec<C64> = (0..self.dims.n_trap).map(|k| C64::from_polar(1.0, -schedule.phi * k as f64)).collect();

        let per_block: Vec<Vec<C64>> = self
            .blocks
            .par_iter()
            .map(|b| {
                let mut psi = b.amp0.clone();
                let mut now = 0.0;
                let mut out = vec![ZERO; samples.len()];
                for &(t, ev) in &events {
                    b.advance(&mut psi, t - now);
                    now = t;
                    match ev {
                        Event::Pulse => psi.iter_mut().zip(&b.trap).for_each(|(z, &k)| *z *= phases[k]),
                        Event::Sample(k) => {
                            out[k] = b.ideal_state(t).iter().zip(&psi).map(|(a, z)| a.conj() * z).sum();
                        }
                    }
                }
                out
            })
            .collect();
        let mut total = vec![ZERO; samples.len()];
        for blk in &per_block {
            for (t, v) in total.iter_mut().zip(blk) {
                *t += v;
            }
        }
        Ok(total.iter().map(|z| z.norm_sqr()).collect())
    }

    pub fn final_fidelity(&self, schedule: &PulseSchedule) -> Result<f64> {
        Ok(self.fidelities(schedule, &[schedule.tau])?[0])
    }
}

/// Fidelity trace on `n_samples` equally spaced instants in `[0, tau]`, plus
/// every pulse instant.
pub fn evolve_with_pulses(
    params: &PhysicalParams,
    dims: &HilbertDims,
    schedule: &PulseSchedule,
    n_samples: usize,
) -> Result<FidelityTrace> {
    let system = DecouplingSystem::new(params, dims)?;
    trace_on_grid(&system, schedule, n_samples)
}

pub fn trace_on_grid(system: &DecouplingSystem, schedule: &PulseSchedule, n_samples: usize) -> Result<FidelityTrace> {
    if n_samples < 2 {
        return Err(Error::InvalidParameter("at least two samples are needed".into()));
    }
    let tau = schedule.tau;
    let mut times: Vec<f64> = (0..n_samples).map(|k| tau * k as f64 / (n_samples - 1) as f64).collect();
    times.extend(schedule.times.iter().copied());
    times.sort_by(|a, b| a.total_cmp(b));
    times.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * tau.max(1.0));
    let fidelities = system.fidelities(schedule, &times)?;
    Ok(FidelityTrace { times, fidelities })
}

/// Dominant non-zero frequency of `1 - F(t)` on a uniform grid, by a direct
/// discrete Fourier transform of the mean-subtracted signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPeak {
    pub bin: usize,
    pub omega: f64,
    /// Angular frequency spacing between bins.
    pub bin_width: f64,
}

pub fn dominant_frequency(trace: &FidelityTrace) -> Result<SpectralPeak> {
    let m = trace.times.len();
    if m < 4 {
        return Err(Error::InvalidParameter("too few samples for a spectrum".into()));
    }
    let dt = trace.times[1] - trace.times[0];
    if trace.times.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.abs().max(1e-300)) || dt <= 0.0 {
        return Err(Error::InvalidParameter("spectrum requires a uniform time grid".into()));
    }
    let y: Vec<f64> = trace.fidelities.iter().map(|f| 1.0 - f).collect();
    let mean = y.iter().sum::<f64>() / m as f64;
    let mut best = (1, -1.0);
    for k in 1..=m / 2 {
        let w = TAU * k as f64 / m as f64;
        let s: C64 = y.iter().enumerate().map(|(j, &v)| C64::from_polar(v - mean, -w * j as f64)).sum();
        if s.norm() > best.1 {
            best = (k, s.norm());
        }
    }
    let bin_width = TAU / (m as f64 * dt);
    Ok(SpectralPeak { bin: best.0, omega: best.0 as f64 * bin_width, bin_width })
}

/// `(1/N) sum_{k=1}^N p^k H_I p^{-k}` on the full (small) product space.
pub fn average_hamiltonian(params: &PhysicalParams, dims: &HilbertDims, phi: f64, count: usize) -> Result<ComplexMatrix> {
    if count == 0 {
        return Err(Error::InvalidSchedule("average over zero pulses".into()));
    }
    pulse_operator(phi, dims)?;
    let h = build_h_interaction(params, dims)?;
    let nt = dims.n_trap;
    let d = h.rows();
    // element (i, j) picks up e^{-i phi k (k_i - k_j)}; average the geometric series
    let mut factor = vec![ZERO; 2 * nt - 1];
    for (shift, f) in factor.iter_mut().enumerate() {
        let delta = shift as f64 - (nt - 1) as f64;
        *f = (1..=count).map(|k| C64::from_polar(1.0, -phi * k as f64 * delta)).sum::<C64>() / count as f64;
    }
    Ok(ComplexMatrix::from_fn(d, d, |i, j| h[(i, j)] * factor[i % nt + nt - 1 - j % nt]))
}

/// `2 / (N |1 - e^{-i phi}|)`, the Cesaro bound on the residual motional coupling.
pub fn cesaro_bound(phi: f64, count: usize) -> f64 {
    2.0 / (count as f64 * (C64::new(1.0, 0.0) - C64::from_polar(1.0, -phi)).norm())
}

/// `max|H_N - H_id| / max|H_I - H_id|`: residual motional coupling after averaging.
pub fn averaged_coupling_residual(params: &PhysicalParams, dims: &HilbertDims, phi: f64, count: usize) -> Result<f64> {
    let hn = average_hamiltonian(params, dims, phi, count)?;
    let hid = build_h_ideal(params, dims)?;
    let hi = build_h_interaction(params, dims)?;
    let full = hi.max_abs_diff(&hid);
    if full == 0.0 {
        return Ok(0.0);
    }
    Ok(hn.max_abs_diff(&hid) / full)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "axis", rename_all = "snake_case")]
pub enum ScanAxis {
    PulseCount {
        counts: Vec<usize>,
        phi: f64,
        kind: ScheduleKind,
    },
    PulsePhase {
        phis: Vec<f64>,
        count: usize,
        kind: ScheduleKind,
    },
    /// Pulses share the extra time `(total_multiple - 1) tau`, each with phase `chi t_p`.
    BudgetedCount {
        counts: Vec<usize>,
        total_multiple: f64,
        chi: f64,
        kind: ScheduleKind,
    },
    UhrigVsEquidistant {
        count: usize,
        phis: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub count: usize,
    pub phi: f64,
    pub kind: ScheduleKind,
    pub t_p: f64,
    pub final_fidelity: f64,
}

fn scan_schedules(axis: &ScanAxis, tau: f64) -> Result<Vec<PulseSchedule>> {
    match axis {
        ScanAxis::PulseCount { counts, phi, kind } => counts.iter().map(|&n| make_schedule(*kind, n, tau, *phi, 0.0)).collect(),
        ScanAxis::PulsePhase { phis, count, kind } => phis.iter().map(|&phi| make_schedule(*kind, *count, tau, phi, 0.0)).collect(),
        ScanAxis::BudgetedCount { counts, total_multiple, chi, kind } => {
            let extra = (total_multiple - 1.0) * tau;
            counts.iter().map(|&n| make_budgeted_schedule(*kind, n, tau, extra, *chi)).collect()
        }
        ScanAxis::UhrigVsEquidistant { count, phis } => {
            let mut out = Vec::with_capacity(2 * phis.len());
            for kind in [ScheduleKind::Equidistant, ScheduleKind::Uhrig] {
                for &phi in phis {
                    out.push(make_schedule(kind, *count, tau, phi, 0.0)?);
                }
            }
            Ok(out)
        }
    }
}

/// Final fidelity `F(tau)` for every grid point of the scan axis, in grid order.
pub fn final_fidelity_scan(system: &DecouplingSystem, axis: &ScanAxis) -> Result<Vec<ScanRow>> {
    let schedules = scan_schedules(axis, system.params.tau)?;
    schedules
        .iter()
        .map(|s| Ok(ScanRow { count: s.count, phi: s.phi, kind: s.kind, t_p: s.t_p, final_fidelity: system.final_fidelity(s)? }))
        .collect()
}
