//! Oracle checks: brute-force simulation, dressed-state evolution, Helstrom optimality.

use anyhow::Result;
use num_complex::Complex64 as C64;
use qrs_core::analytic::{FieldCoefficients, Sign};
use qrs_core::discrimination::{evaluate, optimality_sweep, random_ensemble};
use qrs_core::model::PhysicalParams;
use qrs_core::oracle::{dressed_evolution_deficit, oracle_dims, RamseyOracle};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::OracleSuite;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    /// Worst observed deviation.
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn new(suite: &'static str, name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self { suite, name: name.into(), value, tolerance, pass: value.is_finite() && value <= tolerance }
    }
}

pub const ORACLE_TOL: f64 = 1e-7;
pub const DEFICIT_TOL: f64 = 1e-8;
pub const HELSTROM_TOL: f64 = 1e-10;

/// Regime of the brute-force comparison: `n_bar = 2`, `|gamma|/|g| = 0.2`, `omega_t/|g| = 1`.
pub fn small_nbar_params() -> PhysicalParams {
    PhysicalParams {
        gamma_abs: 0.2,
        omega_t: 1.0,
        alpha: C64::new(2f64.sqrt(), 0.0),
        tau: 1.3,
        t_prop: 0.7,
        omega_c_t: 0.4,
        omega_0_t: 1.1,
        g_phase: 0.25,
        ..Default::default()
    }
}

/// Tensor-product simulation of the two-window sequence against the analytic pipeline.
pub fn small_nbar() -> Result<Vec<Check>> {
    let params = small_nbar_params();
    let dims = oracle_dims(&params, 1e-12)?;
    let oracle = RamseyOracle::run(&params, dims)?;
    let summary = oracle.summary()?;
    let coeffs = FieldCoefficients::compute(params.tau, &params, dims.n_field)?;
    let analytic = evaluate(&params, params.tau, &dims)?;
    let s = "small-nbar";
    Ok(vec![
        Check::new(s, "rho_F elementwise", summary.rho_field.max_abs_diff(&coeffs.rho_field()), ORACLE_TOL),
        Check::new(s, "p", (summary.p - analytic.p).abs(), ORACLE_TOL),
        Check::new(s, "E_min", (summary.e_min - analytic.e_min).abs(), ORACLE_TOL),
        Check::new(s, "P_Bell", (summary.p_bell - analytic.p_bell).abs(), ORACLE_TOL),
        Check::new(s, "F_opt", (summary.f_opt - analytic.f_opt).abs(), ORACLE_TOL),
    ])
}

pub const BH_EXCITATIONS: [usize; 5] = [1, 2, 4, 7, 10];
pub const BH_TIMES: [f64; 5] = [0.4, 1.3, 2.9, 4.6, 6.2];
pub const BH_GAMMAS: [f64; 5] = [0.02, 0.08, 0.15, 0.25, 0.4];

/// Worst `|1 - Re<analytic|numeric>|` over the 5x5x5 grid in `(n, omega_t t, |gamma|)`, both dressed signs.
pub fn baker_hausdorff() -> Result<Vec<Check>> {
    let mut grid = Vec::new();
    for &n in &BH_EXCITATIONS {
        for &t in &BH_TIMES {
            for &gamma in &BH_GAMMAS {
                for sign in [Sign::Plus, Sign::Minus] {
                    grid.push((n, t, gamma, sign));
                }
            }
        }
    }
    let worst = grid
        .par_iter()
        .map(|&(n, t, gamma, sign)| {
            let params = PhysicalParams { gamma_abs: gamma, omega_t: 1.0, g_phase: 0.3, ..Default::default() };
            dressed_evolution_deficit(n, sign, t, &params, 48).map(f64::abs)
        })
        .collect::<std::result::Result<Vec<f64>, _>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(vec![Check::new("baker-hausdorff", "dressed evolution deficit (250 points)", worst, DEFICIT_TOL)])
}

pub const HELSTROM_ENSEMBLES: usize = 20;
pub const HELSTROM_PROJECTORS: usize = 200;

/// Random ensembles (dim <= 64): no random projector beats `E_min`, and `E(T) = E_min`.
pub fn helstrom(seed: u64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jobs: Vec<(usize, u64)> = (0..HELSTROM_ENSEMBLES).map(|_| (rng.gen_range(2..=64), rng.gen())).collect();
    let reports = jobs
        .par_iter()
        .map(|&(dim, s)| {
            let mut r = ChaCha8Rng::seed_from_u64(s);
            let ens = random_ensemble(dim, &mut r)?;
            optimality_sweep(&ens, HELSTROM_PROJECTORS, r.gen())
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let violation = reports.iter().map(|r| r.violation()).fold(f64::NEG_INFINITY, f64::max).max(0.0);
    let consistency = reports.iter().map(|r| (r.e_at_optimum - r.e_min).abs()).fold(0.0, f64::max);
    Ok(vec![
        Check::new("helstrom", "random projectors beating E_min", violation, HELSTROM_TOL),
        Check::new("helstrom", "E(T) vs E_min", consistency, HELSTROM_TOL),
    ])
}

pub fn run_suite(suite: OracleSuite, seed: u64) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    if matches!(suite, OracleSuite::SmallNbar | OracleSuite::All) {
        out.extend(small_nbar()?);
    }
    if matches!(suite, OracleSuite::BakerHausdorff | OracleSuite::All) {
        out.extend(baker_hausdorff()?);
    }
    if matches!(suite, OracleSuite::Helstrom | OracleSuite::All) {
        out.extend(helstrom(seed)?);
    }
    Ok(out)
}

pub fn format_table(checks: &[Check]) -> String {
    let mut s = format!("{:<16} {:<42} {:>12} {:>10}  result\n", "suite", "check", "deviation", "tolerance");
    for c in checks {
        s.push_str(&format!(
            "{:<16} {:<42} {:>12.3e} {:>10.0e}  {}\n",
            c.suite,
            c.name,
            c.value,
            c.tolerance,
            if c.pass { "PASS" } else { "FAIL" }
        ));
    }
    s
}
