//! Command execution. Everything is computed before anything is written, so a
//! failing run leaves no partial output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use qrs_core::decoupling::{
    check_budget, decoupling_condition, dominant_frequency, final_fidelity_scan, make_schedule, trace_on_grid, DecouplingSystem,
    PulseSchedule, ScanRow,
};
use qrs_core::discrimination::{best_fidelity, collapse_window, linear_grid, sweep, DiscriminationResult};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{Command, RunConfig};
use crate::verify::{format_table, run_suite};

/// `|p - 1/4|` tolerance defining the collapse window.
pub const COLLAPSE_TOL: f64 = 0.01;

#[derive(Debug, Clone)]
pub struct Artifacts {
    pub csv: String,
    pub summary: Value,
    /// Human-readable report for stdout.
    pub report: String,
    /// False when a verification check failed.
    pub ok: bool,
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn digest(text: &str) -> String {
    format!("{:x}", Sha256::digest(text.as_bytes()))
}

pub fn run(config: &RunConfig) -> Result<Artifacts> {
    config.validate()?;
    let mut a = match config.command {
        Command::Discriminate => discriminate(config)?,
        Command::Decouple => decouple(config)?,
        Command::Scan => scan(config)?,
        Command::Verify => verify(config)?,
    };
    if let Value::Object(map) = &mut a.summary {
        map.insert("config".into(), serde_json::to_value(config)?);
        map.insert("csv_sha256".into(), Value::String(digest(&a.csv)));
    }
    Ok(a)
}

fn result_json(r: &DiscriminationResult) -> Value {
    json!({ "tau_g": r.tau, "p": r.p, "E_min": r.e_min, "P_Bell": r.p_bell, "F_opt": r.f_opt, "rank_T": r.rank_t })
}

pub fn discriminate(config: &RunConfig) -> Result<Artifacts> {
    let params = config.params();
    let dims = config.dims()?;
    let grid = linear_grid(config.tau_min, config.tau_max, config.tau_points);
    let results = sweep(&params, &grid, &dims)?;
    let mut csv = String::from("tau_g,p,E_min,P_Bell,F_opt\n");
    for r in &results {
        writeln!(csv, "{},{},{},{},{}", num(r.tau * params.g_abs), num(r.p), num(r.e_min), num(r.p_bell), num(r.f_opt))?;
    }
    let best = best_fidelity(&results).map(|i| result_json(&results[i]));
    let window = collapse_window(&results, COLLAPSE_TOL).map(|w| {
        let rs = &results[w.clone()];
        let mean = |f: fn(&DiscriminationResult) -> f64| rs.iter().map(f).sum::<f64>() / rs.len() as f64;
        json!({
            "tau_start": rs[0].tau,
            "tau_end": rs[rs.len() - 1].tau,
            "points": rs.len(),
            "mean_P_Bell": mean(|r| r.p_bell),
            "mean_E_min": mean(|r| r.e_min),
        })
    });
    let report = match &best {
        Some(b) => format!("max F_opt = {} at tau|g| = {} (P_Bell = {})\n", b["F_opt"], b["tau_g"], b["P_Bell"]),
        None => String::new(),
    };
    Ok(Artifacts {
        csv,
        summary: json!({
            "command": "discriminate",
            "dims": { "n_field": dims.n_field, "leak_tol": dims.leak_tol },
            "points": results.len(),
            "max_F_opt": best,
            "collapse_window": window,
        }),
        report,
        ok: true,
    })
}

fn schedule_for(config: &RunConfig, count: usize, phi: f64) -> Result<PulseSchedule> {
    if count == 0 {
        return Ok(PulseSchedule::none(config.tau));
    }
    Ok(make_schedule(config.schedule, count, config.tau, phi, 0.0)?)
}

pub fn decouple(config: &RunConfig) -> Result<Artifacts> {
    let params = config.params();
    let dims = config.dims()?;
    let system = DecouplingSystem::new(&params, &dims)?;
    let phi = config.phis[0];
    let mut csv = String::from("N,t_g,F\n");
    let mut traces = Vec::new();
    let mut report = String::new();
    for &count in &config.counts {
        let schedule = schedule_for(config, count, phi)?;
        let trace = trace_on_grid(&system, &schedule, config.samples)?;
        for (t, f) in trace.times.iter().zip(&trace.fidelities) {
            writeln!(csv, "{count},{},{}", num(t * params.g_abs), num(*f))?;
        }
        let spectrum = if count == 0 {
            let peak = dominant_frequency(&trace)?;
            Some(json!({
                "bin": peak.bin,
                "omega": peak.omega,
                "bin_width": peak.bin_width,
                "two_omega_t_bin": 2.0 * params.omega_t / peak.bin_width,
            }))
        } else {
            None
        };
        let budget = if count > 0 && params.gamma_decay_ratio.is_some() {
            Some(serde_json::to_value(check_budget(&schedule, &params)?)?)
        } else {
            None
        };
        writeln!(report, "N = {count:>4}: min F = {:.6}, F(tau) = {:.6}", trace.min(), trace.last())?;
        traces.push(json!({
            "pulses": count,
            "phi": phi,
            "schedule": config.schedule,
            "min_F": trace.min(),
            "final_F": trace.last(),
            "spectrum": spectrum,
            "budget": budget,
        }));
    }
    let lambdas: Vec<f64> = (0..dims.n_trap).map(|k| phi * k as f64).collect();
    Ok(Artifacts {
        csv,
        summary: json!({
            "command": "decouple",
            "dims": { "n_field": dims.n_field, "n_trap": dims.n_trap, "leak_tol": dims.leak_tol },
            "decoupling_condition": decoupling_condition(&lambdas, 5),
            "traces": traces,
        }),
        report,
        ok: true,
    })
}

pub fn scan_rows(config: &RunConfig) -> Result<Vec<(usize, ScanRow)>> {
    let params = config.params();
    let dims = config.dims()?;
    let system = DecouplingSystem::new(&params, &dims)?;
    let mut rows = Vec::new();
    for (k, axis) in config.scan_axes().iter().enumerate() {
        rows.extend(final_fidelity_scan(&system, axis)?.into_iter().map(|r| (k, r)));
    }
    Ok(rows)
}

pub fn scan(config: &RunConfig) -> Result<Artifacts> {
    let rows = scan_rows(config)?;
    let mut csv = String::from("series,N,phi,schedule,t_p_g,F\n");
    for (k, r) in &rows {
        writeln!(csv, "{k},{},{},{},{},{}", r.count, num(r.phi), r.kind, num(r.t_p * config.g_abs), num(r.final_fidelity))?;
    }
    let series: Vec<Value> = config
        .scan_axes()
        .iter()
        .enumerate()
        .map(|(k, axis)| {
            let fs: Vec<f64> = rows.iter().filter(|(s, _)| *s == k).map(|(_, r)| r.final_fidelity).collect();
            json!({
                "series": k,
                "axis": axis,
                "max_F": fs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                "min_F": fs.iter().copied().fold(f64::INFINITY, f64::min),
            })
        })
        .collect();
    let report = format!("{} scan points in {} series\n", rows.len(), series.len());
    Ok(Artifacts { csv, summary: json!({ "command": "scan", "series": series }), report, ok: true })
}

pub fn verify(config: &RunConfig) -> Result<Artifacts> {
    let checks = run_suite(config.oracle, config.seed)?;
    let ok = checks.iter().all(|c| c.pass);
    let mut csv = String::from("suite,check,deviation,tolerance,pass\n");
    for c in &checks {
        writeln!(csv, "{},{},{},{},{}", c.suite, c.name, num(c.value), num(c.tolerance), c.pass)?;
    }
    Ok(Artifacts { csv, summary: json!({ "command": "verify", "all_pass": ok, "checks": checks }), report: format_table(&checks), ok })
}

/// Default output stem: `<command>-<preset>` (or `-custom`) in the working directory.
pub fn output_stem(config: &RunConfig) -> PathBuf {
    config.out.clone().unwrap_or_else(|| {
        let cmd = serde_json::to_value(config.command).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        PathBuf::from(format!("{cmd}-{}", config.preset.as_deref().unwrap_or("custom")))
    })
}

/// Writes `<stem>.csv` and `<stem>.json`; returns both paths.
pub fn write_artifacts(a: &Artifacts, stem: &Path) -> Result<(PathBuf, PathBuf)> {
    let csv_path = stem.with_extension("csv");
    let json_path = stem.with_extension("json");
    if let Some(dir) = stem.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut json = serde_json::to_string_pretty(&a.summary)?;
    json.push('\n');
    std::fs::write(&csv_path, &a.csv).with_context(|| format!("writing {}", csv_path.display()))?;
    std::fs::write(&json_path, json).with_context(|| format!("writing {}", json_path.display()))?;
    Ok((csv_path, json_path))
}
