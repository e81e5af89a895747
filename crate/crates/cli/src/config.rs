//! Flat run configuration: defaults, presets, `key = value` files and overrides.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex64 as C64;
use qrs_core::decoupling::{ScanAxis, ScheduleKind};
use qrs_core::model::{choose_truncation, HilbertDims, PhysicalParams};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Discriminate,
    Decouple,
    Verify,
    Scan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanKind {
    Count,
    Phase,
    Budget,
    UhrigVsEquidistant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleSuite {
    SmallNbar,
    BakerHausdorff,
    Helstrom,
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub preset: Option<String>,
    pub g_abs: f64,
    pub g_phase: f64,
    pub gamma_abs: f64,
    pub omega_t: f64,
    pub delta: f64,
    pub alpha_re: f64,
    pub alpha_im: f64,
    pub tau: f64,
    pub t_prop: f64,
    pub omega_c_t: f64,
    pub omega_0_t: f64,
    pub gamma_decay_ratio: Option<f64>,
    pub leak_tol: f64,
    pub n_field: Option<usize>,
    pub n_trap: Option<usize>,
    pub tau_min: f64,
    pub tau_max: f64,
    pub tau_points: usize,
    /// Uniform time samples for `decouple` traces.
    pub samples: usize,
    pub schedule: ScheduleKind,
    pub scan_axis: ScanKind,
    /// Pulse counts; 0 in `decouple` means free evolution.
    pub counts: Vec<usize>,
    pub phis: Vec<f64>,
    /// Extra pulse time `N t_p` in units of `tau`.
    pub budgets: Vec<f64>,
    pub oracle: OracleSuite,
    pub seed: u64,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            preset: None,
            g_abs: 1.0,
            g_phase: 0.0,
            gamma_abs: 0.0,
            omega_t: 1.0,
            delta: 0.0,
            alpha_re: 10.0,
            alpha_im: 0.0,
            tau: 0.5,
            t_prop: 0.0,
            omega_c_t: 0.0,
            omega_0_t: 0.0,
            gamma_decay_ratio: None,
            leak_tol: 1e-10,
            n_field: None,
            n_trap: None,
            tau_min: 0.0,
            tau_max: 50.0,
            tau_points: 501,
            samples: 2048,
            schedule: ScheduleKind::Equidistant,
            scan_axis: ScanKind::Count,
            counts: vec![0],
            phis: vec![PI],
            budgets: vec![1.0],
            oracle: OracleSuite::All,
            seed: 20_240_917,
            threads: None,
            out: None,
        }
    }

    pub fn params(&self) -> PhysicalParams {
        PhysicalParams {
            g_abs: self.g_abs,
            g_phase: self.g_phase,
            gamma_abs: self.gamma_abs,
            omega_t: self.omega_t,
            delta: self.delta,
            alpha: C64::new(self.alpha_re, self.alpha_im),
            tau: self.tau,
            t_prop: self.t_prop,
            omega_c_t: self.omega_c_t,
            omega_0_t: self.omega_0_t,
            gamma_decay_ratio: self.gamma_decay_ratio,
        }
    }

    /// Truncation from `leak_tol`, with explicit `n_field`/`n_trap` taking precedence.
    pub fn dims(&self) -> Result<HilbertDims> {
        let auto = choose_truncation(&self.params(), self.leak_tol)?;
        let dims = HilbertDims::new(self.n_field.unwrap_or(auto.n_field), self.n_trap.unwrap_or(auto.n_trap), self.leak_tol);
        dims.validate()?;
        Ok(dims)
    }

    pub fn apply_preset(&mut self, name: &str) -> Result<()> {
        preset(self, name)?;
        self.preset = Some(name.to_string());
        Ok(())
    }

    /// Sets one field from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let ctx = || format!("invalid value '{v}' for '{key}'");
        match key.trim() {
            "command" => bail!("the command is chosen on the command line"),
            "preset" => self.apply_preset(v)?,
            "g_abs" => self.g_abs = parse_f64(v).with_context(ctx)?,
            "g_phase" => self.g_phase = parse_f64(v).with_context(ctx)?,
            "gamma_abs" => self.gamma_abs = parse_f64(v).with_context(ctx)?,
            "omega_t" => self.omega_t = parse_f64(v).with_context(ctx)?,
            "delta" => self.delta = parse_f64(v).with_context(ctx)?,
            "alpha_re" => self.alpha_re = parse_f64(v).with_context(ctx)?,
            "alpha_im" => self.alpha_im = parse_f64(v).with_context(ctx)?,
            "n_bar" => {
                let n = parse_f64(v).with_context(ctx)?;
                if n < 0.0 {
                    bail!("n_bar must be >= 0");
                }
                self.alpha_re = n.sqrt();
                self.alpha_im = 0.0;
            }
            "tau" => self.tau = parse_f64(v).with_context(ctx)?,
            "t_prop" => self.t_prop = parse_f64(v).with_context(ctx)?,
            "omega_c_t" => self.omega_c_t = parse_f64(v).with_context(ctx)?,
            "omega_0_t" => self.omega_0_t = parse_f64(v).with_context(ctx)?,
            "gamma_decay_ratio" => self.gamma_decay_ratio = parse_optional(v, parse_f64).with_context(ctx)?,
            "leak_tol" => self.leak_tol = parse_f64(v).with_context(ctx)?,
            "n_field" => self.n_field = parse_optional(v, parse_usize).with_context(ctx)?,
            "n_trap" => self.n_trap = parse_optional(v, parse_usize).with_context(ctx)?,
            "tau_min" => self.tau_min = parse_f64(v).with_context(ctx)?,
            "tau_max" => self.tau_max = parse_f64(v).with_context(ctx)?,
            "tau_points" => self.tau_points = parse_usize(v).with_context(ctx)?,
            "samples" => self.samples = parse_usize(v).with_context(ctx)?,
            "schedule" => self.schedule = v.parse().map_err(|e| anyhow!("{e}"))?,
            "scan_axis" => {
                self.scan_axis = match v {
                    "count" => ScanKind::Count,
                    "phase" => ScanKind::Phase,
                    "budget" => ScanKind::Budget,
                    "uhrig_vs_equidistant" => ScanKind::UhrigVsEquidistant,
                    _ => bail!("unknown scan axis '{v}'"),
                }
            }
            "counts" | "pulses" => self.counts = parse_counts(v).with_context(ctx)?,
            "phis" | "phi" => self.phis = parse_list(v, parse_f64).with_context(ctx)?,
            "budgets" | "budget" => self.budgets = parse_list(v, parse_f64).with_context(ctx)?,
            "oracle" => {
                self.oracle = match v {
                    "small-nbar" => OracleSuite::SmallNbar,
                    "baker-hausdorff" => OracleSuite::BakerHausdorff,
                    "helstrom" => OracleSuite::Helstrom,
                    "all" => OracleSuite::All,
                    _ => bail!("unknown oracle '{v}'"),
                }
            }
            "seed" => self.seed = v.parse().with_context(ctx)?,
            "threads" => self.threads = parse_optional(v, parse_usize).with_context(ctx)?,
            "out" => self.out = Some(PathBuf::from(v)),
            other => bail!("unknown configuration key '{other}'"),
        }
        Ok(())
    }

    /// Applies a `key = value` file; blank lines and `#` comments are ignored.
    pub fn load_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        self.apply_text(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| anyhow!("line {}: expected key = value", lineno + 1))?;
            self.set(k, v).with_context(|| format!("line {}", lineno + 1))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.params().validate()?;
        if !(self.leak_tol > 0.0) {
            bail!("leak_tol must be positive");
        }
        match self.command {
            Command::Discriminate => {
                if self.tau_points == 0 || !(self.tau_max >= self.tau_min) || self.tau_min < 0.0 {
                    bail!("tau grid needs tau_points >= 1 and 0 <= tau_min <= tau_max");
                }
            }
            Command::Decouple | Command::Scan => {
                if !(self.tau > 0.0) {
                    bail!("tau must be positive");
                }
                if self.counts.is_empty() || self.phis.is_empty() {
                    bail!("counts and phis must be non-empty");
                }
                if self.command == Command::Decouple && self.samples < 4 {
                    bail!("samples must be at least 4");
                }
                if self.command == Command::Scan && self.scan_axis == ScanKind::Budget && self.budgets.is_empty() {
                    bail!("budget scans need at least one budget");
                }
            }
            Command::Verify => {}
        }
        Ok(())
    }

    /// Scan axes for the `scan` command, in output order.
    pub fn scan_axes(&self) -> Vec<ScanAxis> {
        match self.scan_axis {
            ScanKind::Count => {
                self.phis.iter().map(|&phi| ScanAxis::PulseCount { counts: self.counts.clone(), phi, kind: self.schedule }).collect()
            }
            ScanKind::Phase => {
                self.counts.iter().map(|&count| ScanAxis::PulsePhase { phis: self.phis.clone(), count, kind: self.schedule }).collect()
            }
            ScanKind::Budget => self
                .budgets
                .iter()
                .map(|&b| ScanAxis::BudgetedCount {
                    counts: self.counts.clone(),
                    total_multiple: 1.0 + b,
                    chi: self.omega_t,
                    kind: self.schedule,
                })
                .collect(),
            ScanKind::UhrigVsEquidistant => {
                self.counts.iter().map(|&count| ScanAxis::UhrigVsEquidistant { count, phis: self.phis.clone() }).collect()
            }
        }
    }
}

pub const PRESETS: [&str; 8] = ["ideal", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8"];

/// Decoupling window `tau = 1/(2|g|)`; the figure captions do not state it.
const DECOUPLING_TAU: f64 = 0.5;
/// `|g|/Gamma` assumed for the decoupling presets.
const DECAY_RATIO: f64 = 71.66;

fn phase_grid(points: usize) -> Vec<f64> {
    (1..=points).map(|k| PI * k as f64 / points as f64).collect()
}

fn preset(c: &mut RunConfig, name: &str) -> Result<()> {
    let discrimination = |c: &mut RunConfig, gamma: f64, omega_t: f64| {
        c.g_abs = 1.0;
        c.gamma_abs = gamma;
        c.omega_t = omega_t;
        c.alpha_re = 10.0;
        c.alpha_im = 0.0;
        c.tau_min = 0.0;
        c.tau_max = 50.0;
        c.tau_points = 501;
    };
    let decoupling = |c: &mut RunConfig| {
        c.g_abs = 1.0;
        c.gamma_abs = 0.4;
        c.omega_t = 10.0;
        c.alpha_re = 10.0;
        c.alpha_im = 0.0;
        c.tau = DECOUPLING_TAU;
        c.gamma_decay_ratio = Some(DECAY_RATIO);
    };
    match name {
        "ideal" => discrimination(c, 0.0, 1.0),
        // omega_t / (|g| sqrt(n_bar)) = 0.1 and 0.4 with n_bar = 100
        "fig2" => discrimination(c, 0.1, 1.0),
        "fig3" => discrimination(c, 0.05, 4.0),
        "fig4" => {
            decoupling(c);
            c.counts = vec![0, 200];
            c.phis = vec![PI];
            c.schedule = ScheduleKind::Equidistant;
            c.samples = 2048;
        }
        "fig5" => {
            decoupling(c);
            c.scan_axis = ScanKind::Count;
            c.counts = (1..=40).map(|k| 5 * k).collect();
            c.phis = vec![PI];
            c.schedule = ScheduleKind::Equidistant;
        }
        "fig6" => {
            decoupling(c);
            c.scan_axis = ScanKind::Phase;
            c.counts = vec![50, 400];
            c.phis = phase_grid(16);
            c.schedule = ScheduleKind::Equidistant;
        }
        "fig7" => {
            decoupling(c);
            c.scan_axis = ScanKind::Budget;
            c.counts = (1..=20).chain((25..=200).step_by(5)).collect();
            c.budgets = vec![1.0, 2.0, 4.0];
            c.schedule = ScheduleKind::Equidistant;
        }
        "fig8" => {
            decoupling(c);
            c.scan_axis = ScanKind::UhrigVsEquidistant;
            c.counts = vec![30];
            c.phis = phase_grid(16);
        }
        _ => bail!("unknown preset '{name}' (known: {})", PRESETS.join(", ")),
    }
    Ok(())
}

/// Accepts plain numbers and multiples/fractions of pi: `pi`, `3pi/4`, `pi/2`, `2*pi`.
pub fn parse_f64(s: &str) -> Result<f64> {
    let s = s.trim();
    if let Ok(v) = s.parse::<f64>() {
        return Ok(v);
    }
    let lower = s.to_ascii_lowercase();
    let (num, den) = match lower.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim().parse::<f64>().map_err(|_| anyhow!("bad denominator in '{s}'"))?),
        None => (lower.as_str(), 1.0),
    };
    let coeff = num.strip_suffix("pi").ok_or_else(|| anyhow!("not a number: '{s}'"))?.trim().trim_end_matches('*').trim();
    let c = match coeff {
        "" => 1.0,
        "-" => -1.0,
        other => other.parse::<f64>().map_err(|_| anyhow!("not a number: '{s}'"))?,
    };
    Ok(c * PI / den)
}

fn parse_usize(s: &str) -> Result<usize> {
    Ok(s.trim().parse()?)
}

fn parse_optional<T>(s: &str, f: impl Fn(&str) -> Result<T>) -> Result<Option<T>> {
    match s.trim() {
        "" | "none" | "auto" => Ok(None),
        other => f(other).map(Some),
    }
}

fn parse_list<T>(s: &str, f: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    s.split(',').filter(|x| !x.trim().is_empty()).map(|x| f(x)).collect()
}

/// Comma list of counts; an item `a:b:step` expands to an inclusive range.
fn parse_counts(s: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        let parts: Vec<&str> = item.split(':').collect();
        match parts.as_slice() {
            [one] => out.push(parse_usize(one)?),
            [a, b] | [a, b, _] => {
                let step = if parts.len() == 3 { parse_usize(parts[2])? } else { 1 };
                if step == 0 {
                    bail!("zero step in '{item}'");
                }
                out.extend((parse_usize(a)?..=parse_usize(b)?).step_by(step));
            }
            _ => bail!("bad range '{item}'"),
        }
    }
    Ok(out)
}
