use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use qrs_cli::{output_stem, run, write_artifacts, Command, RunConfig};

#[derive(Parser)]
#[command(name = "qrs", version, about = "Remote entanglement of trapped qubits: sweeps, decoupling and oracle checks")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sweep the interaction time and evaluate p, E_min, P_Bell and F_opt.
    Discriminate(Opts),
    /// Fidelity trace F(t) with and without decoupling pulses.
    Decouple(Opts),
    /// Final fidelity scans over pulse count, phase or time budget.
    Scan(Opts),
    /// Run the oracle checks and print a pass/fail table.
    Verify {
        /// small-nbar, baker-hausdorff, helstrom or all
        #[arg(long, default_value = "all")]
        oracle: String,
        #[command(flatten)]
        opts: Opts,
    },
}

#[derive(Args)]
struct Opts {
    /// ideal, fig2, fig3, fig4, fig5, fig6, fig7 or fig8
    #[arg(long)]
    preset: Option<String>,
    /// Flat `key = value` file applied after the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output stem; writes <stem>.csv and <stem>.json.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (defaults to all cores).
    #[arg(long, env = "QRS_THREADS")]
    threads: Option<usize>,
    #[arg(long)]
    tau_min: Option<String>,
    #[arg(long)]
    tau_max: Option<String>,
    #[arg(long)]
    tau_points: Option<String>,
    /// Pulse counts: comma list, ranges as a:b:step.
    #[arg(long)]
    pulses: Option<String>,
    /// Pulse phases, e.g. `pi` or `pi/4,pi/2`.
    #[arg(long)]
    phi: Option<String>,
    /// equidistant or uhrig
    #[arg(long)]
    schedule: Option<String>,
    /// Extra pulse time N t_p in units of tau (comma list).
    #[arg(long)]
    budget: Option<String>,
    /// Any configuration key, e.g. `--set gamma_abs=0.2`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn build_config(command: Command, opts: &Opts, oracle: Option<&str>) -> Result<RunConfig> {
    let mut c = RunConfig::new(command);
    if let Some(p) = &opts.preset {
        c.apply_preset(p)?;
    }
    if let Some(path) = &opts.config {
        c.load_file(path)?;
    }
    let flags = [
        ("tau_min", &opts.tau_min),
        ("tau_max", &opts.tau_max),
        ("tau_points", &opts.tau_points),
        ("counts", &opts.pulses),
        ("phis", &opts.phi),
        ("schedule", &opts.schedule),
        ("budgets", &opts.budget),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            c.set(key, v).with_context(|| format!("--{}", key.replace('_', "-")))?;
        }
    }
    for kv in &opts.set {
        let (k, v) = kv.split_once('=').with_context(|| format!("--set expects KEY=VALUE, got '{kv}'"))?;
        c.set(k, v)?;
    }
    if let Some(o) = oracle {
        c.set("oracle", o)?;
    }
    if let Some(s) = opts.seed {
        c.seed = s;
    }
    if opts.threads.is_some() {
        c.threads = opts.threads;
    }
    if opts.out.is_some() {
        c.out = opts.out.clone();
    }
    Ok(c)
}

fn main_inner() -> Result<bool> {
    let cli = Cli::parse();
    let config = match &cli.command {
        Cmd::Discriminate(o) => build_config(Command::Discriminate, o, None)?,
        Cmd::Decouple(o) => build_config(Command::Decouple, o, None)?,
        Cmd::Scan(o) => build_config(Command::Scan, o, None)?,
        Cmd::Verify { oracle, opts } => build_config(Command::Verify, opts, Some(oracle))?,
    };
    if let Some(n) = config.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")?;
    }
    let artifacts = run(&config)?;
    let (csv, json) = write_artifacts(&artifacts, &output_stem(&config))?;
    print!("{}", artifacts.report);
    log::info!("wrote {} and {}", csv.display(), json.display());
    Ok(artifacts.ok)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match main_inner() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
