use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mima_core::harness::{convergence_study, emit_all, run, Reference, RunConfig, Scheme};

/// Micro-macro particle schemes for kinetic equations in the diffusion scaling.
#[derive(Parser)]
#[command(name = "mima", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and optionally write CSV output.
    Run(Settings),
    /// Run a time-step convergence study and print the error table.
    Converge {
        #[command(flatten)]
        settings: Settings,
        /// Comma-separated time steps.
        #[arg(long, value_delimiter = ',', required = true)]
        dts: Vec<f64>,
        #[arg(long, value_enum, default_value_t = RefKind::Finest)]
        reference: RefKind,
        /// Time step of the `self` and `limit` references.
        #[arg(long, default_value_t = 1e-6)]
        reference_dt: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RefKind {
    /// The smallest step of the list.
    Finest,
    /// The same scheme at `--reference-dt`.
    #[value(name = "self")]
    SameScheme,
    /// The matching (drift-)diffusion limit solver at `--reference-dt`.
    Limit,
}

#[derive(Args)]
struct Settings {
    /// TOML file of `key = value` settings; command-line options override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    case: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long)]
    dt: Option<String>,
    #[arg(long)]
    t_end: Option<String>,
    #[arg(long)]
    nx: Option<String>,
    #[arg(long)]
    nv: Option<String>,
    #[arg(long)]
    np: Option<String>,
    #[arg(long)]
    spline_order: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Output directory for energy.csv, rho.csv and f.csv.
    #[arg(long)]
    out: Option<String>,
    /// Any other setting, e.g. `--set snapshot_times=0.05,0.1`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    extra: Vec<String>,
}

impl Settings {
    fn resolve(&self) -> Result<RunConfig> {
        let mut config = RunConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            apply_toml(&mut config, &text).with_context(|| format!("in {}", path.display()))?;
        }
        let named = [
            ("scheme", &self.scheme),
            ("case", &self.case),
            ("epsilon", &self.epsilon),
            ("dt", &self.dt),
            ("t_end", &self.t_end),
            ("nx", &self.nx),
            ("nv", &self.nv),
            ("np", &self.np),
            ("spline_order", &self.spline_order),
            ("seed", &self.seed),
            ("out", &self.out),
        ];
        for (key, value) in named {
            if let Some(v) = value {
                config.set(key, v)?;
            }
        }
        for kv in &self.extra {
            let (k, v) = kv.split_once('=').with_context(|| format!("--set expects KEY=VALUE, got '{kv}'"))?;
            config.set(k, v)?;
        }
        config.validate()?;
        Ok(config)
    }
}

fn apply_toml(config: &mut RunConfig, text: &str) -> Result<()> {
    let table: toml::Table = text.parse()?;
    for (key, value) in &table {
        let text = match value {
            toml::Value::String(s) => s.clone(),
            toml::Value::Integer(i) => i.to_string(),
            toml::Value::Float(f) => f.to_string(),
            toml::Value::Boolean(b) => b.to_string(),
            toml::Value::Array(items) => items
                .iter()
                .map(|item| match item {
                    toml::Value::Integer(i) => Ok(i.to_string()),
                    toml::Value::Float(f) => Ok(f.to_string()),
                    other => bail!("{key}: unsupported array element {other}"),
                })
                .collect::<Result<Vec<_>>>()?
                .join(","),
            other => bail!("{key}: unsupported value {other}"),
        };
        config.set(key, &text)?;
    }
    Ok(())
}

fn run_one(config: &RunConfig) -> Result<()> {
    let diag = run(config)?;
    println!("scheme {} case {}", diag.scheme, diag.case);
    println!("steps {} final_time {:.6e}", config.n_steps()?, diag.final_time);
    for (name, value) in &diag.errors {
        println!("{name} {value:.3e}");
    }
    if let Some(last) = diag.energy.last() {
        println!("final_energy {:.6e}", last.energy);
    }
    if diag.flagged_cells > 0 {
        println!("flagged_cells {}", diag.flagged_cells);
    }
    println!("mean_step_seconds {:.3e}", diag.mean_step_seconds());
    if let Some(dir) = &config.out {
        emit_all(&diag, dir)?;
        println!("wrote {}", dir.display());
    }
    Ok(())
}

fn converge(config: &RunConfig, dts: &[f64], kind: RefKind, reference_dt: f64) -> Result<()> {
    let reference = match kind {
        RefKind::Finest => Reference::Finest,
        RefKind::SameScheme => Reference::Run(Box::new(RunConfig { dt: reference_dt, ..config.clone() })),
        RefKind::Limit => {
            let scheme = if config.case.has_field() { Scheme::DriftDiffusionLimit } else { Scheme::DiffusionLimit };
            Reference::Run(Box::new(RunConfig { scheme, dt: reference_dt, ..config.clone() }))
        }
    };
    let table = convergence_study(config, dts, &reference)?;
    println!("dt,error");
    for (dt, err) in &table.rows {
        println!("{dt:.6e},{err:.6e}");
    }
    println!("slope {:.4}", table.slope);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(s) => s.resolve().and_then(|c| run_one(&c)),
        Command::Converge { settings, dts, reference, reference_dt } => {
            settings.resolve().and_then(|c| converge(&c, dts, *reference, *reference_dt))
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
