//! `tfe`: experiments for self-similar thin-film profiles.

mod commands;
mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{Map, Value};
use thiserror::Error;

use config::{ConfigError, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Compute(String),
    #[error("cannot write {0}: {1}")]
    Io(String, std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Compute(_) | CliError::Io(..) => 1,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "tfe", version, about = "Self-similar thin-film profiles: shooting, attractors and interface expansions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

/// Flags shared by every subcommand. Precedence: defaults < --config file < flags.
#[derive(Args, Debug)]
struct Common {
    /// Config file of `key=value` lines
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (a directory for repro-figs); relative paths resolve
    /// against $TFE_OUT_DIR when it is set
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Set any config key, e.g. --set y_max=8 (repeatable)
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    n: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    eps: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    rtol: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    atol: Option<f64>,
    /// Profile scale: similarity or unit
    #[arg(long, global = true)]
    scale: Option<String>,
    /// Write this many uniformly spaced dense-output rows instead of the
    /// accepted steps
    #[arg(long, global = true)]
    resample: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Single forward shot from f(0)=1, f'(0)=0, f''(0)=mu
    Shoot {
        #[arg(long, allow_negative_numbers = true)]
        mu: Option<f64>,
        /// Wide-margin shot that keeps integrating past small negative humps
        #[arg(long)]
        microscope: bool,
        #[arg(long)]
        y_max: Option<f64>,
    },
    /// Bisection for the critical mu
    Findmu {
        #[arg(long, allow_negative_numbers = true)]
        lo: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        hi: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        tol: Option<f64>,
        #[arg(long)]
        resolution: Option<f64>,
    },
    /// Attractor of the oscillatory-component equation
    Osc {
        #[arg(long)]
        s_transient: Option<f64>,
        #[arg(long)]
        s_observe: Option<f64>,
    },
    /// Bisection in n for the end of the periodic regime
    Nh {
        #[arg(long)]
        lo: Option<f64>,
        #[arg(long)]
        hi: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        tol: Option<f64>,
    },
    /// Root l of the characteristic cubic
    Cubic {
        /// characteristic or linearized
        #[arg(long)]
        rule: Option<String>,
    },
    /// Two-term interface expansion and its residual order
    Expand {
        #[arg(long, allow_negative_numbers = true)]
        d: Option<f64>,
        #[arg(long)]
        rule: Option<String>,
    },
    /// Backward shot from the positive bundle
    Backshoot {
        #[arg(long, allow_negative_numbers = true)]
        d: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        delta: Option<f64>,
        #[arg(long)]
        rule: Option<String>,
        /// two or three
        #[arg(long)]
        seed: Option<String>,
    },
    /// Backshoots over a D grid with refinement of f'(0) sign changes
    ScanD {
        /// Comma-separated D values
        #[arg(long, allow_negative_numbers = true)]
        grid: Option<String>,
        #[arg(long, allow_negative_numbers = true)]
        delta: Option<f64>,
        #[arg(long)]
        rule: Option<String>,
        #[arg(long)]
        seed: Option<String>,
    },
    /// Backshoots from the oscillatory bundle over one period of phases
    ScanS0 {
        #[arg(long)]
        count: Option<usize>,
        #[arg(long, allow_negative_numbers = true)]
        delta: Option<f64>,
    },
    /// Log fit of the critical n = 3 profile near its interface
    Log3 {
        #[arg(long)]
        lo: Option<f64>,
        #[arg(long)]
        hi: Option<f64>,
    },
    /// Minimum of f along n = 4 shots
    Noexist4 {
        /// Comma-separated mu values
        #[arg(long, allow_negative_numbers = true)]
        mu_list: Option<String>,
    },
    /// Parameter sweep, one CSV row per point
    Sweep {
        /// findmu, shoot, osc, cubic or backshoot
        #[arg(long)]
        task: Option<String>,
        /// n, mu, d or eps
        #[arg(long)]
        param: Option<String>,
        /// Comma-separated parameter values
        #[arg(long, allow_negative_numbers = true)]
        values: Option<String>,
    },
    /// Data behind every figure, one CSV each
    ReproFigs,
}

type Pair = (&'static str, &'static str, String);

fn opt<T: ToString>(flag: &'static str, key: &'static str, v: &Option<T>) -> Option<Pair> {
    v.as_ref().map(|x| (flag, key, x.to_string()))
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Shoot { .. } => "shoot",
            Command::Findmu { .. } => "findmu",
            Command::Osc { .. } => "osc",
            Command::Nh { .. } => "nh",
            Command::Cubic { .. } => "cubic",
            Command::Expand { .. } => "expand",
            Command::Backshoot { .. } => "backshoot",
            Command::ScanD { .. } => "scan-d",
            Command::ScanS0 { .. } => "scan-s0",
            Command::Log3 { .. } => "log3",
            Command::Noexist4 { .. } => "noexist4",
            Command::Sweep { .. } => "sweep",
            Command::ReproFigs => "repro-figs",
        }
    }

    /// Subcommand flags as `(flag, config key, value)`.
    fn pairs(&self) -> Vec<Pair> {
        let v = match self {
            Command::Shoot { mu, microscope, y_max } => vec![
                opt("--mu", "mu", mu),
                microscope.then(|| ("--microscope", "microscope", "true".to_string())),
                opt("--y-max", "y_max", y_max),
            ],
            Command::Findmu { lo, hi, tol, resolution } => vec![
                opt("--lo", "mu_lo", lo),
                opt("--hi", "mu_hi", hi),
                opt("--tol", "mu_tol", tol),
                opt("--resolution", "resolution", resolution),
            ],
            Command::Osc { s_transient, s_observe } => vec![
                opt("--s-transient", "s_transient", s_transient),
                opt("--s-observe", "s_observe", s_observe),
            ],
            Command::Nh { lo, hi, tol } => vec![
                opt("--lo", "nh_lo", lo),
                opt("--hi", "nh_hi", hi),
                opt("--tol", "nh_tol", tol),
            ],
            Command::Cubic { rule } => vec![opt("--rule", "rule", rule)],
            Command::Expand { d, rule } => vec![opt("--d", "d", d), opt("--rule", "rule", rule)],
            Command::Backshoot { d, delta, rule, seed } => vec![
                opt("--d", "d", d),
                opt("--delta", "delta", delta),
                opt("--rule", "rule", rule),
                opt("--seed", "seed", seed),
            ],
            Command::ScanD { grid, delta, rule, seed } => vec![
                opt("--grid", "d_grid", grid),
                opt("--delta", "delta", delta),
                opt("--rule", "rule", rule),
                opt("--seed", "seed", seed),
            ],
            Command::ScanS0 { count, delta } => vec![opt("--count", "s0_count", count), opt("--delta", "delta", delta)],
            Command::Log3 { lo, hi } => vec![opt("--lo", "log_lo", lo), opt("--hi", "log_hi", hi)],
            Command::Noexist4 { mu_list } => vec![opt("--mu-list", "mu_list", mu_list)],
            Command::Sweep { task, param, values } => vec![
                opt("--task", "sweep_task", task),
                opt("--param", "sweep_param", param),
                opt("--values", "sweep_values", values),
            ],
            Command::ReproFigs => vec![],
        };
        v.into_iter().flatten().collect()
    }
}

impl Common {
    fn pairs(&self) -> Vec<Pair> {
        [
            opt("--n", "n", &self.n),
            opt("--eps", "eps", &self.eps),
            opt("--rtol", "rtol", &self.rtol),
            opt("--atol", "atol", &self.atol),
            opt("--scale", "scale", &self.scale),
            opt("--resample", "resample", &self.resample),
        ]
        .into_iter()
        .flatten()
        .collect()
    }
}

fn usage(e: ConfigError) -> CliError {
    CliError::Usage(e.to_string())
}

fn build_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.common.config {
        cfg.apply_file(path).map_err(|e| CliError::Usage(format!("--config: {e}")))?;
    }
    let mut flags: Vec<(String, &str, String)> = Vec::new();
    for raw in &cli.common.set {
        let (k, v) = raw
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--set: expected KEY=VALUE, got '{raw}'")))?;
        flags.push(("--set".into(), k.trim(), v.trim().to_string()));
    }
    for (flag, key, v) in cli.common.pairs().into_iter().chain(cli.command.pairs()) {
        flags.push((flag.into(), key, v));
    }
    for (flag, key, v) in &flags {
        cfg.set(key, v).map_err(|e| CliError::Usage(format!("{flag}: {e}")))?;
    }
    cfg.validate().map_err(|e| match &e {
        ConfigError::Invalid { key, reason } => match flags.iter().find(|f| f.1 == key) {
            Some((flag, ..)) => CliError::Usage(format!("{flag}: {reason}")),
            None => usage(e),
        },
        _ => usage(e),
    })?;
    Ok(cfg)
}

/// Relative output paths are placed under `$TFE_OUT_DIR` when it is set.
fn resolve_out(p: &Path) -> PathBuf {
    match std::env::var_os("TFE_OUT_DIR") {
        Some(dir) if p.is_relative() => Path::new(&dir).join(p),
        _ => p.to_path_buf(),
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = build_config(cli)?;
    let out = cli.common.out.as_deref().map(resolve_out);
    let start = Instant::now();
    let report = commands::run(&cli.command, &cfg, out.as_deref())?;
    let wall = start.elapsed().as_secs_f64();

    print!("{}", output::summary_text(&report.summary));
    for (path, text) in &report.files {
        output::write_file(path, text)?;
    }
    if let Some(path) = report.sidecar {
        let mut m = Map::new();
        m.insert("command".into(), Value::from(cli.command.name()));
        for (k, v) in &report.summary {
            m.insert(k.clone(), Value::from(v.as_str()));
        }
        m.insert("wall_time_s".into(), Value::from(wall));
        m.insert("config".into(), serde_json::to_value(&cfg).expect("config serializes"));
        output::write_json(&path, &m)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
