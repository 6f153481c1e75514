use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use bellsim_cli::{parse_config, run_and_emit, CliError};

/// Local hidden-variable EPR-Bell simulator with unfair sampling.
///
/// Numeric flags accept plain numbers or multiples of pi such as `pi/13.39`
/// or `3pi/8`. Flags override values read from `--config`.
#[derive(Parser, Debug)]
#[command(name = "bellsim", version = env!("BELLSIM_VERSION"))]
struct Args {
    /// correlate, chsh, passive-test, active-test, malus-check or oracle-compare
    #[arg(long)]
    command: Option<String>,
    /// Flat key=value file; a run manifest works as one.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<String>,
    /// Pairs per point (per setting pair for chsh, per configuration for oracle-compare).
    #[arg(long)]
    n_per_point: Option<String>,
    /// Points on the [0, π] sweep grid.
    #[arg(long)]
    grid_points: Option<String>,
    /// Control PBS orientation for active-test and malus-check.
    #[arg(long)]
    theta: Option<String>,
    #[arg(long)]
    shaky_width: Option<String>,
    #[arg(long)]
    misalignment_sigma: Option<String>,
    #[arg(long)]
    collapse_sigma: Option<String>,
    #[arg(long)]
    fair_loss_prob: Option<String>,
    /// CHSH angles `a,a',b,b'`.
    #[arg(long)]
    angle_set: Option<String>,
    /// Active-test rate denominator: survivors or emitted.
    #[arg(long)]
    normalization: Option<String>,
    /// Random configurations for oracle-compare.
    #[arg(long)]
    configs: Option<String>,
    /// CSV output path; the manifest is written next to it.
    #[arg(long)]
    out: Option<String>,
    /// Worker threads, 0 for one per core. Does not affect results.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

impl Args {
    fn overrides(&self) -> Vec<(&'static str, String)> {
        [
            ("command", &self.command),
            ("seed", &self.seed),
            ("n_per_point", &self.n_per_point),
            ("grid_points", &self.grid_points),
            ("theta", &self.theta),
            ("shaky_width", &self.shaky_width),
            ("misalignment_sigma", &self.misalignment_sigma),
            ("collapse_sigma", &self.collapse_sigma),
            ("fair_loss_prob", &self.fair_loss_prob),
            ("angle_set", &self.angle_set),
            ("normalization", &self.normalization),
            ("configs", &self.configs),
            ("out", &self.out),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.clone().map(|v| (k, v)))
        .collect()
    }
}

fn run(args: &Args) -> Result<Vec<String>, CliError> {
    let text = match &args.config {
        Some(path) => Some(fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?),
        None => None,
    };
    let cfg = parse_config(text.as_deref(), &args.overrides())?;
    let outcome = run_and_emit(&cfg, args.workers)?;
    let mut lines = outcome.summary;
    lines.push(format!("wrote {}", cfg.output_path.display()));
    Ok(lines)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(lines) => {
            for l in lines {
                println!("{l}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("bellsim: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
