//! Run configuration: a flat `key=value` file overlaid by command-line flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use bellsim::experiment::{ActiveNormalization, ChshAngles};
use bellsim::model::ModelParams;
use bellsim::Angle;

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Correlate,
    Chsh,
    PassiveTest,
    ActiveTest,
    MalusCheck,
    OracleCompare,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Correlate,
        Command::Chsh,
        Command::PassiveTest,
        Command::ActiveTest,
        Command::MalusCheck,
        Command::OracleCompare,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Correlate => "correlate",
            Command::Chsh => "chsh",
            Command::PassiveTest => "passive-test",
            Command::ActiveTest => "active-test",
            Command::MalusCheck => "malus-check",
            Command::OracleCompare => "oracle-compare",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Command::ALL.iter().map(|c| c.name()).collect();
                CliError::usage("command", format!("unknown command {s:?}; expected one of {}", names.join(", ")))
            })
    }
}

/// Every key accepted in a config file or as a flag.
pub const KEYS: [&str; 14] = [
    "command",
    "seed",
    "n_per_point",
    "grid_points",
    "theta",
    "shaky_width",
    "misalignment_sigma",
    "collapse_sigma",
    "fair_loss_prob",
    "angle_set",
    "normalization",
    "configs",
    "out",
    "version",
];

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_N_PER_POINT: u64 = 10_000;
pub const DEFAULT_GRID_POINTS: usize = 60;
pub const DEFAULT_CONFIGS: usize = 50;

/// A fully resolved run. Every command is a pure function of this value.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub params: ModelParams,
    pub grid_points: usize,
    /// Pairs per grid point, per CHSH setting pair or per oracle configuration.
    pub n_per_point: u64,
    pub seed: u64,
    pub theta: Angle,
    pub angle_set: ChshAngles,
    pub normalization: ActiveNormalization,
    /// Random configurations drawn by `oracle-compare`.
    pub configs: usize,
    pub output_path: PathBuf,
}

impl RunConfig {
    pub fn with_defaults(command: Command) -> Self {
        RunConfig {
            command,
            params: ModelParams::default(),
            grid_points: DEFAULT_GRID_POINTS,
            n_per_point: DEFAULT_N_PER_POINT,
            seed: DEFAULT_SEED,
            theta: Angle::ZERO,
            angle_set: ChshAngles::default(),
            normalization: ActiveNormalization::default(),
            configs: DEFAULT_CONFIGS,
            output_path: PathBuf::from(format!("{}.csv", command.name())),
        }
    }

    /// The config in file form. Floats use the shortest round-trip
    /// representation, so feeding the text back through [`parse_config`]
    /// reproduces this exact value.
    pub fn to_key_values(&self) -> Vec<(&'static str, String)> {
        let a = &self.angle_set;
        vec![
            ("command", self.command.to_string()),
            ("seed", self.seed.to_string()),
            ("n_per_point", self.n_per_point.to_string()),
            ("grid_points", self.grid_points.to_string()),
            ("theta", self.theta.radians().to_string()),
            ("shaky_width", self.params.shaky_width.to_string()),
            ("misalignment_sigma", self.params.misalignment_sigma.to_string()),
            ("collapse_sigma", self.params.collapse_sigma.to_string()),
            ("fair_loss_prob", self.params.fair_loss_prob.to_string()),
            (
                "angle_set",
                [a.a, a.a_prime, a.b, a.b_prime]
                    .map(|x| x.radians().to_string())
                    .join(","),
            ),
            ("normalization", normalization_name(self.normalization).to_string()),
            ("configs", self.configs.to_string()),
            ("out", self.output_path.display().to_string()),
        ]
    }
}

fn normalization_name(n: ActiveNormalization) -> &'static str {
    match n {
        ActiveNormalization::ControlSurvivors => "survivors",
        ActiveNormalization::Emitted => "emitted",
    }
}

/// Splits config text into `(key, value, line)` entries. Blank lines and
/// `#` comments are skipped; dashes in keys are read as underscores.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String, usize)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::usage(
                format!("line {}", i + 1),
                format!("expected key=value, got {line:?}"),
            ));
        };
        out.push((key.trim().replace('-', "_"), value.trim().to_string(), i + 1));
    }
    Ok(out)
}

/// Resolves a run configuration from optional config-file text and flag
/// overrides given as `(key, value)` pairs. Flags win over the file; keys
/// absent from both take the calibrated defaults.
pub fn parse_config(file_text: Option<&str>, overrides: &[(&str, String)]) -> Result<RunConfig> {
    let mut raw: BTreeMap<String, String> = BTreeMap::new();
    if let Some(text) = file_text {
        for (key, value, line) in parse_key_values(text)? {
            check_key(&key)?;
            if raw.insert(key.clone(), value).is_some() {
                return Err(CliError::usage(key, format!("set twice (again on line {line})")));
            }
        }
    }
    for (key, value) in overrides {
        let key = key.replace('-', "_");
        check_key(&key)?;
        raw.insert(key, value.clone());
    }
    raw.remove("version");

    let command: Command = raw
        .remove("command")
        .ok_or_else(|| CliError::usage("command", "no command given"))?
        .parse()?;
    let mut cfg = RunConfig::with_defaults(command);

    for (key, value) in &raw {
        let key = key.as_str();
        match key {
            "seed" => cfg.seed = parse_int(key, value)?,
            "n_per_point" => cfg.n_per_point = parse_int(key, value)?,
            "grid_points" => cfg.grid_points = parse_int(key, value)?,
            "configs" => cfg.configs = parse_int(key, value)?,
            "theta" => cfg.theta = Angle::new(parse_real(key, value)?),
            "shaky_width" => cfg.params.shaky_width = parse_real(key, value)?,
            "misalignment_sigma" => cfg.params.misalignment_sigma = parse_real(key, value)?,
            "collapse_sigma" => cfg.params.collapse_sigma = parse_real(key, value)?,
            "fair_loss_prob" => cfg.params.fair_loss_prob = parse_real(key, value)?,
            "angle_set" => cfg.angle_set = parse_angle_set(value)?,
            "normalization" => {
                cfg.normalization = match value.as_str() {
                    "survivors" => ActiveNormalization::ControlSurvivors,
                    "emitted" => ActiveNormalization::Emitted,
                    other => {
                        return Err(CliError::usage(
                            key,
                            format!("expected `survivors` or `emitted`, got {other:?}"),
                        ))
                    }
                }
            }
            "out" => {
                if value.is_empty() {
                    return Err(CliError::usage(key, "empty output path"));
                }
                cfg.output_path = PathBuf::from(value);
            }
            _ => unreachable!("keys are checked on insertion"),
        }
    }
    validate(&cfg)?;
    Ok(cfg)
}

fn check_key(key: &str) -> Result<()> {
    if KEYS.contains(&key) {
        Ok(())
    } else {
        Err(CliError::usage(key, "unknown key"))
    }
}

fn validate(cfg: &RunConfig) -> Result<()> {
    cfg.params.validate().map_err(|e| match e {
        bellsim::Error::InvalidParameter { name, reason } => CliError::range(name, reason),
        other => CliError::Simulation(other),
    })?;
    if cfg.n_per_point == 0 {
        return Err(CliError::range("n_per_point", "must be at least 1"));
    }
    if cfg.grid_points < 2 {
        return Err(CliError::range("grid_points", "a sweep needs at least 2 points"));
    }
    if cfg.configs == 0 {
        return Err(CliError::range("configs", "must be at least 1"));
    }
    let a = &cfg.angle_set;
    if a.a == a.a_prime || a.b == a.b_prime {
        return Err(CliError::range("angle_set", "a must differ from a' and b from b'"));
    }
    Ok(())
}

fn parse_int<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| CliError::usage(key, format!("expected a non-negative integer, got {value:?}")))
}

/// A real number, optionally written in terms of `pi`: `0.5`, `pi`,
/// `-pi/4`, `3pi/8`, `3*pi/8` or `pi/13.39`.
pub fn parse_real(key: &str, value: &str) -> Result<f64> {
    let bad = || CliError::usage(key, format!("expected a number or a multiple of pi, got {value:?}"));
    let s: String = value.chars().filter(|c| !c.is_whitespace()).collect();
    let x = if let Some((coef, rest)) = s.split_once("pi") {
        let coef = coef.strip_suffix('*').unwrap_or(coef);
        let coef = match coef {
            "" | "+" => 1.0,
            "-" => -1.0,
            c => c.parse::<f64>().map_err(|_| bad())?,
        };
        let divisor = match rest {
            "" => 1.0,
            r => r.strip_prefix('/').ok_or_else(bad)?.parse::<f64>().map_err(|_| bad())?,
        };
        coef * std::f64::consts::PI / divisor
    } else {
        s.parse::<f64>().map_err(|_| bad())?
    };
    if !x.is_finite() {
        return Err(CliError::range(key, format!("{value:?} is not finite")));
    }
    Ok(x)
}

fn parse_angle_set(value: &str) -> Result<ChshAngles> {
    let parts: Vec<&str> = value.split(',').collect();
    if parts.len() != 4 {
        return Err(CliError::usage(
            "angle_set",
            format!("expected four comma-separated angles a,a',b,b', got {}", parts.len()),
        ));
    }
    let mut v = [0.0; 4];
    for (slot, part) in v.iter_mut().zip(parts) {
        *slot = parse_real("angle_set", part)?;
    }
    Ok(ChshAngles::from_array(v))
}
