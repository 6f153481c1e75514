//! CSV series and run manifests.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use bellsim::compare::ComparisonReport;
use bellsim::experiment::{ChshResult, SweepSeries, PAIR_LABELS};

use crate::config::RunConfig;
use crate::error::{CliError, Result};

pub const SERIES_HEADER: &str = "setting,value,stderr";
pub const CHSH_HEADER: &str = "pair,e_value,stderr";
pub const COMPARE_HEADER: &str = "config,cell,mc_frequency,oracle_probability,z_score";

const SIGNIFICANT_DIGITS: usize = 12;

/// `git describe`-style version text, fixed at build time.
pub fn version_text() -> &'static str {
    env!("BELLSIM_VERSION")
}

/// Formats like C's `%.12g`: 12 significant digits, trailing zeros
/// dropped, exponent form outside `1e-4 ≤ |x| < 1e12` after rounding.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= SIGNIFICANT_DIGITS as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn series_csv(series: &SweepSeries) -> String {
    let mut out = format!("{SERIES_HEADER}\n");
    for p in &series.points {
        let _ = writeln!(
            out,
            "{},{},{}",
            format_number(p.setting.radians()),
            format_number(p.value),
            format_number(p.stderr)
        );
    }
    out
}

pub fn chsh_csv(result: &ChshResult) -> String {
    let mut out = format!("{CHSH_HEADER}\n");
    for ((label, e), se) in PAIR_LABELS.iter().zip(result.e_values).zip(result.stderrs) {
        let _ = writeln!(out, "{label},{},{}", format_number(e), format_number(se));
    }
    let _ = writeln!(out, "S,{}", format_number(result.s_value));
    out
}

pub fn comparison_csv(report: &ComparisonReport) -> String {
    let mut out = format!("{COMPARE_HEADER}\n");
    for c in &report.checks {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            c.config,
            c.cell.name(),
            format_number(c.mc_frequency),
            format_number(c.oracle_probability),
            format_number(c.z_score())
        );
    }
    out
}

/// Manifest text in config-file syntax, so it can be passed back with
/// `--config` to replay the run.
pub fn manifest_text(cfg: &RunConfig) -> String {
    let mut out = String::from("# bellsim run manifest\n");
    let _ = writeln!(out, "version={}", version_text());
    for (k, v) in cfg.to_key_values() {
        let _ = writeln!(out, "{k}={v}");
    }
    out
}

/// `<dir>/<name>.manifest` next to `<dir>/<name>.<ext>`.
pub fn manifest_path(output: &Path) -> PathBuf {
    output.with_extension("manifest")
}

/// Writes the CSV and its sibling manifest; returns the manifest path.
pub fn write_outputs(cfg: &RunConfig, csv: &str) -> Result<PathBuf> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CliError::Io { path, source }
    };
    let csv_path = &cfg.output_path;
    let manifest = manifest_path(csv_path);
    if manifest == *csv_path {
        return Err(CliError::usage("out", "output path must not end in .manifest"));
    }
    fs::write(csv_path, csv).map_err(io(csv_path))?;
    fs::write(&manifest, manifest_text(cfg)).map_err(io(&manifest))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{parse_config, Command};
    use bellsim::experiment::{SweepKind, SweepPoint};
    use bellsim::model::ModelParams;
    use bellsim::Angle;

    #[test]
    fn number_format_matches_printf_g() {
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (-2.5, "-2.5"),
            (std::f64::consts::PI, "3.14159265359"),
            (0.1, "0.1"),
            (1.0 / 3.0, "0.333333333333"),
            (1.5e-7, "1.5e-07"),
            (0.0001234, "0.0001234"),
            (123456789012.0, "123456789012"),
            (1.0e12, "1e+12"),
            (9.9999999999999e-6, "1e-05"),
            (f64::INFINITY, "inf"),
        ];
        for (x, want) in cases {
            assert_eq!(format_number(x), want, "{x:e}");
        }
    }

    #[test]
    fn three_point_series_is_four_lines() {
        let points = (0..3)
            .map(|i| SweepPoint {
                setting: Angle::new(i as f64 * 0.5),
                value: 0.25 * i as f64,
                stderr: 0.01,
                n_events: 0,
                n_trials: 0,
                n_entered: 0,
            })
            .collect();
        let s = SweepSeries {
            kind: SweepKind::PassiveRate,
            points,
            params: ModelParams::default(),
            n_per_point: 1,
            seed: 0,
        };
        let csv = series_csv(&s);
        assert_eq!(csv, "setting,value,stderr\n0,0,0.01\n0.5,0.25,0.01\n1,0.5,0.01\n");
    }

    #[test]
    fn manifest_replays_config() {
        let mut cfg = RunConfig::with_defaults(Command::PassiveTest);
        cfg.seed = 1234;
        let text = manifest_text(&cfg);
        assert!(text.contains(&format!("version={}\n", version_text())));
        assert!(text.contains("seed=1234\n"));
        assert_eq!(parse_config(Some(&text), &[]).unwrap(), cfg);
    }

    #[test]
    fn manifest_sits_next_to_csv() {
        assert_eq!(manifest_path(Path::new("runs/chsh.csv")), PathBuf::from("runs/chsh.manifest"));
        assert_eq!(manifest_path(Path::new("series")), PathBuf::from("series.manifest"));
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let mut cfg = RunConfig::with_defaults(Command::Chsh);
        cfg.output_path = "/nonexistent-dir/x/y.csv".into();
        let err = write_outputs(&cfg, "x").unwrap_err();
        assert_eq!(err.exit_code(), 4);
    }
}
