use std::f64::consts::{FRAC_PI_2, PI};

use bellsim::analysis::{contrast, harmonic_minima, visibility_fit};
use bellsim::compare::{compare_with_oracle, random_configurations, ComparisonReport, SIGMA_MULTIPLE};
use bellsim::experiment::{
    active_sweep, chsh, correlation_sweep, malus_transmission, passive_sweep, uniform_grid, RunSettings,
};
use bellsim::oracle::malus_deviation_envelope;

use crate::config::{Command, RunConfig};
use crate::emit;
use crate::error::{CliError, Result};

/// What a command produced: the CSV body, human-readable summary lines and,
/// for `oracle-compare`, a failed-policy message.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub csv: String,
    pub summary: Vec<String>,
    pub failure: Option<String>,
}

impl Outcome {
    fn ok(csv: String, summary: Vec<String>) -> Self {
        Outcome {
            csv,
            summary,
            failure: None,
        }
    }
}

/// Runs the configured command. `workers` sets the thread count (0 for the
/// rayon default) and never changes the output.
pub fn execute(cfg: &RunConfig, workers: usize) -> Result<Outcome> {
    let settings = RunSettings::new(cfg.params, cfg.n_per_point, cfg.seed).with_workers(workers);
    let grid = uniform_grid(cfg.grid_points, 0.0, PI);
    match cfg.command {
        Command::Correlate => {
            let s = correlation_sweep(&settings, &grid)?;
            let vis = match visibility_fit(&s) {
                Ok(v) => emit::format_number(v),
                Err(e) => format!("n/a ({e})"),
            };
            Ok(Outcome::ok(emit::series_csv(&s), vec![format!("visibility {vis}")]))
        }
        Command::Chsh => {
            let r = chsh(&settings, &cfg.angle_set)?;
            let mut summary = vec![format!(
                "S = {} ± {}",
                emit::format_number(r.s_value),
                emit::format_number(r.s_stderr)
            )];
            for (label, counts) in bellsim::experiment::PAIR_LABELS.iter().zip(&r.counts) {
                summary.push(format!(
                    "{label}: rejected fraction {}",
                    emit::format_number(counts.rejected_fraction())
                ));
            }
            Ok(Outcome::ok(emit::chsh_csv(&r), summary))
        }
        Command::PassiveTest => {
            let s = passive_sweep(&settings, &grid)?;
            let c = contrast(&s.values());
            Ok(Outcome::ok(emit::series_csv(&s), vec![format!("contrast {}", emit::format_number(c))]))
        }
        Command::ActiveTest => {
            let s = active_sweep(&settings, cfg.theta, &grid, cfg.normalization)?;
            let mut summary = vec![format!("contrast {}", emit::format_number(contrast(&s.values())))];
            if let Ok(minima) = harmonic_minima(&s, FRAC_PI_2, 3) {
                let m: Vec<String> = minima.iter().map(|a| emit::format_number(a.radians())).collect();
                summary.push(format!("fitted minima at {}", m.join(", ")));
            }
            Ok(Outcome::ok(emit::series_csv(&s), summary))
        }
        Command::MalusCheck => {
            let s = malus_transmission(&settings, cfg.theta, &grid)?;
            let worst = s
                .points
                .iter()
                .map(|p| (p.value - p.setting.radians().cos().powi(2)).abs())
                .fold(0.0, f64::max);
            let envelope = malus_deviation_envelope(cfg.theta, &grid, &cfg.params)?;
            Ok(Outcome::ok(
                emit::series_csv(&s),
                vec![
                    format!("max |plus fraction - cos²χ| = {}", emit::format_number(worst)),
                    format!("oracle envelope {}", emit::format_number(envelope)),
                ],
            ))
        }
        Command::OracleCompare => {
            let configs = random_configurations(cfg.configs, cfg.seed);
            let report = compare_with_oracle(&configs, cfg.n_per_point, cfg.seed, workers)?;
            Ok(comparison_outcome(&report))
        }
    }
}

fn comparison_outcome(report: &ComparisonReport) -> Outcome {
    let within = report.checks.iter().filter(|c| c.within(SIGMA_MULTIPLE)).count();
    let mut summary = vec![format!(
        "{within}/{} cells within {SIGMA_MULTIPLE}σ ({})",
        report.checks.len(),
        emit::format_number(report.fraction_within(SIGMA_MULTIPLE))
    )];
    if let Some(w) = report.worst() {
        summary.push(format!(
            "worst cell: config {} cell {} mc {} oracle {} z {}",
            w.config,
            w.cell.name(),
            emit::format_number(w.mc_frequency),
            emit::format_number(w.oracle_probability),
            emit::format_number(w.z_score())
        ));
    }
    let failure = (!report.passes()).then(|| summary.join("; "));
    Outcome {
        csv: emit::comparison_csv(report),
        summary,
        failure,
    }
}

/// Executes the command, writes the CSV and manifest, and turns a failed
/// oracle comparison into [`CliError::Statistical`] after the files exist.
pub fn run_and_emit(cfg: &RunConfig, workers: usize) -> Result<Outcome> {
    let outcome = execute(cfg, workers)?;
    emit::write_outputs(cfg, &outcome.csv)?;
    match &outcome.failure {
        Some(msg) => Err(CliError::Statistical(msg.clone())),
        None => Ok(outcome),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn cfg(command: &str, extra: &[(&'static str, &str)]) -> RunConfig {
        let mut flags = vec![("command", command.to_string())];
        flags.extend(extra.iter().map(|(k, v)| (*k, v.to_string())));
        parse_config(None, &flags).unwrap()
    }

    #[test]
    fn chsh_csv_has_four_pairs_and_s() {
        let out = execute(&cfg("chsh", &[("n_per_point", "2000")]), 1).unwrap();
        let lines: Vec<&str> = out.csv.lines().collect();
        assert_eq!(lines.len(), 6);
        assert_eq!(lines[0], "pair,e_value,stderr");
        assert!(lines[5].starts_with("S,"));
        assert_eq!(lines[5].split(',').count(), 2);
    }

    #[test]
    fn every_sweep_command_emits_grid_rows() {
        for command in ["correlate", "passive-test", "active-test", "malus-check"] {
            let out = execute(&cfg(command, &[("n_per_point", "1000"), ("grid_points", "9")]), 2).unwrap();
            let lines: Vec<&str> = out.csv.lines().collect();
            assert_eq!(lines.len(), 10, "{command}");
            assert_eq!(lines[0], "setting,value,stderr");
            assert!(lines[1].starts_with("0,"));
            assert!(lines[9].starts_with("3.14159265359,"), "{command}: {}", lines[9]);
        }
    }

    #[test]
    fn oracle_compare_reports_worst_cell() {
        let out = execute(&cfg("oracle-compare", &[("configs", "4"), ("n_per_point", "2000")]), 0).unwrap();
        assert_eq!(out.csv.lines().count(), 1 + 4 * 5);
        assert!(out.summary.iter().any(|l| l.starts_with("worst cell")));
    }

    #[test]
    fn failed_policy_names_worst_cell() {
        use bellsim::compare::CellCheck;
        use bellsim::oracle::Cell;
        let check = |config, z: f64| CellCheck {
            config,
            cell: Cell::PlusMinus,
            mc_frequency: 0.5 + 0.01 * z,
            oracle_probability: 0.5,
            sigma: 0.01,
        };
        let report = ComparisonReport {
            configs: Vec::new(),
            checks: vec![check(0, 0.5), check(1, 7.0), check(2, 4.0)],
            n_per_config: 2500,
        };
        let out = comparison_outcome(&report);
        let msg = out.failure.expect("1 of 3 within 3σ fails the policy");
        assert!(msg.contains("worst cell: config 1 cell +-"), "{msg}");

        let report = ComparisonReport {
            checks: vec![check(0, 0.5); 20],
            ..report
        };
        assert!(comparison_outcome(&report).failure.is_none());
    }

    #[test]
    fn starved_active_run_is_a_range_error() {
        let err = execute(&cfg("active-test", &[("n_per_point", "50")]), 1).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }
}
