//! Cell-by-cell agreement between Monte Carlo counts and the oracle.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::angle::Angle;
use crate::error::Result;
use crate::experiment::{run_point, CoincidenceCounts};
use crate::model::{ModelParams, SourceSpec};
use crate::oracle::{joint_probabilities, Cell, OracleDistribution};
use crate::rng::stream_rng;

/// A cell agrees when it lies within this many binomial standard errors.
pub const SIGMA_MULTIPLE: f64 = 3.0;
/// Fraction of cells that must agree for a comparison to pass.
pub const PASS_FRACTION: f64 = 0.94;
/// Absolute slack for quadrature error on cells whose binomial error is ~0.
const QUADRATURE_SLACK: f64 = 1e-9;

/// Stream reserved for drawing random configurations, far from the
/// per-configuration simulation streams.
const CONFIG_STREAM: u64 = u64::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub source: SourceSpec,
    pub phi_a: Angle,
    pub phi_b: Angle,
    pub params: ModelParams,
}

/// Random model configurations covering both sources, sharp and smeared
/// pairs, and fair loss.
pub fn random_configurations(n: usize, seed: u64) -> Vec<OracleConfig> {
    let mut rng = stream_rng(seed, CONFIG_STREAM);
    (0..n)
        .map(|_| {
            let params = ModelParams {
                shaky_width: rng.random_range(0.0..PI / 8.0),
                fair_loss_prob: if rng.random_bool(0.5) {
                    rng.random_range(0.0..0.3)
                } else {
                    0.0
                },
                misalignment_sigma: if rng.random_bool(0.2) {
                    0.0
                } else {
                    rng.random_range(0.01..PI / 8.0)
                },
                collapse_sigma: rng.random_range(0.05..PI / 6.0),
            };
            let source = if rng.random_bool(0.25) {
                params.controlled_source(Angle::new(rng.random_range(0.0..TAU)))
            } else {
                params.entangled_source()
            };
            OracleConfig {
                source,
                phi_a: Angle::new(rng.random_range(0.0..TAU)),
                phi_b: Angle::new(rng.random_range(0.0..TAU)),
                params,
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellCheck {
    pub config: usize,
    pub cell: Cell,
    pub mc_frequency: f64,
    pub oracle_probability: f64,
    /// Binomial standard error at the oracle probability.
    pub sigma: f64,
}

impl CellCheck {
    pub fn deviation(&self) -> f64 {
        (self.mc_frequency - self.oracle_probability).abs()
    }

    /// Deviation in standard errors; infinite for a nonzero deviation on a
    /// cell the oracle says is certain.
    pub fn z_score(&self) -> f64 {
        let d = (self.deviation() - QUADRATURE_SLACK).max(0.0);
        if d == 0.0 {
            0.0
        } else if self.sigma == 0.0 {
            f64::INFINITY
        } else {
            d / self.sigma
        }
    }

    pub fn within(&self, k: f64) -> bool {
        self.z_score() <= k
    }
}

pub fn check_cells(
    config: usize,
    counts: &CoincidenceCounts,
    oracle: &OracleDistribution,
) -> Vec<CellCheck> {
    let n = counts.n_total as f64;
    let observed = |cell: Cell| match cell {
        Cell::PlusPlus => counts.n_pp,
        Cell::PlusMinus => counts.n_pm,
        Cell::MinusPlus => counts.n_mp,
        Cell::MinusMinus => counts.n_mm,
        Cell::Rejected => counts.n_rejected,
    };
    Cell::ALL
        .iter()
        .map(|&cell| {
            let p = oracle.cell(cell).clamp(0.0, 1.0);
            CellCheck {
                config,
                cell,
                mc_frequency: observed(cell) as f64 / n,
                oracle_probability: p,
                sigma: (p * (1.0 - p) / n).sqrt(),
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub configs: Vec<OracleConfig>,
    pub checks: Vec<CellCheck>,
    pub n_per_config: u64,
}

impl ComparisonReport {
    pub fn fraction_within(&self, k: f64) -> f64 {
        if self.checks.is_empty() {
            return 1.0;
        }
        self.checks.iter().filter(|c| c.within(k)).count() as f64 / self.checks.len() as f64
    }

    pub fn worst(&self) -> Option<&CellCheck> {
        self.checks
            .iter()
            .max_by(|a, b| a.z_score().total_cmp(&b.z_score()))
    }

    /// At least [`PASS_FRACTION`] of cells within [`SIGMA_MULTIPLE`] errors.
    pub fn passes(&self) -> bool {
        self.fraction_within(SIGMA_MULTIPLE) >= PASS_FRACTION
    }
}

/// Simulates each configuration on its own stream and checks every cell.
pub fn compare_with_oracle(
    configs: &[OracleConfig],
    n_per_config: u64,
    seed: u64,
    workers: usize,
) -> Result<ComparisonReport> {
    let per_config = crate::experiment::map_points(seed, workers, configs.len(), |i, rng| {
        let c = &configs[i];
        let oracle = joint_probabilities(&c.source, c.phi_a, c.phi_b, &c.params)?;
        let counts = run_point(
            &c.source,
            &c.params.analyzer(c.phi_a),
            &c.params.analyzer(c.phi_b),
            &c.params,
            n_per_config,
            rng,
        );
        Ok(check_cells(i, &counts, &oracle))
    })?;
    Ok(ComparisonReport {
        configs: configs.to_vec(),
        checks: per_config.into_iter().flatten().collect(),
        n_per_config,
    })
}
