use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use super::counts::{binomial_stderr, correlation, run_point, CoincidenceCounts};
use crate::angle::Angle;
use crate::error::{Error, Result};
use crate::model::{apply_fair_loss, classify, collapse_plus_channel, ChannelOutcome, ModelParams};
use crate::rng::{stream_rng, SimRng};

/// Fewest control-stage survivors an active-test point may be built from.
pub const MIN_CONTROL_SURVIVORS: u64 = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SweepKind {
    CorrelationVsDelta,
    PassiveRate,
    ActiveRate,
    MalusTransmission,
}

/// One sweep point.
///
/// `value` is `n_events / n_trials` for the rate-like sweeps. `n_entered`
/// counts what entered the last stage: pairs for the coincidence sweeps,
/// photons that passed the control PBS for the Malus check (so the Malus
/// detected fraction is `n_trials / n_entered`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub setting: Angle,
    pub value: f64,
    pub stderr: f64,
    pub n_events: u64,
    pub n_trials: u64,
    pub n_entered: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSeries {
    pub kind: SweepKind,
    pub points: Vec<SweepPoint>,
    pub params: ModelParams,
    pub n_per_point: u64,
    pub seed: u64,
}

impl SweepSeries {
    pub fn settings(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.setting.radians()).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }
}

/// Denominator of the active-test rate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum ActiveNormalization {
    /// Pairs that passed both control PBSs.
    #[default]
    ControlSurvivors,
    /// All pairs emitted by the source.
    Emitted,
}

/// Shared run configuration for every sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub params: ModelParams,
    pub n_per_point: u64,
    pub seed: u64,
    /// Worker threads; 0 picks the rayon default. Results do not depend on it.
    pub workers: usize,
}

impl RunSettings {
    pub fn new(params: ModelParams, n_per_point: u64, seed: u64) -> Self {
        RunSettings {
            params,
            n_per_point,
            seed,
            workers: 0,
        }
    }

    pub fn with_workers(self, workers: usize) -> Self {
        RunSettings { workers, ..self }
    }

    fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.n_per_point == 0 {
            return Err(Error::invalid("n_per_point", "must be at least 1"));
        }
        Ok(())
    }

    fn series(&self, kind: SweepKind, points: Vec<SweepPoint>) -> SweepSeries {
        SweepSeries {
            kind,
            points,
            params: self.params,
            n_per_point: self.n_per_point,
            seed: self.seed,
        }
    }
}

/// `n` evenly spaced angles from `lo` to `hi` inclusive.
pub fn uniform_grid(n: usize, lo: f64, hi: f64) -> Vec<Angle> {
    match n {
        0 => Vec::new(),
        1 => vec![Angle::new(lo)],
        _ => (0..n)
            .map(|i| Angle::new(lo + (hi - lo) * i as f64 / (n - 1) as f64))
            .collect(),
    }
}

fn check_grid(grid: &[Angle]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid("grid", "must contain at least one setting"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("grid", "settings must be strictly increasing"));
    }
    Ok(())
}

/// Evaluates `f(index, rng)` for every point, each on its own stream, and
/// returns results in index order.
pub(crate) fn map_points<T, F>(seed: u64, workers: usize, n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &mut SimRng) -> Result<T> + Sync + Send,
{
    let run = |i: usize| f(i, &mut stream_rng(seed, i as u64));
    if workers == 1 {
        return (0..n).map(run).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::WorkerPool(e.to_string()))?;
    pool.install(|| (0..n).into_par_iter().map(run).collect())
}

/// Correlation `E(Δφ)` with `φ_A = 0` and `φ_B` running over `grid`.
pub fn correlation_sweep(settings: &RunSettings, grid: &[Angle]) -> Result<SweepSeries> {
    settings.validate()?;
    check_grid(grid)?;
    let p = settings.params;
    let source = p.entangled_source();
    let a = p.analyzer(Angle::ZERO);
    let points = map_points(settings.seed, settings.workers, grid.len(), |i, rng| {
        let counts = run_point(&source, &a, &p.analyzer(grid[i]), &p, settings.n_per_point, rng);
        Ok(SweepPoint {
            setting: grid[i],
            value: correlation(&counts)?,
            stderr: counts.correlation_stderr()?,
            n_events: counts.n_detected(),
            n_trials: counts.n_total,
            n_entered: counts.n_total,
        })
    })?;
    Ok(settings.series(SweepKind::CorrelationVsDelta, points))
}

fn rate_point(setting: Angle, counts: &CoincidenceCounts) -> SweepPoint {
    SweepPoint {
        setting,
        value: counts.rate_fraction(),
        stderr: counts.rate_stderr(),
        n_events: counts.n_detected(),
        n_trials: counts.n_total,
        n_entered: counts.n_total,
    }
}

/// Detected-pair fraction `n_d / n_total` as the relative angle varies.
pub fn passive_sweep(settings: &RunSettings, grid: &[Angle]) -> Result<SweepSeries> {
    settings.validate()?;
    check_grid(grid)?;
    let p = settings.params;
    let source = p.entangled_source();
    let a = p.analyzer(Angle::ZERO);
    let points = map_points(settings.seed, settings.workers, grid.len(), |i, rng| {
        let counts = run_point(&source, &a, &p.analyzer(grid[i]), &p, settings.n_per_point, rng);
        Ok(rate_point(grid[i], &counts))
    })?;
    Ok(settings.series(SweepKind::PassiveRate, points))
}

/// Active fair-sampling test.
///
/// Pairs from the rotationally invariant source first cross two aligned
/// control PBSs at `theta`; only pairs with both photons in `+1` go on, each
/// photon re-polarized around `theta`. Both measurement PBSs then sit at the
/// same grid angle `φ`. Fair loss applies to the measurement stage only.
pub fn active_sweep(
    settings: &RunSettings,
    theta: Angle,
    grid: &[Angle],
    normalization: ActiveNormalization,
) -> Result<SweepSeries> {
    settings.validate()?;
    check_grid(grid)?;
    let p = settings.params;
    let source = p.entangled_source();
    let control = p.analyzer(theta);
    let points = map_points(settings.seed, settings.workers, grid.len(), |i, rng| {
        let measure = p.analyzer(grid[i]);
        let mut counts = CoincidenceCounts::default();
        for _ in 0..settings.n_per_point {
            let pair = source.sample_pair(rng);
            let Some(l1) = collapse_plus_channel(pair.lambda1, &control, p.collapse_sigma, rng) else {
                continue;
            };
            let Some(l2) = collapse_plus_channel(pair.lambda2, &control, p.collapse_sigma, rng) else {
                continue;
            };
            let a = apply_fair_loss(classify(l1, &measure), p.fair_loss_prob, rng);
            let b = apply_fair_loss(classify(l2, &measure), p.fair_loss_prob, rng);
            counts.record(a, b);
        }
        if counts.n_total < MIN_CONTROL_SURVIVORS {
            return Err(Error::StarvedSource {
                setting: grid[i].radians(),
                passed: counts.n_total,
                required: MIN_CONTROL_SURVIVORS,
            });
        }
        let mut point = rate_point(grid[i], &counts);
        if normalization == ActiveNormalization::Emitted {
            point.n_trials = settings.n_per_point;
            point.value = counts.n_detected() as f64 / settings.n_per_point as f64;
            point.stderr = binomial_stderr(counts.n_detected(), settings.n_per_point);
        }
        Ok(point)
    })?;
    Ok(settings.series(SweepKind::ActiveRate, points))
}

/// Single-photon Malus check: uniform photons, control PBS at `theta`
/// (keep `+1`, collapse), analyzing PBS at `theta + χ`. The value is the
/// fraction of detected photons that exit `+1`.
pub fn malus_transmission(
    settings: &RunSettings,
    theta: Angle,
    chi_grid: &[Angle],
) -> Result<SweepSeries> {
    settings.validate()?;
    check_grid(chi_grid)?;
    let p = settings.params;
    let control = p.analyzer(theta);
    let points = map_points(settings.seed, settings.workers, chi_grid.len(), |i, rng| {
        let chi = chi_grid[i];
        let analyzer = p.analyzer(theta.rotated(chi.radians()));
        let (mut passed, mut detected, mut plus) = (0u64, 0u64, 0u64);
        for _ in 0..settings.n_per_point {
            let lambda = Angle::new(rng.random::<f64>() * TAU);
            let Some(out) = collapse_plus_channel(lambda, &control, p.collapse_sigma, rng) else {
                continue;
            };
            passed += 1;
            match apply_fair_loss(classify(out, &analyzer), p.fair_loss_prob, rng) {
                ChannelOutcome::Plus => {
                    detected += 1;
                    plus += 1;
                }
                ChannelOutcome::Minus => detected += 1,
                ChannelOutcome::Undetected => {}
            }
        }
        if detected == 0 {
            return Err(Error::DegenerateInput(format!(
                "no photon detected behind the analyzer at χ = {}",
                chi.radians()
            )));
        }
        Ok(SweepPoint {
            setting: chi,
            value: plus as f64 / detected as f64,
            stderr: binomial_stderr(plus, detected),
            n_events: plus,
            n_trials: detected,
            n_entered: passed,
        })
    })?;
    Ok(settings.series(SweepKind::MalusTransmission, points))
}
