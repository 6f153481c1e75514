use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::angle::Angle;
use crate::error::{Error, Result};
use crate::model::{apply_fair_loss, classify, AnalyzerSpec, ChannelOutcome, ModelParams, SourceSpec};

/// Coincidence tallies for one pair of analyzer settings.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoincidenceCounts {
    pub n_pp: u64,
    pub n_pm: u64,
    pub n_mp: u64,
    pub n_mm: u64,
    /// Pairs with at least one undetected photon.
    pub n_rejected: u64,
    /// Pairs entering the measurement stage.
    pub n_total: u64,
}

impl CoincidenceCounts {
    pub fn record(&mut self, a: ChannelOutcome, b: ChannelOutcome) {
        use ChannelOutcome::*;
        self.n_total += 1;
        match (a, b) {
            (Plus, Plus) => self.n_pp += 1,
            (Plus, Minus) => self.n_pm += 1,
            (Minus, Plus) => self.n_mp += 1,
            (Minus, Minus) => self.n_mm += 1,
            _ => self.n_rejected += 1,
        }
    }

    /// Number of detected pairs, `n_d`.
    pub fn n_detected(&self) -> u64 {
        self.n_pp + self.n_pm + self.n_mp + self.n_mm
    }

    pub fn is_consistent(&self) -> bool {
        self.n_detected() + self.n_rejected == self.n_total
    }

    /// `n_d / n_total`, or 0 for an empty run.
    pub fn rate_fraction(&self) -> f64 {
        if self.n_total == 0 {
            0.0
        } else {
            self.n_detected() as f64 / self.n_total as f64
        }
    }

    pub fn rejected_fraction(&self) -> f64 {
        if self.n_total == 0 {
            0.0
        } else {
            self.n_rejected as f64 / self.n_total as f64
        }
    }

    /// Binomial standard error of [`rate_fraction`](Self::rate_fraction).
    pub fn rate_stderr(&self) -> f64 {
        binomial_stderr(self.n_detected(), self.n_total)
    }

    /// Standard error of the correlation: each detected pair contributes ±1,
    /// so the variance of the mean is `(1 − E²) / n_d`.
    pub fn correlation_stderr(&self) -> Result<f64> {
        let e = correlation(self)?;
        Ok(((1.0 - e * e).max(0.0) / self.n_detected() as f64).sqrt())
    }

    pub fn merge(&mut self, other: &CoincidenceCounts) {
        self.n_pp += other.n_pp;
        self.n_pm += other.n_pm;
        self.n_mp += other.n_mp;
        self.n_mm += other.n_mm;
        self.n_rejected += other.n_rejected;
        self.n_total += other.n_total;
    }
}

pub(crate) fn binomial_stderr(successes: u64, trials: u64) -> f64 {
    if trials == 0 {
        return 0.0;
    }
    let p = successes as f64 / trials as f64;
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// One point of a correlation curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationPoint {
    pub delta_phi: Angle,
    pub e_value: f64,
    pub rate_fraction: f64,
    pub counts: CoincidenceCounts,
}

impl CorrelationPoint {
    pub fn from_counts(delta_phi: Angle, counts: CoincidenceCounts) -> Result<Self> {
        Ok(CorrelationPoint {
            delta_phi,
            e_value: correlation(&counts)?,
            rate_fraction: counts.rate_fraction(),
            counts,
        })
    }
}

/// `E = (n++ − n+− − n−+ + n−−) / n_d`.
pub fn correlation(counts: &CoincidenceCounts) -> Result<f64> {
    let n_d = counts.n_detected();
    if n_d == 0 {
        return Err(Error::DegenerateInput(format!(
            "all {} pairs were rejected; correlation is undefined",
            counts.n_total
        )));
    }
    let same = (counts.n_pp + counts.n_mm) as f64;
    let diff = (counts.n_pm + counts.n_mp) as f64;
    Ok((same - diff) / n_d as f64)
}

/// Runs `n_pairs` pairs from `source` through analyzers A (photon 1) and B
/// (photon 2). A pair counts as rejected when either photon is lost.
pub fn run_point<R: Rng + ?Sized>(
    source: &SourceSpec,
    analyzer_a: &AnalyzerSpec,
    analyzer_b: &AnalyzerSpec,
    params: &ModelParams,
    n_pairs: u64,
    rng: &mut R,
) -> CoincidenceCounts {
    let mut counts = CoincidenceCounts::default();
    for _ in 0..n_pairs {
        let pair = source.sample_pair(rng);
        let a = apply_fair_loss(classify(pair.lambda1, analyzer_a), params.fair_loss_prob, rng);
        let b = apply_fair_loss(classify(pair.lambda2, analyzer_b), params.fair_loss_prob, rng);
        counts.record(a, b);
    }
    counts
}
