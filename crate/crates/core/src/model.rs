//! Hidden-variable physics: pair sources, the PBS detection pattern and the
//! two kinds of photon loss.
//!
//! A photon carries a polarization `λ`. A PBS at orientation `φ` sends it to
//! `+1` when `λ - φ` is near `0 (mod π)`, to `-1` when near `π/2 (mod π)`,
//! and rejects it when `λ - φ` falls inside one of the four shaky bands
//! centred on the odd multiples of `π/4`. The rejection therefore depends on
//! both `λ` and `φ` (unfair sampling). A separate setting-independent loss
//! models fair sampling.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::angle::Angle;
use crate::error::{Error, Result};

/// Full width of each shaky region, `π/13.39`.
pub const DEFAULT_SHAKY_WIDTH: f64 = PI / 13.39;
/// Standard deviation of `λ₂ − λ₁` for the realistic source, `π/16.80`.
pub const DEFAULT_MISALIGNMENT_SIGMA: f64 = PI / 16.80;
/// Standard deviation of the output polarization of a PBS `+1` channel, `π/9`.
pub const DEFAULT_COLLAPSE_SIGMA: f64 = PI / 9.0;

/// Shaky regions of neighbouring boundaries would overlap at this width.
pub const MAX_SHAKY_WIDTH: f64 = FRAC_PI_4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChannelOutcome {
    Plus,
    Minus,
    /// Channel `0`: the photon is not detected.
    Undetected,
}

impl ChannelOutcome {
    #[inline]
    pub fn is_detected(self) -> bool {
        !matches!(self, ChannelOutcome::Undetected)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhotonPair {
    pub lambda1: Angle,
    pub lambda2: Angle,
}

/// Orientation and shaky-region width of one polarizing beamsplitter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyzerSpec {
    phi: Angle,
    shaky_width: f64,
}

impl AnalyzerSpec {
    pub fn new(phi: Angle, shaky_width: f64) -> Result<Self> {
        check_shaky_width(shaky_width)?;
        Ok(AnalyzerSpec { phi, shaky_width })
    }

    pub fn phi(&self) -> Angle {
        self.phi
    }

    pub fn shaky_width(&self) -> f64 {
        self.shaky_width
    }

    pub fn rotated_to(&self, phi: Angle) -> Self {
        AnalyzerSpec { phi, ..*self }
    }
}

fn check_shaky_width(w: f64) -> Result<()> {
    if !(w.is_finite() && (0.0..MAX_SHAKY_WIDTH).contains(&w)) {
        return Err(Error::invalid(
            "shaky_width",
            format!("{w} is outside [0, π/4)"),
        ));
    }
    Ok(())
}

fn check_sigma(name: &'static str, sigma: f64) -> Result<()> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::invalid(name, format!("{sigma} must be a finite value >= 0")));
    }
    Ok(())
}

fn check_probability(name: &'static str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(name, format!("{p} is outside [0, 1]")));
    }
    Ok(())
}

/// Parameters of the detection model.
///
/// `fair_loss_prob = 0` is the pure unfair-sampling model. `shaky_width = 0`
/// with `fair_loss_prob > 0` is the fair-sampling control.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub shaky_width: f64,
    /// Per-photon probability of a loss that ignores `λ` and `φ`.
    pub fair_loss_prob: f64,
    pub misalignment_sigma: f64,
    pub collapse_sigma: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            shaky_width: DEFAULT_SHAKY_WIDTH,
            fair_loss_prob: 0.0,
            misalignment_sigma: DEFAULT_MISALIGNMENT_SIGMA,
            collapse_sigma: DEFAULT_COLLAPSE_SIGMA,
        }
    }
}

impl ModelParams {
    /// Both photons of a pair share exactly the same polarization.
    pub fn sharp() -> Self {
        ModelParams {
            misalignment_sigma: 0.0,
            ..Default::default()
        }
    }

    /// No shaky regions, exact pair alignment and a 10% fair loss per photon.
    pub fn fair_baseline() -> Self {
        ModelParams {
            shaky_width: 0.0,
            fair_loss_prob: 0.1,
            misalignment_sigma: 0.0,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_shaky_width(self.shaky_width)?;
        check_probability("fair_loss_prob", self.fair_loss_prob)?;
        check_sigma("misalignment_sigma", self.misalignment_sigma)?;
        check_sigma("collapse_sigma", self.collapse_sigma)
    }

    pub fn analyzer(&self, phi: Angle) -> AnalyzerSpec {
        AnalyzerSpec {
            phi,
            shaky_width: self.shaky_width,
        }
    }

    pub fn entangled_source(&self) -> SourceSpec {
        SourceSpec::EntangledUniform {
            misalignment_sigma: self.misalignment_sigma,
        }
    }

    pub fn controlled_source(&self, theta: Angle) -> SourceSpec {
        SourceSpec::Controlled {
            theta,
            collapse_sigma: self.collapse_sigma,
        }
    }
}

/// Polarization distribution of emitted pairs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SourceSpec {
    /// Rotationally invariant source: `λ₁` uniform, `λ₂ = λ₁ + N(0, σ)`.
    EntangledUniform { misalignment_sigma: f64 },
    /// Pairs that both left the `+1` channel of control PBSs at `theta`,
    /// each re-polarized independently around `theta`.
    Controlled { theta: Angle, collapse_sigma: f64 },
}

impl SourceSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SourceSpec::EntangledUniform { misalignment_sigma } => {
                check_sigma("misalignment_sigma", misalignment_sigma)
            }
            SourceSpec::Controlled { collapse_sigma, .. } => {
                check_sigma("collapse_sigma", collapse_sigma)
            }
        }
    }

    pub fn sample_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> PhotonPair {
        match *self {
            SourceSpec::EntangledUniform { misalignment_sigma } => {
                let lambda1 = Angle::new(rng.random::<f64>() * TAU);
                let lambda2 = wrapped_normal(lambda1, misalignment_sigma, rng);
                PhotonPair { lambda1, lambda2 }
            }
            SourceSpec::Controlled {
                theta,
                collapse_sigma,
            } => PhotonPair {
                lambda1: wrapped_normal(theta, collapse_sigma, rng),
                lambda2: wrapped_normal(theta, collapse_sigma, rng),
            },
        }
    }
}

/// Draws `center + N(0, sigma)` wrapped onto the circle.
pub fn wrapped_normal<R: Rng + ?Sized>(center: Angle, sigma: f64, rng: &mut R) -> Angle {
    if sigma == 0.0 {
        return center;
    }
    let z: f64 = rng.sample(StandardNormal);
    center.rotated(sigma * z)
}

/// Deterministic PBS detection pattern.
///
/// A photon is rejected when `λ - φ` lies strictly within `w/2` of an odd
/// multiple of `π/4`; a photon exactly on the band edge is detected.
pub fn classify(lambda: Angle, analyzer: &AnalyzerSpec) -> ChannelOutcome {
    // Polarization has period π.
    let x = (lambda.radians() - analyzer.phi.radians()).rem_euclid(PI);
    let to_band = (x - FRAC_PI_4).abs().min((x - 3.0 * FRAC_PI_4).abs());
    if to_band < 0.5 * analyzer.shaky_width {
        ChannelOutcome::Undetected
    } else if !(FRAC_PI_4..=3.0 * FRAC_PI_4).contains(&x) {
        ChannelOutcome::Plus
    } else {
        ChannelOutcome::Minus
    }
}

/// Passes a photon through a control PBS, keeping only its `+1` output.
///
/// A kept photon leaves re-polarized around the PBS axis with standard
/// deviation `collapse_sigma`, independent of its input polarization.
pub fn collapse_plus_channel<R: Rng + ?Sized>(
    lambda_in: Angle,
    control: &AnalyzerSpec,
    collapse_sigma: f64,
    rng: &mut R,
) -> Option<Angle> {
    match classify(lambda_in, control) {
        ChannelOutcome::Plus => Some(wrapped_normal(control.phi, collapse_sigma, rng)),
        _ => None,
    }
}

/// Setting-independent loss applied after [`classify`].
pub fn apply_fair_loss<R: Rng + ?Sized>(
    outcome: ChannelOutcome,
    fair_loss_prob: f64,
    rng: &mut R,
) -> ChannelOutcome {
    if fair_loss_prob > 0.0 && rng.random::<f64>() < fair_loss_prob {
        ChannelOutcome::Undetected
    } else {
        outcome
    }
}

/// Probability that a uniformly polarized photon is rejected by the shaky
/// regions alone.
pub fn uniform_rejection_probability(shaky_width: f64) -> f64 {
    2.0 * shaky_width / PI
}

/// Half-width of each `±1` zone around its centre.
pub(crate) fn channel_half_width(shaky_width: f64) -> f64 {
    FRAC_PI_4 - 0.5 * shaky_width
}

/// Centre offsets (relative to `φ`) and half-widths of the arcs that make
/// up one outcome zone over a full turn.
pub(crate) fn zone_arcs(outcome: ChannelOutcome, shaky_width: f64) -> Vec<(f64, f64)> {
    let half = channel_half_width(shaky_width);
    match outcome {
        ChannelOutcome::Plus => vec![(0.0, half), (PI, half)],
        ChannelOutcome::Minus => vec![(FRAC_PI_2, half), (FRAC_PI_2 + PI, half)],
        ChannelOutcome::Undetected => (0..4)
            .map(|k| (FRAC_PI_4 + k as f64 * FRAC_PI_2, 0.5 * shaky_width))
            .collect(),
    }
}
