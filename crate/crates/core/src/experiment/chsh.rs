use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};

use super::counts::{correlation, run_point, CoincidenceCounts};
use super::sweep::{map_points, RunSettings};
use crate::angle::Angle;
use crate::error::{Error, Result};

/// Analyzer orientations for a CHSH evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChshAngles {
    pub a: Angle,
    pub a_prime: Angle,
    pub b: Angle,
    pub b_prime: Angle,
}

impl Default for ChshAngles {
    /// `a = 0, a' = π/4, b = π/8, b' = 3π/8`, optimal for a `cos 2Δφ` curve.
    fn default() -> Self {
        ChshAngles {
            a: Angle::ZERO,
            a_prime: Angle::new(FRAC_PI_4),
            b: Angle::new(FRAC_PI_8),
            b_prime: Angle::new(3.0 * FRAC_PI_8),
        }
    }
}

impl ChshAngles {
    pub fn from_array(v: [f64; 4]) -> Self {
        ChshAngles {
            a: Angle::new(v[0]),
            a_prime: Angle::new(v[1]),
            b: Angle::new(v[2]),
            b_prime: Angle::new(v[3]),
        }
    }

    /// `(a,b), (a,b'), (a',b), (a',b')`.
    pub fn pairs(&self) -> [(Angle, Angle); 4] {
        [
            (self.a, self.b),
            (self.a, self.b_prime),
            (self.a_prime, self.b),
            (self.a_prime, self.b_prime),
        ]
    }
}

/// Labels of the four setting pairs, in [`ChshAngles::pairs`] order.
pub const PAIR_LABELS: [&str; 4] = ["a/b", "a/b'", "a'/b", "a'/b'"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChshResult {
    pub settings: [(Angle, Angle); 4],
    pub e_values: [f64; 4],
    pub stderrs: [f64; 4],
    pub counts: [CoincidenceCounts; 4],
    pub s_value: f64,
    pub s_stderr: f64,
}

/// `S = |E(a,b) − E(a,b')| + |E(a',b) + E(a',b')|`.
pub fn chsh_value(e: [f64; 4]) -> f64 {
    (e[0] - e[1]).abs() + (e[2] + e[3]).abs()
}

pub fn chsh(settings: &RunSettings, angles: &ChshAngles) -> Result<ChshResult> {
    settings.params.validate()?;
    if settings.n_per_point == 0 {
        return Err(Error::invalid("n_per_point", "must be at least 1"));
    }
    if angles.a == angles.a_prime || angles.b == angles.b_prime {
        return Err(Error::invalid(
            "angle_set",
            "a and a' (and b and b') must differ to give four distinct setting pairs",
        ));
    }
    let p = settings.params;
    let source = p.entangled_source();
    let pairs = angles.pairs();
    let per_pair = map_points(settings.seed, settings.workers, 4, |i, rng| {
        let (phi_a, phi_b) = pairs[i];
        let counts = run_point(
            &source,
            &p.analyzer(phi_a),
            &p.analyzer(phi_b),
            &p,
            settings.n_per_point,
            rng,
        );
        Ok((correlation(&counts)?, counts.correlation_stderr()?, counts))
    })?;
    let e_values = [0, 1, 2, 3].map(|i| per_pair[i].0);
    let stderrs = [0, 1, 2, 3].map(|i| per_pair[i].1);
    Ok(ChshResult {
        settings: pairs,
        e_values,
        stderrs,
        counts: [0, 1, 2, 3].map(|i| per_pair[i].2),
        s_value: chsh_value(e_values),
        s_stderr: stderrs.iter().map(|s| s * s).sum::<f64>().sqrt(),
    })
}
