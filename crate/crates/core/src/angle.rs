use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

/// An angle in radians, stored normalized to `[0, 2π)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(into = "f64", from = "f64")]
pub struct Angle(f64);

impl Angle {
    pub const ZERO: Angle = Angle(0.0);

    pub fn new(radians: f64) -> Self {
        Angle(normalize(radians))
    }

    #[inline]
    pub fn radians(self) -> f64 {
        self.0
    }

    /// Rotates by `delta` radians.
    #[inline]
    pub fn rotated(self, delta: f64) -> Self {
        Angle::new(self.0 + delta)
    }

    /// Signed difference `self - other` reduced to `[-π, π)`.
    pub fn signed_diff(self, other: Angle) -> f64 {
        let d = normalize(self.0 - other.0);
        if d >= std::f64::consts::PI {
            d - TAU
        } else {
            d
        }
    }
}

/// Reduces `x` to `[0, 2π)`.
#[inline]
pub fn normalize(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    // rem_euclid rounds tiny negative inputs up to exactly 2π.
    if r >= TAU {
        0.0
    } else {
        r
    }
}

impl From<f64> for Angle {
    fn from(radians: f64) -> Self {
        Angle::new(radians)
    }
}

impl From<Angle> for f64 {
    fn from(a: Angle) -> f64 {
        a.0
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn negative_and_large_inputs_wrap() {
        assert_eq!(Angle::new(-PI / 2.0).radians(), 1.5 * PI);
        assert!((Angle::new(5.0 * PI).radians() - PI).abs() < 1e-12);
        assert_eq!(Angle::new(TAU).radians(), 0.0);
        assert_eq!(Angle::new(-1e-300).radians(), 0.0);
    }

    #[test]
    fn signed_diff_is_short_way_round() {
        let a = Angle::new(0.1);
        let b = Angle::new(TAU - 0.1);
        assert!((a.signed_diff(b) - 0.2).abs() < 1e-12);
        assert!((b.signed_diff(a) + 0.2).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn normalization_is_idempotent(x in -1e6f64..1e6) {
            let once = Angle::new(x);
            prop_assert!(once.radians() >= 0.0 && once.radians() < TAU);
            prop_assert_eq!(Angle::new(once.radians()), once);
        }
    }
}
