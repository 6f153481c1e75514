//! Estimators applied to finished sweeps.

use nalgebra::{DMatrix, DVector};
use std::f64::consts::{PI, TAU};

use crate::angle::Angle;
use crate::error::{Error, Result};
use crate::experiment::{SweepKind, SweepSeries};

/// Least-squares amplitude `A` of `A·cos 2Δφ` fitted to a correlation curve.
///
/// A constant non-zero series has no cosine component to speak of and is
/// reported as a fit failure; an all-zero series fits `A = 0`.
pub fn visibility_fit(series: &SweepSeries) -> Result<f64> {
    if series.kind != SweepKind::CorrelationVsDelta {
        return Err(Error::invalid(
            "series",
            format!("visibility needs a correlation series, got {:?}", series.kind),
        ));
    }
    if series.points.len() < 8 {
        return Err(Error::invalid(
            "series",
            format!("visibility needs at least 8 points, got {}", series.points.len()),
        ));
    }
    let first = series.points[0].value;
    if first != 0.0 && series.points.iter().all(|p| p.value == first) {
        return Err(Error::FitFailure(format!(
            "all correlation values equal {first}; no cosine to fit"
        )));
    }
    let (mut num, mut den) = (0.0, 0.0);
    for p in &series.points {
        let c = (2.0 * p.setting.radians()).cos();
        num += p.value * c;
        den += c * c;
    }
    if den < 1e-12 {
        return Err(Error::FitFailure(
            "settings give cos 2Δφ ≈ 0 everywhere".to_string(),
        ));
    }
    Ok(num / den)
}

/// `(max − min) / (max + min)` over the values.
pub fn contrast(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if values.is_empty() || max + min == 0.0 {
        return 0.0;
    }
    (max - min) / (max + min)
}

pub fn series_contrast(series: &SweepSeries) -> f64 {
    contrast(&series.values())
}

/// Index of the grid point closest to `target` (plain distance, no wrapping).
pub fn nearest_index(settings: &[f64], target: f64) -> Option<usize> {
    settings
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - target).abs().total_cmp(&(b.1 - target).abs()))
        .map(|(i, _)| i)
}

/// Fits `c₀ + Σₖ aₖ cos(kωφ) + bₖ sin(kωφ)` with `ω = 2π / period` and
/// returns the minima of the fitted curve that fall inside the sweep range.
///
/// The fitted curve has exactly the sweep's period, so there is one minimum
/// per period. Locating it on the fit rather than on the raw points keeps
/// point-to-point Monte Carlo noise from moving it.
pub fn harmonic_minima(series: &SweepSeries, period: f64, harmonics: usize) -> Result<Vec<Angle>> {
    let xs = series.settings();
    let ys = series.values();
    let n_coef = 1 + 2 * harmonics;
    if xs.len() < n_coef + 1 {
        return Err(Error::invalid(
            "series",
            format!("{} points cannot support {harmonics} harmonics", xs.len()),
        ));
    }
    let omega = TAU / period;
    let basis = |x: f64, j: usize| -> f64 {
        match j {
            0 => 1.0,
            j if j % 2 == 1 => (j.div_ceil(2) as f64 * omega * x).cos(),
            j => ((j / 2) as f64 * omega * x).sin(),
        }
    };
    let design = DMatrix::from_fn(xs.len(), n_coef, |r, c| basis(xs[r], c));
    let coef = design
        .svd(true, true)
        .solve(&DVector::from_vec(ys), 1e-12)
        .map_err(|e| Error::FitFailure(e.to_string()))?;
    let fitted = |x: f64| (0..n_coef).map(|j| coef[j] * basis(x, j)).sum::<f64>();

    let mesh = 8192;
    let (x_min, _) = (0..mesh)
        .map(|i| {
            let x = period * i as f64 / mesh as f64;
            (x, fitted(x))
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("mesh is non-empty");

    let lo = xs[0];
    let hi = xs[xs.len() - 1];
    let mut k = ((lo - x_min) / period).ceil();
    let mut minima = Vec::new();
    while x_min + k * period <= hi {
        minima.push(Angle::new(x_min + k * period));
        k += 1.0;
    }
    Ok(minima)
}

/// `cos 2Δφ`.
pub fn cosine_reference(delta_phi: f64) -> f64 {
    (2.0 * delta_phi).cos()
}

/// Saw-tooth correlation of the pattern without shaky regions:
/// `1 − 4d/π` where `d` is the distance from `Δφ` to the nearest multiple of `π`.
pub fn sawtooth_reference(delta_phi: f64) -> f64 {
    let r = delta_phi.rem_euclid(PI);
    let d = r.min(PI - r);
    1.0 - 4.0 * d / PI
}
