//! Deterministic evaluation of the detection model.
//!
//! For the rotationally invariant source the integral over `λ₁` is done
//! exactly: for a fixed offset `x = λ₂ − λ₁` the set of `λ₁` giving each
//! outcome pair is a union of arcs, so its measure is a sum of arc overlaps.
//! What remains is a one-dimensional integral of that piecewise-linear
//! overlap against the misalignment density, taken with a midpoint rule.
//! For the controlled source both photons are independent wrapped normals
//! and the outcome masses come straight from the normal CDF.
//!
//! Fair loss enters analytically: a detected pair survives with `(1 − p)²`.

use serde::{Deserialize, Serialize};
use libm::erfc;
use std::f64::consts::{FRAC_PI_2, PI, SQRT_2, TAU};

use crate::angle::Angle;
use crate::error::{Error, Result};
use crate::experiment::{ActiveNormalization, SweepKind, SweepPoint, SweepSeries};
use crate::model::{channel_half_width, classify, zone_arcs, AnalyzerSpec, ChannelOutcome, ModelParams, SourceSpec};

pub const DEFAULT_QUADRATURE_NODES: usize = 4096;
pub const MIN_QUADRATURE_NODES: usize = 256;
/// Largest change of any cell allowed when the node count is doubled.
pub const CONVERGENCE_TOL: f64 = 1e-6;
/// Gaussian integration window in standard deviations; the mass outside is
/// about 1.4e-13.
const GAUSS_HALF_WIDTH: f64 = 7.4;

const OUTCOMES: [ChannelOutcome; 3] = [
    ChannelOutcome::Plus,
    ChannelOutcome::Minus,
    ChannelOutcome::Undetected,
];

/// The five observable cells of a coincidence measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cell {
    PlusPlus,
    PlusMinus,
    MinusPlus,
    MinusMinus,
    Rejected,
}

impl Cell {
    pub const ALL: [Cell; 5] = [
        Cell::PlusPlus,
        Cell::PlusMinus,
        Cell::MinusPlus,
        Cell::MinusMinus,
        Cell::Rejected,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Cell::PlusPlus => "++",
            Cell::PlusMinus => "+-",
            Cell::MinusPlus => "-+",
            Cell::MinusMinus => "--",
            Cell::Rejected => "rejected",
        }
    }
}

/// Exact outcome probabilities for one pair of settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleDistribution {
    pub p_pp: f64,
    pub p_pm: f64,
    pub p_mp: f64,
    pub p_mm: f64,
    pub p_rejected: f64,
    pub phi_a: Angle,
    pub phi_b: Angle,
    pub params: ModelParams,
    pub quadrature_nodes: usize,
}

impl OracleDistribution {
    pub fn cell(&self, cell: Cell) -> f64 {
        match cell {
            Cell::PlusPlus => self.p_pp,
            Cell::PlusMinus => self.p_pm,
            Cell::MinusPlus => self.p_mp,
            Cell::MinusMinus => self.p_mm,
            Cell::Rejected => self.p_rejected,
        }
    }

    pub fn total(&self) -> f64 {
        self.p_pp + self.p_pm + self.p_mp + self.p_mm + self.p_rejected
    }

    pub fn p_detected(&self) -> f64 {
        self.p_pp + self.p_pm + self.p_mp + self.p_mm
    }

    pub fn correlation(&self) -> Result<f64> {
        let d = self.p_detected();
        if d <= 0.0 {
            return Err(Error::DegenerateInput(
                "no pair is ever detected at these settings".to_string(),
            ));
        }
        Ok((self.p_pp - self.p_pm - self.p_mp + self.p_mm) / d)
    }
}

/// 3×3 outcome matrix before fair loss, indexed like [`OUTCOMES`].
type Geometric = [[f64; 3]; 3];

/// Length of the intersection of two arcs given by centre and half-width.
fn arc_overlap(c1: f64, h1: f64, c2: f64, h2: f64) -> f64 {
    // Zone arcs are at most π/2 long, so only the short way round can overlap.
    let d = Angle::new(c2).signed_diff(Angle::new(c1));
    let lo = (-h1).max(d - h2);
    let hi = h1.min(d + h2);
    (hi - lo).max(0.0)
}

/// Measure of `{λ : A(λ) = a, B(λ + x) = b}` over a full turn, for all nine
/// outcome pairs.
fn overlap_matrix(phi_a: f64, phi_b: f64, w: f64, x: f64) -> Geometric {
    let mut g = [[0.0; 3]; 3];
    for (i, &a) in OUTCOMES.iter().enumerate() {
        for (j, &b) in OUTCOMES.iter().enumerate() {
            let mut len = 0.0;
            for &(ca, ha) in &zone_arcs(a, w) {
                for &(cb, hb) in &zone_arcs(b, w) {
                    len += arc_overlap(phi_a + ca, ha, phi_b + cb - x, hb);
                }
            }
            g[i][j] = len;
        }
    }
    g
}

fn uniform_geometric(phi_a: f64, phi_b: f64, w: f64, sigma: f64, nodes: usize) -> Geometric {
    if sigma == 0.0 {
        return overlap_matrix(phi_a, phi_b, w, 0.0).map(|row| row.map(|v| v / TAU));
    }
    let half = GAUSS_HALF_WIDTH * sigma;
    let h = 2.0 * half / nodes as f64;
    let mut acc = [[0.0; 3]; 3];
    let mut weight_sum = 0.0;
    for k in 0..nodes {
        let x = -half + (k as f64 + 0.5) * h;
        let wgt = (-0.5 * (x / sigma).powi(2)).exp();
        weight_sum += wgt;
        let g = overlap_matrix(phi_a, phi_b, w, x);
        for i in 0..3 {
            for j in 0..3 {
                acc[i][j] += wgt * g[i][j];
            }
        }
    }
    acc.map(|row| row.map(|v| v / (weight_sum * TAU)))
}

/// Standard normal mass on `[lo, hi]`, accurate in both tails.
fn normal_interval_mass(lo: f64, hi: f64) -> f64 {
    let upper = |z: f64| 0.5 * erfc(z / SQRT_2);
    if lo >= 0.0 {
        upper(lo) - upper(hi)
    } else if hi <= 0.0 {
        upper(-hi) - upper(-lo)
    } else {
        1.0 - upper(-lo) - upper(hi)
    }
}

/// Mass a wrapped normal `(center, sigma)` puts on the arc of half-width
/// `half` around `arc_center`, summing wrapping terms until the remainder is
/// negligible.
pub fn wrapped_normal_arc_mass(center: f64, sigma: f64, arc_center: f64, half: f64) -> f64 {
    debug_assert!(sigma > 0.0);
    let s = Angle::new(arc_center).signed_diff(Angle::new(center));
    let reach = ((GAUSS_HALF_WIDTH * sigma + PI) / TAU).ceil() as i64 + 1;
    (-reach..=reach)
        .map(|k| {
            let shift = s + TAU * k as f64;
            normal_interval_mass((shift - half) / sigma, (shift + half) / sigma)
        })
        .sum()
}

/// Outcome masses of a single photon drawn from a wrapped normal.
fn photon_masses(center: Angle, sigma: f64, analyzer: &AnalyzerSpec) -> [f64; 3] {
    if sigma == 0.0 {
        let hit = classify(center, analyzer);
        return OUTCOMES.map(|o| if o == hit { 1.0 } else { 0.0 });
    }
    OUTCOMES.map(|o| {
        zone_arcs(o, analyzer.shaky_width())
            .iter()
            .map(|&(c, h)| wrapped_normal_arc_mass(center.radians(), sigma, analyzer.phi().radians() + c, h))
            .sum()
    })
}

fn controlled_geometric(theta: Angle, sigma: f64, a: &AnalyzerSpec, b: &AnalyzerSpec) -> Geometric {
    let ma = photon_masses(theta, sigma, a);
    let mb = photon_masses(theta, sigma, b);
    let mut g = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            g[i][j] = ma[i] * mb[j];
        }
    }
    g
}

fn fold_fair_loss(g: &Geometric, fair_loss_prob: f64) -> [f64; 5] {
    let keep = (1.0 - fair_loss_prob).powi(2);
    let detected = g[0][0] + g[0][1] + g[1][0] + g[1][1];
    let geometric_rejected = g[2].iter().sum::<f64>() + g[0][2] + g[1][2];
    [
        g[0][0] * keep,
        g[0][1] * keep,
        g[1][0] * keep,
        g[1][1] * keep,
        geometric_rejected + detected * (1.0 - keep),
    ]
}

fn geometric(
    source: &SourceSpec,
    phi_a: Angle,
    phi_b: Angle,
    w: f64,
    nodes: usize,
) -> Result<Geometric> {
    Ok(match *source {
        SourceSpec::EntangledUniform { misalignment_sigma } => {
            uniform_geometric(phi_a.radians(), phi_b.radians(), w, misalignment_sigma, nodes)
        }
        SourceSpec::Controlled {
            theta,
            collapse_sigma,
        } => controlled_geometric(
            theta,
            collapse_sigma,
            &AnalyzerSpec::new(phi_a, w)?,
            &AnalyzerSpec::new(phi_b, w)?,
        ),
    })
}

pub fn joint_probabilities(
    source: &SourceSpec,
    phi_a: Angle,
    phi_b: Angle,
    params: &ModelParams,
) -> Result<OracleDistribution> {
    joint_probabilities_with_nodes(source, phi_a, phi_b, params, DEFAULT_QUADRATURE_NODES)
}

/// Outcome probabilities with photon 1 at analyzer A and photon 2 at B.
///
/// Fails with [`Error::ConvergenceFailure`] when doubling `nodes` moves any
/// cell by more than [`CONVERGENCE_TOL`].
pub fn joint_probabilities_with_nodes(
    source: &SourceSpec,
    phi_a: Angle,
    phi_b: Angle,
    params: &ModelParams,
    nodes: usize,
) -> Result<OracleDistribution> {
    params.validate()?;
    source.validate()?;
    if nodes < MIN_QUADRATURE_NODES {
        return Err(Error::invalid(
            "quadrature_nodes",
            format!("{nodes} is below the minimum of {MIN_QUADRATURE_NODES}"),
        ));
    }
    let w = params.shaky_width;
    let cells = fold_fair_loss(&geometric(source, phi_a, phi_b, w, nodes)?, params.fair_loss_prob);
    if needs_quadrature(source) {
        let finer = fold_fair_loss(
            &geometric(source, phi_a, phi_b, w, 2 * nodes)?,
            params.fair_loss_prob,
        );
        if let Some((i, delta)) = cells
            .iter()
            .zip(&finer)
            .map(|(a, b)| (a - b).abs())
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1))
        {
            if delta > CONVERGENCE_TOL {
                return Err(Error::ConvergenceFailure {
                    cell: Cell::ALL[i].name(),
                    delta,
                });
            }
        }
    }
    Ok(OracleDistribution {
        p_pp: cells[0],
        p_pm: cells[1],
        p_mp: cells[2],
        p_mm: cells[3],
        p_rejected: cells[4],
        phi_a,
        phi_b,
        params: *params,
        quadrature_nodes: nodes,
    })
}

fn needs_quadrature(source: &SourceSpec) -> bool {
    matches!(source, SourceSpec::EntangledUniform { misalignment_sigma } if *misalignment_sigma > 0.0)
}

/// Closed form for identically polarized pairs, as a function of `Δφ`.
///
/// Each `±1` zone is an arc of length `2q = π/2 − w` per half turn. Two such
/// arcs with centres `d` apart overlap over `max(0, 2q − d)`, which gives
/// `p++ = p−− = max(0, 2q − d₀)/π` and `p+− = p−+ = max(0, 2q − d₁)/π` with
/// `d₀`, `d₁` the distances from `Δφ` and `Δφ + π/2` to the nearest multiple
/// of `π`. Returns cells in [`Cell::ALL`] order, without fair loss.
pub fn sharp_pair_closed_form(delta_phi: f64, shaky_width: f64) -> [f64; 5] {
    let dist_to_pi_multiple = |x: f64| {
        let r = x.rem_euclid(PI);
        r.min(PI - r)
    };
    let span = 2.0 * channel_half_width(shaky_width);
    let same = (span - dist_to_pi_multiple(delta_phi)).max(0.0) / PI;
    let crossed = (span - dist_to_pi_multiple(delta_phi + FRAC_PI_2)).max(0.0) / PI;
    [same, crossed, crossed, same, 1.0 - 2.0 * (same + crossed)]
}

/// Rejected-pair probability for identically polarized pairs: one photon's
/// bands plus the other's, minus their overlap.
pub fn sharp_pair_rejection(delta_phi: f64, shaky_width: f64) -> f64 {
    let r = delta_phi.rem_euclid(FRAC_PI_2);
    let d = r.min(FRAC_PI_2 - r);
    2.0 / PI * (2.0 * shaky_width - (shaky_width - d).max(0.0))
}

fn reference_point(setting: Angle, value: f64) -> SweepPoint {
    SweepPoint {
        setting,
        value,
        stderr: 0.0,
        n_events: 0,
        n_trials: 0,
        n_entered: 0,
    }
}

/// Noise-free counterpart of the Monte Carlo sweeps.
///
/// `theta` is the control PBS angle for the active and Malus sweeps and is
/// ignored otherwise. Active rates use the control-survivor normalization.
pub fn expected_sweep(
    kind: SweepKind,
    grid: &[Angle],
    params: &ModelParams,
    theta: Angle,
) -> Result<SweepSeries> {
    let points = match kind {
        SweepKind::CorrelationVsDelta => grid
            .iter()
            .map(|&g| {
                let d = joint_probabilities(&params.entangled_source(), Angle::ZERO, g, params)?;
                Ok(reference_point(g, d.correlation()?))
            })
            .collect::<Result<Vec<_>>>()?,
        SweepKind::PassiveRate => grid
            .iter()
            .map(|&g| {
                let d = joint_probabilities(&params.entangled_source(), Angle::ZERO, g, params)?;
                Ok(reference_point(g, d.p_detected()))
            })
            .collect::<Result<Vec<_>>>()?,
        SweepKind::ActiveRate => grid
            .iter()
            .map(|&g| {
                let rate = expected_active_rate(theta, g, params, ActiveNormalization::ControlSurvivors)?;
                Ok(reference_point(g, rate))
            })
            .collect::<Result<Vec<_>>>()?,
        SweepKind::MalusTransmission => grid
            .iter()
            .map(|&chi| Ok(reference_point(chi, expected_malus_plus_fraction(theta, chi, params)?)))
            .collect::<Result<Vec<_>>>()?,
    };
    Ok(SweepSeries {
        kind,
        points,
        params: *params,
        n_per_point: 0,
        seed: 0,
    })
}

/// Detected-pair fraction of the active test at measurement angle `phi`.
///
/// After the control stage both photons are independent wrapped normals
/// around `theta`, whatever the input pair was.
pub fn expected_active_rate(
    theta: Angle,
    phi: Angle,
    params: &ModelParams,
    normalization: ActiveNormalization,
) -> Result<f64> {
    let measured = joint_probabilities(&params.controlled_source(theta), phi, phi, params)?;
    let rate = measured.p_detected();
    Ok(match normalization {
        ActiveNormalization::ControlSurvivors => rate,
        ActiveNormalization::Emitted => {
            let control_only = ModelParams {
                fair_loss_prob: 0.0,
                ..*params
            };
            let passed = joint_probabilities(&params.entangled_source(), theta, theta, &control_only)?;
            rate * passed.p_pp
        }
    })
}

/// Fraction of detected photons leaving `+1` at `theta + chi` after a
/// control PBS at `theta`.
pub fn expected_malus_plus_fraction(theta: Angle, chi: Angle, params: &ModelParams) -> Result<f64> {
    params.validate()?;
    let analyzer = AnalyzerSpec::new(theta.rotated(chi.radians()), params.shaky_width)?;
    let m = photon_masses(theta, params.collapse_sigma, &analyzer);
    let detected = m[0] + m[1];
    if detected <= 0.0 {
        return Err(Error::DegenerateInput(
            "the analyzer rejects every collapsed photon".to_string(),
        ));
    }
    Ok(m[0] / detected)
}

/// Largest `|oracle Plus-fraction − cos²χ|` over `chi_grid`.
pub fn malus_deviation_envelope(theta: Angle, chi_grid: &[Angle], params: &ModelParams) -> Result<f64> {
    chi_grid.iter().try_fold(0.0f64, |acc, &chi| {
        let f = expected_malus_plus_fraction(theta, chi, params)?;
        Ok(acc.max((f - chi.radians().cos().powi(2)).abs()))
    })
}

/// Probability that one photon from a wrapped normal around `center` is
/// rejected by the shaky regions of `analyzer`.
pub fn photon_rejection(center: Angle, sigma: f64, analyzer: &AnalyzerSpec) -> f64 {
    photon_masses(center, sigma, analyzer)[2]
}
