use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI};

use bellsim::analysis::{contrast, harmonic_minima, nearest_index};
use bellsim::compare::{compare_with_oracle, random_configurations};
use bellsim::experiment::{chsh_value, run_point, uniform_grid, SweepKind};
use bellsim::model::{uniform_rejection_probability, ModelParams, DEFAULT_SHAKY_WIDTH};
use bellsim::oracle::{
    expected_sweep, joint_probabilities, joint_probabilities_with_nodes, malus_deviation_envelope,
    sharp_pair_closed_form, sharp_pair_rejection, Cell, DEFAULT_QUADRATURE_NODES,
};
use bellsim::rng::stream_rng;
use bellsim::Angle;

// Reference values from an independent brute-force evaluation (2^15 λ
// nodes × 2001 misalignment nodes, direct classification of every node),
// accurate to about 1e-4.
const REF_S_STANDARD_ANGLES: f64 = 2.72263;
const REF_VISIBILITY_60: f64 = 0.96702;
const REF_PASSIVE_CONTRAST_60: f64 = 0.04508;
const REF_ACTIVE_CONTRAST_60: f64 = 0.25264;
const REF_MALUS_ENVELOPE_60: f64 = 0.07629;

fn a(x: f64) -> Angle {
    Angle::new(x)
}

#[test]
fn probabilities_sum_to_one() {
    for c in random_configurations(50, 1) {
        let d = joint_probabilities(&c.source, c.phi_a, c.phi_b, &c.params).unwrap();
        assert!((d.total() - 1.0).abs() < 1e-10, "{c:?}: {}", d.total());
        for cell in Cell::ALL {
            assert!((-1e-12..=1.0 + 1e-12).contains(&d.cell(cell)));
        }
    }
}

#[test]
fn quadrature_converges_at_default_nodes() {
    for c in random_configurations(50, 2) {
        let base = joint_probabilities_with_nodes(&c.source, c.phi_a, c.phi_b, &c.params, DEFAULT_QUADRATURE_NODES)
            .unwrap();
        let fine =
            joint_probabilities_with_nodes(&c.source, c.phi_a, c.phi_b, &c.params, 2 * DEFAULT_QUADRATURE_NODES).unwrap();
        for cell in Cell::ALL {
            assert!((base.cell(cell) - fine.cell(cell)).abs() < 1e-6, "{c:?} {cell:?}");
        }
    }
}

#[test]
fn uniform_source_depends_only_on_relative_angle() {
    let p = ModelParams::default();
    let src = p.entangled_source();
    for (i, delta) in [0.0, 0.3, 1.1, 2.0].into_iter().enumerate() {
        let reference = joint_probabilities(&src, a(0.0), a(delta), &p).unwrap();
        for shift in [0.17, 1.3, 4.0 + i as f64] {
            let moved = joint_probabilities(&src, a(shift), a(shift + delta), &p).unwrap();
            for cell in Cell::ALL {
                assert!((reference.cell(cell) - moved.cell(cell)).abs() < 1e-8);
            }
        }
    }
}

#[test]
fn sharp_pairs_match_closed_form() {
    for w in [0.0, 0.1, DEFAULT_SHAKY_WIDTH, 0.7] {
        let p = ModelParams {
            shaky_width: w,
            misalignment_sigma: 0.0,
            ..Default::default()
        };
        for k in 0..=90 {
            let delta = k as f64 * PI / 90.0;
            let d = joint_probabilities(&p.entangled_source(), a(0.4), a(0.4 + delta), &p).unwrap();
            let closed = sharp_pair_closed_form(delta, w);
            for (cell, want) in Cell::ALL.into_iter().zip(closed) {
                assert!((d.cell(cell) - want).abs() < 1e-8, "w={w} Δφ={delta} {cell:?}");
            }
        }
    }
}

#[test]
fn ideal_pattern_is_perfectly_correlated() {
    let p = ModelParams {
        shaky_width: 0.0,
        misalignment_sigma: 0.0,
        fair_loss_prob: 0.0,
        ..Default::default()
    };
    let d = joint_probabilities(&p.entangled_source(), a(0.9), a(0.9), &p).unwrap();
    assert_eq!(d.p_pm, 0.0);
    assert_eq!(d.p_mp, 0.0);
    assert!(d.p_rejected.abs() < 1e-15);
    assert!((d.p_pp - 0.5).abs() < 1e-15);
}

#[test]
fn realistic_rejection_below_thirty_percent_everywhere() {
    let p = ModelParams::default();
    let worst = uniform_grid(181, 0.0, PI)
        .into_iter()
        .map(|g| joint_probabilities(&p.entangled_source(), Angle::ZERO, g, &p).unwrap().p_rejected)
        .fold(0.0, f64::max);
    assert!(worst < 0.30, "{worst}");
    // The bound is nearly tight: two disjoint sets of bands.
    assert!(worst > 0.29);
}

#[test]
fn sharp_rejection_is_minimal_for_parallel_analyzers() {
    let p = ModelParams::sharp();
    let w = p.shaky_width;
    let at_zero = joint_probabilities(&p.entangled_source(), a(0.0), a(0.0), &p).unwrap();
    assert!((at_zero.p_rejected - uniform_rejection_probability(w)).abs() < 1e-12);
    for k in 1..200 {
        let delta = k as f64 * PI / 200.0;
        let d = joint_probabilities(&p.entangled_source(), a(0.0), a(delta), &p).unwrap();
        assert!((d.p_rejected - sharp_pair_rejection(delta, w)).abs() < 1e-8);
        let off_axis = (delta - FRAC_PI_2).abs() > 1e-9;
        if off_axis {
            assert!(d.p_rejected > at_zero.p_rejected);
        }
    }
}

#[test]
fn fair_loss_folds_as_survival_squared() {
    let f = 0.1;
    let p = ModelParams {
        fair_loss_prob: f,
        ..Default::default()
    };
    let lossless = ModelParams { fair_loss_prob: 0.0, ..p };
    let src = p.entangled_source();
    let with = joint_probabilities(&src, a(0.0), a(0.5), &p).unwrap();
    let without = joint_probabilities(&src, a(0.0), a(0.5), &lossless).unwrap();
    assert!((with.p_pp - without.p_pp * 0.81).abs() < 1e-12);
    assert!((with.correlation().unwrap() - without.correlation().unwrap()).abs() < 1e-12);
}

#[test]
fn chsh_at_standard_angles_matches_reference() {
    let p = ModelParams::default();
    let src = p.entangled_source();
    let e = |x: f64, y: f64| joint_probabilities(&src, a(x), a(y), &p).unwrap().correlation().unwrap();
    let s = chsh_value([
        e(0.0, FRAC_PI_8),
        e(0.0, 3.0 * FRAC_PI_8),
        e(FRAC_PI_4, FRAC_PI_8),
        e(FRAC_PI_4, 3.0 * FRAC_PI_8),
    ]);
    assert!((s - REF_S_STANDARD_ANGLES).abs() < 2e-4, "{s}");
}

#[test]
fn expected_correlation_curve() {
    let p = ModelParams::default();
    let grid = uniform_grid(60, 0.0, PI);
    let s = expected_sweep(SweepKind::CorrelationVsDelta, &grid, &p, Angle::ZERO).unwrap();
    let vis = bellsim::analysis::visibility_fit(&s).unwrap();
    assert!((vis - REF_VISIBILITY_60).abs() < 2e-4, "{vis}");
    assert!((vis - 0.97).abs() < 0.02);
    assert!(s.points.iter().all(|p| p.stderr == 0.0));
}

#[test]
fn sharp_correlation_has_plateau_around_zero() {
    let p = ModelParams::sharp();
    let w = p.shaky_width;
    // E = +1 exactly for |Δφ| ≤ w, i.e. a plateau of width 2w.
    for k in 0..=20 {
        let delta = w * k as f64 / 20.0;
        for sign in [1.0, -1.0] {
            let d = joint_probabilities(&p.entangled_source(), a(0.0), a(sign * delta), &p).unwrap();
            assert!((d.correlation().unwrap() - 1.0).abs() < 1e-12);
        }
    }
    let past = joint_probabilities(&p.entangled_source(), a(0.0), a(1.1 * w), &p).unwrap();
    assert!(past.correlation().unwrap() < 1.0 - 1e-6);
}

#[test]
fn expected_passive_curves() {
    let grid = uniform_grid(60, 0.0, PI);
    let fair = expected_sweep(SweepKind::PassiveRate, &grid, &ModelParams::fair_baseline(), Angle::ZERO).unwrap();
    for p in &fair.points {
        assert!((p.value - 0.81).abs() < 1e-12);
    }
    let real = expected_sweep(SweepKind::PassiveRate, &grid, &ModelParams::default(), Angle::ZERO).unwrap();
    let c = contrast(&real.values());
    assert!((c - REF_PASSIVE_CONTRAST_60).abs() < 2e-4, "{c}");
}

#[test]
fn expected_active_curve_dips_at_diagonal() {
    let grid = uniform_grid(60, 0.0, PI);
    let s = expected_sweep(SweepKind::ActiveRate, &grid, &ModelParams::default(), Angle::ZERO).unwrap();
    let xs = s.settings();
    let values = s.values();
    let argmin_first = (0..30).min_by(|&i, &j| values[i].total_cmp(&values[j])).unwrap();
    let argmin_second = (30..60).min_by(|&i, &j| values[i].total_cmp(&values[j])).unwrap();
    assert_eq!(Some(argmin_first), nearest_index(&xs, FRAC_PI_4));
    assert_eq!(Some(argmin_second), nearest_index(&xs, 3.0 * FRAC_PI_4));
    let c = contrast(&values);
    assert!((c - REF_ACTIVE_CONTRAST_60).abs() < 2e-4, "{c}");

    let minima = harmonic_minima(&s, FRAC_PI_2, 3).unwrap();
    assert_eq!(minima.len(), 2);
    assert!((minima[0].radians() - FRAC_PI_4).abs() < 2e-3);
    assert!((minima[1].radians() - 3.0 * FRAC_PI_4).abs() < 2e-3);
}

#[test]
fn malus_envelope_matches_reference() {
    let grid = uniform_grid(60, 0.0, PI);
    let env = malus_deviation_envelope(Angle::ZERO, &grid, &ModelParams::default()).unwrap();
    assert!((env - REF_MALUS_ENVELOPE_60).abs() < 2e-4, "{env}");
    // Without shaky regions in the analyzing PBS the same collapse width
    // tracks cos²χ much more closely.
    let plain = ModelParams {
        shaky_width: 0.0,
        ..Default::default()
    };
    let env = malus_deviation_envelope(Angle::ZERO, &grid, &plain).unwrap();
    assert!(env < 0.03, "{env}");
}

#[test]
fn counts_match_oracle_cells_at_defaults() {
    let p = ModelParams::default();
    let src = p.entangled_source();
    let mut rng = stream_rng(200, 0);
    for delta in [0.0, 0.4, FRAC_PI_4, 1.2] {
        let counts = run_point(&src, &p.analyzer(a(0.0)), &p.analyzer(a(delta)), &p, 100_000, &mut rng);
        let d = joint_probabilities(&src, a(0.0), a(delta), &p).unwrap();
        for check in bellsim::compare::check_cells(0, &counts, &d) {
            assert!(check.within(3.0), "{check:?}");
        }
    }
}

#[test]
fn monte_carlo_agrees_with_oracle_on_random_configurations() {
    let configs = random_configurations(50, 3);
    let report = compare_with_oracle(&configs, 10_000, 4, 0).unwrap();
    for cell in Cell::ALL {
        let within = report
            .checks
            .iter()
            .filter(|c| c.cell == cell && c.within(3.0))
            .count();
        assert!(within >= 47, "{cell:?}: {within}/50");
    }
    assert!(report.passes());
}
