use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::curves::ParamCurve;
use crate::maps::{AffineMap, FramedShear, MapSequence, Quadratic1d, Region, SmoothMap};
use crate::{vector, Error, Matrix};

fn quadratic_seq(n: usize) -> MapSequence {
    MapSequence::repeat(Arc::new(Quadratic1d::new(0.5, 0.125, 0.0, 0.0, 1.0).unwrap()), n).unwrap()
}

fn quadratic_budget() -> HypothesisBudget {
    HypothesisBudget {
        c: Some(Constant::analytic(0.5)),
        l: Some(Constant::analytic(4.0)),
        ..Default::default()
    }
}

fn opts(samples: usize, resolution: usize) -> RunOptions {
    RunOptions {
        samples,
        resolution,
        ..Default::default()
    }
}

#[test]
fn bound_examples() {
    assert_eq!(bound_1d(0.0, 7.0), 1.0);
    assert!((bound_1d(1.0, 1.0) - 2.718282).abs() < 1e-6);
    assert!((bound_1d(0.5, 4.0) - 7.389056).abs() < 1e-6);
    assert_eq!(bound_curve(0.0, 3.0, 2.0), 1.0);
    assert!((bound_curve(1.0, 2.0, 1.0) - 20.0855).abs() < 1e-4);
    assert!((bound_curve(0.5, 4.0, 0.0) - 2.718282).abs() < 1e-6);
}

proptest! {
    #[test]
    fn bounds_monotone(c in 0.0f64..3.0, l in 0.0f64..5.0, a in 0.0f64..5.0, d in 0.0f64..1.0) {
        prop_assert!(bound_1d(c + d, l) >= bound_1d(c, l));
        prop_assert!(bound_1d(c, l + d) >= bound_1d(c, l));
        prop_assert!(bound_curve(c + d, l, a) >= bound_curve(c, l, a));
        prop_assert!(bound_curve(c, l + d, a) >= bound_curve(c, l, a));
        prop_assert!(bound_curve(c, l, a + d) >= bound_curve(c, l, a));
    }
}

#[test]
fn affine_1d_has_no_distortion() {
    let maps: Vec<Arc<dyn SmoothMap>> = (0..7)
        .map(|k| {
            Arc::new(AffineMap::new(Matrix::from_element(1, 1, -0.3 - 0.1 * k as f64), vector(&[0.2])).unwrap())
                as Arc<dyn SmoothMap>
        })
        .collect();
    let seq = MapSequence::new(maps).unwrap();
    let budget = HypothesisBudget {
        c: Some(Constant::analytic(0.0)),
        l: Some(Constant::analytic(10.0)),
        ..Default::default()
    };
    let rep = run_1d(&seq, (-1.0, 2.0), &opts(17, 8), &budget).unwrap();
    assert_eq!(rep.empirical, 0.0);
    assert_eq!(rep.verdict, Verdict::BoundHolds);
    let ratio = interval_ratio_1d(&seq, (-1.0, 2.0), (-1.0, 0.5), (0.0, 2.0), &opts(17, 8), &budget).unwrap();
    let check = ratio.ratio.unwrap();
    assert!((check.ratio - check.r).abs() < 1e-12);
    assert_eq!(ratio.verdict, Verdict::BoundHolds);
}

#[test]
fn single_quadratic_step() {
    let rep = run_1d(&quadratic_seq(1), (0.0, 1.0), &opts(2, 8), &quadratic_budget()).unwrap();
    assert!((rep.empirical - 1.5f64.ln()).abs() < 1e-15);
    assert_eq!(rep.profile.len(), 2);
    assert!((rep.profile[1].1 - (0.75f64 / 0.5).ln()).abs() < 1e-15);
}

#[test]
fn hundred_quadratic_steps() {
    let rep = run_1d(&quadratic_seq(100), (0.0, 1.0), &opts(1000, 8), &quadratic_budget()).unwrap();
    assert!(rep.empirical <= 2.0);
    assert_eq!(rep.verdict, Verdict::BoundHolds);
    assert!(rep.lemmas.passed);
    assert!((rep.measured_c.unwrap() - 0.5).abs() < 1e-9);
    assert!(rep.trace.sum_l <= 4.0);
    let sum: f64 = rep.trace.per_step.iter().map(|s| s.length).sum();
    assert!((sum - rep.trace.sum_l).abs() <= 1e-12);
}

#[test]
fn n_independence_1d() {
    let values: Vec<f64> = [1, 10, 100, 1000]
        .iter()
        .map(|&n| run_1d(&quadratic_seq(n), (0.0, 1.0), &opts(200, 8), &quadratic_budget()).unwrap().empirical)
        .collect();
    assert!(values.iter().all(|v| *v <= 2.0));
    assert!((values[3] - values[2]).abs() < 1e-6);
}

#[test]
fn stationary_reduces_to_classical() {
    // Iterating one map: the budget is L = sum of |f^j(I)|, exactly what the engine sums.
    let seq = quadratic_seq(30);
    let budget = HypothesisBudget {
        c: Some(Constant::analytic(0.5)),
        l: None,
        ..Default::default()
    };
    let rep = run_1d(&seq, (0.0, 1.0), &opts(65, 8), &budget).unwrap();
    let q = Quadratic1d::new(0.5, 0.125, 0.0, 0.0, 1.0).unwrap();
    let (mut lo, mut hi, mut total) = (0.0f64, 1.0f64, 0.0);
    for _ in 0..30 {
        total += hi - lo;
        lo = q.eval(&vector(&[lo]))[0];
        hi = q.eval(&vector(&[hi]))[0];
    }
    assert!((rep.trace.sum_l - total).abs() < 1e-15);
    assert!((rep.theoretical_log_k - 0.5 * total).abs() < 1e-15);
    assert_eq!(rep.budget.l.unwrap().provenance, crate::maps::Provenance::Measured);
    assert_eq!(rep.verdict, Verdict::BoundHolds);
}

#[test]
fn sign_change_is_a_hypothesis_failure() {
    let fold = Arc::new(Quadratic1d::new(-0.5, 1.0, 0.3, -1.0, 1.0).unwrap());
    let seq = MapSequence::repeat(fold, 3).unwrap();
    let err = run_1d(&seq, (0.0, 1.0), &opts(9, 8), &HypothesisBudget::default()).unwrap_err();
    assert!(matches!(err, Error::Hypothesis { step: 1, .. }));
}

#[test]
fn interval_ratio_examples() {
    let seq = quadratic_seq(50);
    let rep = interval_ratio_1d(&seq, (0.0, 1.0), (0.0, 0.5), (0.5, 1.0), &opts(65, 8), &quadratic_budget()).unwrap();
    let check = rep.ratio.unwrap();
    assert_eq!(check.r, 1.0);
    assert!(check.ratio >= (-4.0f64).exp() && check.ratio <= 4.0f64.exp());
    assert!((rep.theoretical_log_k - 4.0).abs() < 1e-15);
    assert_eq!(rep.verdict, Verdict::BoundHolds);

    let same = interval_ratio_1d(&seq, (0.0, 1.0), (0.2, 0.7), (0.2, 0.7), &opts(9, 8), &quadratic_budget()).unwrap();
    assert_eq!(same.ratio.unwrap().ratio, 1.0);

    let bad = interval_ratio_1d(&seq, (0.0, 1.0), (0.3, 0.3), (0.5, 1.0), &opts(9, 8), &quadratic_budget());
    assert!(matches!(bad, Err(Error::DegenerateInterval { .. })));
}

fn rotations(n: usize) -> MapSequence {
    MapSequence::repeat(Arc::new(AffineMap::rotation(0.1)), n).unwrap()
}

fn rotation_budget(n: usize) -> HypothesisBudget {
    HypothesisBudget {
        c: Some(Constant::analytic(1.0)),
        l: Some(Constant::analytic(n as f64)),
        alpha: Some(Constant::analytic(0.0)),
        epsilon: None,
    }
}

fn unit_segment() -> ParamCurve {
    ParamCurve::segment(vector(&[0.0, 0.0]), vector(&[0.6, 0.8])).unwrap()
}

#[test]
fn rotations_preserve_tangent_norms() {
    let rep = run_curve(&rotations(5), &unit_segment(), &opts(9, 32), &rotation_budget(5)).unwrap();
    assert!(rep.empirical <= 1e-12);
    for s in &rep.trace.per_step {
        assert!((s.length - 1.0).abs() < 1e-12);
        assert_eq!(s.alpha, Some(0.0));
        assert!(s.lemma1_increment <= 1e-12 && s.lemma2_increment <= 1e-12);
    }
    assert_eq!(rep.verdict, Verdict::BoundHolds);

    let holder = run_curve_holder(
        &rotations(5),
        &unit_segment(),
        &opts(9, 32),
        &HypothesisBudget {
            epsilon: Some(0.5),
            ..rotation_budget(5)
        },
    )
    .unwrap();
    assert!(holder.empirical <= 1e-12);
    assert_eq!(holder.verdict, Verdict::BoundHolds);
}

#[test]
fn identity_maps_keep_lengths() {
    let arc = ParamCurve::circle_arc([0.0, 0.0], 1.0, 0.0, 1.0).unwrap();
    let seq = MapSequence::repeat(Arc::new(AffineMap::identity(2)), 4).unwrap();
    let rep = run_curve(&seq, &arc, &opts(9, 64), &HypothesisBudget::default()).unwrap();
    assert_eq!(rep.empirical, 0.0);
    for s in &rep.trace.per_step {
        assert!((s.length - 1.0).abs() < 1e-10);
    }
    // alpha and C were sampled here.
    assert_eq!(rep.verdict, Verdict::HypothesisUnverified);
}

#[test]
fn arc_ratio_under_rotations() {
    let seq = rotations(7);
    let rep = arc_ratio_curve(&seq, &unit_segment(), (0.0, 0.25), (0.25, 1.0), &opts(9, 32), &rotation_budget(7)).unwrap();
    let check = rep.ratio.unwrap();
    assert!((check.ratio - check.r).abs() < 1e-12);
    assert!((rep.theoretical_log_k - 14.0).abs() < 1e-12);
    assert_eq!(rep.verdict, Verdict::BoundHolds);
    let same = arc_ratio_curve(&seq, &unit_segment(), (0.1, 0.6), (0.1, 0.6), &opts(9, 32), &rotation_budget(7)).unwrap();
    assert_eq!(same.ratio.unwrap().ratio, 1.0);
}

fn quarter_circle() -> ParamCurve {
    ParamCurve::circle_arc([0.0, 0.0], 1.0, 0.0, FRAC_PI_2).unwrap()
}

#[test]
fn single_shear_matches_dense_oracle() {
    let shear = FramedShear::new(0.0, 1.0, 1.0, 0.1, [0.0, 0.0], Region::cube(2, 1.0).unwrap()).unwrap();
    let c = shear.analytic_bounds().unwrap().constant();
    let seq = MapSequence::new(vec![Arc::new(shear.clone())]).unwrap();
    let budget = HypothesisBudget {
        c: Some(Constant::analytic(c)),
        l: Some(Constant::analytic(FRAC_PI_2)),
        alpha: Some(Constant::analytic(FRAC_PI_2)),
        epsilon: None,
    };
    let rep = run_curve(&seq, &quarter_circle(), &opts(513, 256), &budget).unwrap();

    // Oracle: positions of f ∘ γ on a dense grid, tangents by central differences.
    let pos = |t: f64| shear.eval(&vector(&[t.cos(), t.sin()]));
    let h = 1e-6;
    let logs: Vec<f64> = (0..=2000)
        .map(|k| {
            let t = FRAC_PI_2 * k as f64 / 2000.0;
            let (lo, hi) = ((t - h).max(0.0), (t + h).min(FRAC_PI_2));
            ((pos(hi) - pos(lo)) / (hi - lo)).norm().ln()
        })
        .collect();
    let oracle = logs.iter().cloned().fold(f64::MIN, f64::max) - logs.iter().cloned().fold(f64::MAX, f64::min);
    assert!((rep.empirical - oracle).abs() < 1e-4, "{} vs {oracle}", rep.empirical);
    assert!(rep.empirical <= c * c * PI);
    assert_eq!(rep.verdict, Verdict::BoundHolds);
    assert!(rep.lemmas.passed);
}

#[test]
fn lemma_examples() {
    // Affine: Jacobian independent of the point.
    let affine = MapSequence::new(vec![Arc::new(
        AffineMap::new(Matrix::from_row_slice(2, 2, &[0.7, 0.2, -0.1, 0.5]), vector(&[0.1, 0.0])).unwrap(),
    )])
    .unwrap();
    let rep = run_curve(&affine, &quarter_circle(), &opts(17, 32), &HypothesisBudget::default()).unwrap();
    assert_eq!(rep.trace.per_step[0].lemma2_increment, 0.0);
    // Straight segment: identical tangents.
    let shear = FramedShear::new(0.3, 0.6, 0.4, 0.2, [0.0, 0.0], Region::Everywhere).unwrap();
    let seq = MapSequence::new(vec![Arc::new(shear)]).unwrap();
    let rep = run_curve(&seq, &unit_segment(), &opts(17, 32), &HypothesisBudget::default()).unwrap();
    assert_eq!(rep.trace.per_step[0].lemma1_increment, 0.0);
}

fn shear_family(seed: u64, n: usize) -> (MapSequence, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let region = Region::cube(2, 1.5).unwrap();
    let mut c: f64 = 0.0;
    let maps: Vec<Arc<dyn SmoothMap>> = (0..n)
        .map(|_| {
            let m = FramedShear::new(
                0.75 * PI,
                rng.gen_range(0.5..0.6),
                rng.gen_range(0.2..0.3),
                rng.gen_range(-0.03..0.03),
                [rng.gen_range(-0.03..0.03), rng.gen_range(-0.03..0.03)],
                region.clone(),
            )
            .unwrap();
            c = c.max(m.analytic_bounds().unwrap().constant());
            Arc::new(m) as Arc<dyn SmoothMap>
        })
        .collect();
    (MapSequence::new(maps).unwrap(), c)
}

#[test]
fn shear_family_lemmas_hold() {
    let (seq, c) = shear_family(3, 12);
    let budget = HypothesisBudget {
        c: Some(Constant::analytic(c)),
        ..Default::default()
    };
    let rep = run_curve(&seq, &quarter_circle(), &opts(17, 64), &budget).unwrap();
    assert!(rep.lemmas.passed, "{:?}", rep.lemmas.first_violation);
    for s in &rep.lemmas.steps {
        assert!(s.lemma1_rhs - s.lemma1_lhs >= 0.0 && s.lemma2_rhs - s.lemma2_lhs >= 0.0);
    }
}

#[test]
fn profile_is_antisymmetric() {
    let (seq, _) = shear_family(9, 4);
    let rep = run_curve(&seq, &quarter_circle(), &opts(9, 32), &HypothesisBudget::default()).unwrap();
    let logs: Vec<f64> = rep.profile.iter().map(|p| p.1).collect();
    assert_eq!(logs[0], 0.0);
    for x in &logs {
        for y in &logs {
            assert_eq!(x - y, -(y - x));
        }
    }
}

#[test]
fn singular_jacobian_along_curve() {
    let collapse = Arc::new(AffineMap::linear(Matrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0])));
    let seq = MapSequence::new(vec![Arc::new(AffineMap::identity(2)), collapse]).unwrap();
    let err = run_curve(&seq, &quarter_circle(), &opts(9, 16), &HypothesisBudget::default()).unwrap_err();
    assert_eq!(err.step(), Some(2));
    assert!(err.is_hypothesis_failure());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn telescoping_bound(seed in 0u64..1000, n in 1usize..8) {
        let (seq, _) = shear_family(seed, n);
        let rep = run_curve(&seq, &quarter_circle(), &opts(9, 32), &HypothesisBudget::default()).unwrap();
        let total: f64 = rep.trace.per_step.iter().map(|s| s.lemma1_increment + s.lemma2_increment).sum();
        prop_assert!(rep.empirical <= total + 1e-9);
    }
}
