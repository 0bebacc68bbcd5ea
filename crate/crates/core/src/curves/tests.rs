use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use proptest::prelude::*;

use super::*;
use crate::maps::{AffineMap, Composed, FramedShear, Region};
use crate::{vector, Matrix};

// Independent adaptive Simpson oracle.
fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 40)
}

fn quarter_circle() -> ParamCurve {
    ParamCurve::circle_arc([0.0, 0.0], 1.0, 0.0, FRAC_PI_2).unwrap()
}

#[test]
fn length_examples() {
    let half = ParamCurve::circle_arc([0.0, 0.0], 1.0, 0.0, PI).unwrap();
    assert!((length(&half, 64).unwrap() - PI).abs() < 1e-6);
    let seg = ParamCurve::segment(vector(&[0.0, 0.0]), vector(&[3.0, 4.0])).unwrap();
    assert!((length(&seg, 8).unwrap() - 5.0).abs() < 1e-9);
    let parabola = ParamCurve::polynomial(vec![vec![0.0, 1.0], vec![0.0, 0.0, 1.0]], (0.0, 1.0)).unwrap();
    let oracle = adaptive(&|t| (1.0 + 4.0 * t * t).sqrt(), 0.0, 1.0, 1e-13);
    assert!((oracle - 1.478943).abs() < 1e-6);
    assert!((length(&parabola, 64).unwrap() - oracle).abs() < 1e-9);
}

#[test]
fn zero_velocity_is_irregular() {
    let cusp = ParamCurve::polynomial(vec![vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 0.0, 1.0]], (-1.0, 1.0)).unwrap();
    assert!(matches!(length(&cusp, 8), Err(Error::Irregular { .. })));
    assert!(matches!(max_angle(&cusp, 8), Err(Error::Irregular { .. })));
}

#[test]
fn max_angle_examples() {
    let seg = ParamCurve::segment(vector(&[0.2, -1.0, 3.0]), vector(&[1.0, 2.0, -0.5])).unwrap();
    assert_eq!(max_angle(&seg, 512).unwrap(), 0.0);
    let half = ParamCurve::circle_arc([1.0, 2.0], 0.7, 0.0, PI).unwrap();
    assert!((max_angle(&half, 512).unwrap() - PI).abs() < 1e-3);
    assert!((max_angle(&quarter_circle(), 512).unwrap() - FRAC_PI_2).abs() < 1e-3);
}

#[test]
fn natural_examples() {
    let seg = ParamCurve::segment(vector(&[0.0, 0.0]), vector(&[0.6, 0.8])).unwrap();
    let nat = reparameterize_natural(&seg, 16).unwrap();
    for (t, s) in nat.arc_table() {
        assert!((t - s).abs() < 1e-14);
    }
    for s in [0.0, 0.3, 0.77, 1.0] {
        let j = nat.jet(s).unwrap();
        assert!((j.value - seg.position(s).unwrap()).norm() < 1e-14);
    }

    let fast = ParamCurve::line(vector(&[0.0, 0.0]), vector(&[2.0, 0.0]), (0.0, 1.0)).unwrap();
    let nat = reparameterize_natural(&fast, 32).unwrap();
    assert!((nat.total_length() - 2.0).abs() < 1e-14);
    assert!((nat.jet(1.3).unwrap().deriv.norm() - 1.0).abs() < 1e-14);

    let circle = ParamCurve::circle_arc([0.0, 0.0], 2.0, 0.0, PI).unwrap();
    let nat = reparameterize_natural(&circle, 64).unwrap();
    assert!((nat.total_length() - 2.0 * PI).abs() < 1e-12);
    for k in 0..=50 {
        let s = 2.0 * PI * k as f64 / 50.0;
        let j = nat.jet(s).unwrap();
        assert!((j.deriv.norm() - 1.0).abs() < 1e-4);
        let expect = vector(&[2.0 * (s / 2.0).cos(), 2.0 * (s / 2.0).sin()]);
        assert!((j.value - expect).norm() < 1e-9);
    }
}

#[test]
fn natural_speed_by_differencing_positions() {
    let parabola = ParamCurve::polynomial(vec![vec![0.0, 1.0], vec![0.0, 0.0, 1.0]], (0.0, 1.0)).unwrap();
    let nat = reparameterize_natural(&parabola, 128).unwrap();
    let h = 1e-5;
    for k in 1..20 {
        let s = nat.total_length() * k as f64 / 20.0;
        let p = nat.jet(s + h).unwrap().value - nat.jet(s - h).unwrap().value;
        assert!((p.norm() / (2.0 * h) - 1.0).abs() < 1e-4);
    }
    assert!((nat.locate(1.0).unwrap() - nat.total_length()).abs() < 1e-14);
    let s = nat.locate(0.4).unwrap();
    assert!((nat.param_at(s).unwrap() - 0.4).abs() < 1e-12);
}

#[test]
fn pushforward_examples() {
    let c = quarter_circle();
    let id = c.pushforward(Arc::new(AffineMap::identity(2))).unwrap();
    for t in [0.0, 0.5, 1.2] {
        assert_eq!(id.jet(t).unwrap(), c.jet(t).unwrap());
    }

    let seg = ParamCurve::segment(vector(&[0.0, 0.0]), vector(&[1.0, 0.0])).unwrap();
    let stretched = seg
        .pushforward(Arc::new(AffineMap::linear(Matrix::from_diagonal(&vector(&[2.0, 1.0])))))
        .unwrap();
    for t in [0.0, 0.25, 1.0] {
        assert_eq!(stretched.jet(t).unwrap().deriv, vector(&[2.0, 0.0]));
    }

    let shear = Arc::new(FramedShear::new(0.0, 1.0, 1.0, 0.1, [0.0, 0.0], Region::Everywhere).unwrap());
    let pushed = c.pushforward(shear).unwrap();
    let h = 1e-5;
    for k in 0..=10 {
        let t = FRAC_PI_2 * (0.05 + 0.9 * k as f64 / 10.0);
        let fd = (pushed.position(t + h).unwrap() - pushed.position(t - h).unwrap()) / (2.0 * h);
        assert!((pushed.jet(t).unwrap().deriv - fd).norm() < 1e-6);
    }
}

#[test]
fn pushforward_detects_vanishing_tangent() {
    let collapse = Arc::new(AffineMap::linear(Matrix::from_diagonal(&vector(&[0.0, 1.0]))));
    let seg = ParamCurve::segment(vector(&[0.0, 0.0]), vector(&[1.0, 0.0])).unwrap();
    let pushed = seg.pushforward(collapse).unwrap();
    assert!(pushed.jet(0.5).unwrap_err().is_hypothesis_failure());
}

fn rotation(angle: f64) -> Arc<dyn SmoothMap> {
    Arc::new(AffineMap::rotation(angle))
}

fn arb_curve() -> impl Strategy<Value = ParamCurve> {
    (
        proptest::collection::vec(-2.0f64..2.0, 4),
        proptest::collection::vec(-2.0f64..2.0, 4),
    )
        .prop_map(|(x, y)| {
            // Keep the x-speed away from zero so the curve stays regular.
            let mut x = x;
            x[1] = 1.0 + x[1].abs();
            x[2] = x[2] * 0.2;
            x[3] = x[3] * 0.1;
            ParamCurve::polynomial(vec![x, y], (0.0, 1.0)).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn length_is_additive(c in arb_curve(), split in 0.05f64..0.95) {
        let whole = length(&c, 256).unwrap();
        let parts = length(&c.restrict(0.0, split).unwrap(), 256).unwrap()
            + length(&c.restrict(split, 1.0).unwrap(), 256).unwrap();
        prop_assert!((whole - parts).abs() <= 1e-9);
    }

    #[test]
    fn length_at_least_chord(c in arb_curve()) {
        let chord = (c.position(1.0).unwrap() - c.position(0.0).unwrap()).norm();
        prop_assert!(length(&c, 64).unwrap() >= chord - 1e-9);
    }

    #[test]
    fn natural_preserves_length(c in arb_curve()) {
        let l = length(&c, 256).unwrap();
        let nat = reparameterize_natural(&c, 128).unwrap().to_param();
        let ln = length(&nat, 64).unwrap();
        prop_assert!((l - ln).abs() <= 1e-6 * l);
    }

    #[test]
    fn max_angle_rotation_invariant(c in arb_curve(), angle in -3.0f64..3.0) {
        let rotated = c.pushforward(rotation(angle)).unwrap();
        let a = max_angle(&c, 64).unwrap();
        let b = max_angle(&rotated, 64).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn max_angle_monotone_in_resolution(c in arb_curve(), r in 2usize..40) {
        prop_assert!(max_angle(&c, 2 * r).unwrap() >= max_angle(&c, r).unwrap());
    }

    #[test]
    fn pushforward_chain(c in arb_curve(), s in -0.2f64..0.2, t in 0.0f64..1.0) {
        let f: Arc<dyn SmoothMap> = Arc::new(FramedShear::new(0.3, 0.8, 0.6, s, [0.1, 0.0], Region::Everywhere).unwrap());
        let g: Arc<dyn SmoothMap> = Arc::new(FramedShear::new(1.1, 0.5, 1.2, -s, [0.0, 0.2], Region::Everywhere).unwrap());
        let twice = c.pushforward(f.clone()).unwrap().pushforward(g.clone()).unwrap();
        let once = c.pushforward(Arc::new(Composed::new(f, g).unwrap())).unwrap();
        let (a, b) = (twice.jet(t).unwrap(), once.jet(t).unwrap());
        prop_assert!((a.value - b.value).norm() <= 1e-9);
        prop_assert!((a.deriv - b.deriv).norm() <= 1e-9);
    }
}
