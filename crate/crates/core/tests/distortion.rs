mod common;

use choquet_core::sampling::{random_concave_curve, random_curve};
use choquet_core::*;
use common::*;
use proptest::prelude::*;

fn probe_points(curve: &DistortionCurve) -> Vec<f64> {
    let mut pts: Vec<f64> = (0..=1000).map(|k| k as f64 / 1000.0).collect();
    for k in curve.knots() {
        pts.extend([k - 1e-9, k, k + 1e-9]);
    }
    pts.retain(|t| (0.0..=1.0).contains(t));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Slopes between consecutive probe points in `(0, 1]` never increase.
fn sampled_concave(curve: &DistortionCurve) -> bool {
    let pts: Vec<f64> = probe_points(curve).into_iter().filter(|&t| t > 0.0).collect();
    let slopes: Vec<f64> = pts
        .windows(2)
        .map(|w| (curve.value(w[1]) - curve.value(w[0])) / (w[1] - w[0]))
        .collect();
    slopes.windows(2).all(|w| w[1] <= w[0] + 1e-6)
}

proptest! {
    #![proptest_config(config(500))]

    #[test]
    fn curves_are_normalized_and_monotone(seed in any::<u64>()) {
        let curve = random_curve(&mut rng(seed), 5);
        prop_assert_eq!(curve.value(0.0), 0.0);
        prop_assert_eq!(curve.value(1.0), 1.0);
        let pts = probe_points(&curve);
        for w in pts.windows(2) {
            let (a, b) = (curve.value(w[0]), curve.value(w[1]));
            prop_assert!(a <= b, "φ({}) = {} > φ({}) = {}", w[0], a, w[1], b);
            prop_assert!((0.0..=1.0).contains(&a));
        }
    }

    #[test]
    fn concavity_flag_matches_sampled_shape(seed in any::<u64>()) {
        let mut r = rng(seed);
        let curve = if seed % 2 == 0 { random_concave_curve(&mut r, 5, true) } else { random_curve(&mut r, 5) };
        prop_assert_eq!(curve.is_concave(), sampled_concave(&curve), "{:?}", curve);
        if seed % 2 == 0 {
            prop_assert!(curve.is_concave());
        }
    }

    #[test]
    fn spec_round_trip(seed in any::<u64>()) {
        let curve = random_curve(&mut rng(seed), 5);
        let back = curve.to_spec().build().unwrap();
        for t in probe_points(&curve) {
            prop_assert_eq!(back.value(t), curve.value(t));
        }
    }

    #[test]
    fn builtins_match_closed_forms(alpha in 0.001f64..0.999, t in 0.0f64..=1.0) {
        let knot = 1.0 - alpha;
        let var = DistortionCurve::var(alpha).unwrap();
        let avar = DistortionCurve::avar(alpha).unwrap();
        prop_assert_eq!(var.value(t), if t > knot { 1.0 } else { 0.0 });
        prop_assert!((avar.value(t) - t.min(knot) / knot).abs() <= 1e-12);
        prop_assert!(avar.is_concave());
        prop_assert!(!var.is_concave());
    }
}

#[test]
fn builtin_examples() {
    let var = DistortionCurve::var(0.3).unwrap();
    assert_eq!(var.value(0.7), 0.0);
    assert_eq!(var.value(0.71), 1.0);
    let avar = DistortionCurve::avar(0.5).unwrap();
    assert!((avar.value(0.3) - 0.6).abs() < 1e-15);
    assert_eq!(avar.at_zero_plus(), 0.0);
    assert!(matches!(DistortionCurve::var(1.5), Err(DistortionError::InvalidLevel(_))));
}

#[test]
fn decreasing_segments_are_rejected() {
    let segs = vec![Segment::affine(0.0, 0.5, 0.0, 1.2), Segment::affine(0.5, 1.0, -0.2, 1.2)];
    assert!(DistortionCurve::new(segs).is_err());
    let gap = vec![Segment::affine(0.0, 0.4, 0.0, 1.0), Segment::affine(0.5, 1.0, 0.0, 1.0)];
    assert!(DistortionCurve::new(gap).is_err());
}

#[test]
fn block_lookup_and_concavity_report() {
    let s = space(4);
    let d = builtin_distortion(halves(&s), &[BuiltinKind::Var(0.3), BuiltinKind::Avar(0.3)]).unwrap();
    assert_eq!(eval_distortion(&d, 0, 0.8).unwrap(), 1.0);
    assert!(matches!(eval_distortion(&d, 2, 0.5), Err(DistortionError::NoSuchBlock(2))));
    let report = is_concave(&d);
    assert!(!report[0].concave);
    assert!(report[1].concave);
}
