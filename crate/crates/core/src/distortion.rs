//! Distortion curves and block-wise random distortions.
//!
//! A curve is piecewise affine on left-open, right-closed segments
//! `(t_j, t_{j+1}]` tiling `(0, 1]`, with the value at `0` pinned to `0`.
//! Each segment stores its right limit at the left knot and its value at the
//! right knot, so both continuous (AVaR-type) and jump (VaR-type) curves are
//! represented exactly. The indicator `1_{(a,1]}` is the two segments
//! `(0,a] ↦ 0` and `(a,1] ↦ 1`.
//!
//! A [`RandomDistortion`] carries one curve per block of a
//! [`BlockPartition`]; that is what makes `ω ↦ φ(ω, t)` measurable with
//! respect to the conditioning σ-algebra.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::space::BlockPartition;

/// Validation tolerance for distortion values.
pub const TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistortionError {
    #[error("distortion is not normalised: value {value} at t = {at}")]
    NotNormalized { at: f64, value: f64 },
    #[error("distortion decreases: φ({lo}) = {lo_value} > φ({hi}) = {hi_value}")]
    NotMonotone {
        lo: f64,
        hi: f64,
        lo_value: f64,
        hi_value: f64,
    },
    #[error("segments do not tile (0,1]: problem at t = {at}")]
    GapOrOverlap { at: f64 },
    #[error("distortion value {value} at t = {at} is outside [0,1]")]
    OutOfRange { at: f64, value: f64 },
    #[error("malformed segment description: {0}")]
    Malformed(String),
    #[error("expected one curve per block ({expected}), got {got}")]
    BlockCountMismatch { expected: usize, got: usize },
    #[error("level {0} is not in (0,1)")]
    InvalidLevel(f64),
    #[error("t = {0} is outside [0,1]")]
    OutOfDomain(f64),
    #[error("block index {0} out of range")]
    NoSuchBlock(usize),
    #[error("block `{block}`: {source}")]
    InBlock {
        block: String,
        #[source]
        source: Box<DistortionError>,
    },
}

/// One affine piece on `(left, right]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub left: f64,
    pub right: f64,
    /// `φ(left+)`.
    pub start: f64,
    /// `φ(right)`.
    pub end: f64,
}

impl Segment {
    /// Segment `t ↦ intercept + slope·t` on `(left, right]`.
    pub fn affine(left: f64, right: f64, intercept: f64, slope: f64) -> Self {
        Segment {
            left,
            right,
            start: intercept + slope * left,
            end: intercept + slope * right,
        }
    }

    pub fn slope(&self) -> f64 {
        (self.end - self.start) / (self.right - self.left)
    }

    /// Value at `t ∈ (left, right]`. The right knot returns `end` verbatim.
    pub fn at(&self, t: f64) -> f64 {
        if t == self.right {
            self.end
        } else {
            self.start + (self.end - self.start) * ((t - self.left) / (self.right - self.left))
        }
    }

    /// `∫ φ` over `[p, q] ⊆ [left, right]`.
    pub fn integral(&self, p: f64, q: f64) -> f64 {
        if q <= p {
            return 0.0;
        }
        0.5 * (self.at_open(p) + self.at_open(q)) * (q - p)
    }

    /// Affine extension evaluated anywhere on `[left, right]`.
    fn at_open(&self, t: f64) -> f64 {
        if t == self.left {
            self.start
        } else {
            self.at(t)
        }
    }
}

/// Index of the segment `(left, right]` containing `t ∈ (0, 1]`.
pub(crate) fn segment_index(segments: &[Segment], t: f64) -> usize {
    segments
        .partition_point(|s| s.right < t)
        .min(segments.len() - 1)
}

/// Checks that `segments` chain exactly from `0` to `1`.
pub(crate) fn check_tiling(segments: &[Segment]) -> Result<(), DistortionError> {
    let first = segments
        .first()
        .ok_or_else(|| DistortionError::Malformed("no segments".into()))?;
    if first.left != 0.0 {
        return Err(DistortionError::GapOrOverlap { at: first.left });
    }
    for (i, s) in segments.iter().enumerate() {
        if !s.left.is_finite() || !s.right.is_finite() || s.left >= s.right {
            return Err(DistortionError::GapOrOverlap { at: s.left });
        }
        if let Some(next) = segments.get(i + 1) {
            if next.left != s.right {
                return Err(DistortionError::GapOrOverlap { at: s.right });
            }
        }
        if !s.start.is_finite() || !s.end.is_finite() {
            return Err(DistortionError::Malformed(format!(
                "non-finite value on ({}, {}]",
                s.left, s.right
            )));
        }
    }
    let last = segments.last().expect("non-empty");
    if last.right != 1.0 {
        return Err(DistortionError::GapOrOverlap { at: last.right });
    }
    Ok(())
}

/// First place where a tiled segment list decreases, as a `(lo, hi)` pair.
pub(crate) fn find_decrease(segments: &[Segment], prev_end: f64) -> Option<DistortionError> {
    let mut prev: (f64, f64) = (0.0, prev_end);
    for s in segments {
        if s.start < prev.1 - TOL {
            let hi = prev.0.next_up();
            return Some(DistortionError::NotMonotone {
                lo: prev.0,
                hi,
                lo_value: prev.1,
                hi_value: s.at(hi),
            });
        }
        if s.end < s.start - TOL {
            let lo = 0.5 * (s.left + s.right);
            return Some(DistortionError::NotMonotone {
                lo,
                hi: s.right,
                lo_value: s.at(lo),
                hi_value: s.end,
            });
        }
        prev = (s.right, s.end);
    }
    None
}

fn clamp_unit(v: f64, at: f64) -> Result<f64, DistortionError> {
    if !(-TOL..=1.0 + TOL).contains(&v) {
        return Err(DistortionError::OutOfRange { at, value: v });
    }
    Ok(v.clamp(0.0, 1.0))
}

/// A non-decreasing, normalised, piecewise-affine map `[0,1] → [0,1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistortionCurve {
    segments: Vec<Segment>,
}

impl DistortionCurve {
    pub fn new(mut segments: Vec<Segment>) -> Result<Self, DistortionError> {
        check_tiling(&segments)?;
        if let Some(err) = find_decrease(&segments, 0.0) {
            return Err(err);
        }
        for s in &mut segments {
            s.start = clamp_unit(s.start, s.left)?;
            s.end = clamp_unit(s.end, s.right)?;
        }
        let last = segments.last_mut().expect("non-empty");
        if (last.end - 1.0).abs() > TOL {
            return Err(DistortionError::NotNormalized {
                at: 1.0,
                value: last.end,
            });
        }
        last.end = 1.0;
        Ok(DistortionCurve { segments })
    }

    pub fn identity() -> Self {
        DistortionCurve {
            segments: vec![Segment {
                left: 0.0,
                right: 1.0,
                start: 0.0,
                end: 1.0,
            }],
        }
    }

    /// `1_{(1-α, 1]}`.
    pub fn var(alpha: f64) -> Result<Self, DistortionError> {
        let knot = 1.0 - check_level(alpha)?;
        Ok(DistortionCurve {
            segments: vec![
                Segment {
                    left: 0.0,
                    right: knot,
                    start: 0.0,
                    end: 0.0,
                },
                Segment {
                    left: knot,
                    right: 1.0,
                    start: 1.0,
                    end: 1.0,
                },
            ],
        })
    }

    /// `min{t, 1-α} / (1-α)`.
    pub fn avar(alpha: f64) -> Result<Self, DistortionError> {
        let knot = 1.0 - check_level(alpha)?;
        Ok(DistortionCurve {
            segments: vec![
                Segment {
                    left: 0.0,
                    right: knot,
                    start: 0.0,
                    end: 1.0,
                },
                Segment {
                    left: knot,
                    right: 1.0,
                    start: 1.0,
                    end: 1.0,
                },
            ],
        })
    }

    /// Builds a curve from knots `0 = t_0 < … < t_m = 1`, right limits
    /// `φ(t_j+)` for `j < m` and knot values `φ(t_j)` for `j ≤ m`.
    pub fn from_knots(
        knots: &[f64],
        right_limits: &[f64],
        at_knots: &[f64],
    ) -> Result<Self, DistortionError> {
        if knots.len() < 2 {
            return Err(DistortionError::Malformed(
                "need at least the knots 0 and 1".into(),
            ));
        }
        let m = knots.len() - 1;
        if right_limits.len() != m || at_knots.len() != m + 1 {
            return Err(DistortionError::Malformed(format!(
                "{} knots need {m} right limits and {} knot values, got {} and {}",
                m + 1,
                m + 1,
                right_limits.len(),
                at_knots.len()
            )));
        }
        if at_knots[0] != 0.0 {
            return Err(DistortionError::NotNormalized {
                at: 0.0,
                value: at_knots[0],
            });
        }
        let segments = (0..m)
            .map(|j| Segment {
                left: knots[j],
                right: knots[j + 1],
                start: right_limits[j],
                end: at_knots[j + 1],
            })
            .collect();
        Self::new(segments)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Interior and boundary knots `0 = t_0 < … < t_m = 1`.
    pub fn knots(&self) -> Vec<f64> {
        std::iter::once(0.0)
            .chain(self.segments.iter().map(|s| s.right))
            .collect()
    }

    /// `φ(t)`; callers guarantee `t ∈ [0, 1]`.
    pub fn value(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let t = t.min(1.0);
        self.segments[segment_index(&self.segments, t)].at(t)
    }

    pub fn eval(&self, t: f64) -> Result<f64, DistortionError> {
        if !(0.0..=1.0).contains(&t) {
            return Err(DistortionError::OutOfDomain(t));
        }
        Ok(self.value(t))
    }

    /// `φ(0+)`.
    pub fn at_zero_plus(&self) -> f64 {
        self.segments[0].start
    }

    /// Right-hand derivative at `s ∈ [0, 1)`.
    pub fn right_slope(&self, s: f64) -> f64 {
        let j = self.segments.partition_point(|seg| seg.right <= s);
        self.segments[j.min(self.segments.len() - 1)].slope()
    }

    /// Concave on `[0,1]` iff continuous on `(0,1]` with non-increasing
    /// slopes; a jump at `0` is allowed.
    pub fn is_concave(&self) -> bool {
        self.segments.windows(2).all(|w| {
            let (a, b) = (w[0], w[1]);
            let continuous = (b.start - a.end).abs() <= TOL;
            let (sa, sb) = (a.slope(), b.slope());
            continuous && sb <= sa + 1e-9 * (1.0 + sa.abs())
        })
    }

    pub fn to_spec(&self) -> DistortionSpec {
        DistortionSpec::Segments {
            knots: self.knots(),
            right_limits: self.segments.iter().map(|s| s.start).collect(),
            at_knots: std::iter::once(0.0)
                .chain(self.segments.iter().map(|s| s.end))
                .collect(),
        }
    }
}

fn check_level(alpha: f64) -> Result<f64, DistortionError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(alpha)
    } else {
        Err(DistortionError::InvalidLevel(alpha))
    }
}

/// On-disk description of one block's curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DistortionSpec {
    Var {
        alpha: f64,
    },
    Avar {
        alpha: f64,
    },
    Identity,
    Segments {
        knots: Vec<f64>,
        #[serde(rename = "values-right-limit")]
        right_limits: Vec<f64>,
        #[serde(rename = "values-at-knot")]
        at_knots: Vec<f64>,
    },
}

impl DistortionSpec {
    pub fn build(&self) -> Result<DistortionCurve, DistortionError> {
        match self {
            DistortionSpec::Var { alpha } => DistortionCurve::var(*alpha),
            DistortionSpec::Avar { alpha } => DistortionCurve::avar(*alpha),
            DistortionSpec::Identity => Ok(DistortionCurve::identity()),
            DistortionSpec::Segments {
                knots,
                right_limits,
                at_knots,
            } => DistortionCurve::from_knots(knots, right_limits, at_knots),
        }
    }
}

/// Built-in per-block kinds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BuiltinKind {
    Var(f64),
    Avar(f64),
    Identity,
}

impl BuiltinKind {
    pub fn curve(self) -> Result<DistortionCurve, DistortionError> {
        match self {
            BuiltinKind::Var(a) => DistortionCurve::var(a),
            BuiltinKind::Avar(a) => DistortionCurve::avar(a),
            BuiltinKind::Identity => Ok(DistortionCurve::identity()),
        }
    }
}

/// Raw affine segment `(left, right] ↦ intercept + slope·t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawSegment {
    pub left: f64,
    pub right: f64,
    pub intercept: f64,
    pub slope: f64,
}

/// Per-block concavity verdict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Concavity {
    pub concave: bool,
    pub at_zero_plus: f64,
}

/// A G-random distortion: one curve per partition block.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomDistortion {
    partition: BlockPartition,
    curves: Vec<DistortionCurve>,
}

impl RandomDistortion {
    pub fn new(
        partition: BlockPartition,
        curves: Vec<DistortionCurve>,
    ) -> Result<Self, DistortionError> {
        if curves.len() != partition.len() {
            return Err(DistortionError::BlockCountMismatch {
                expected: partition.len(),
                got: curves.len(),
            });
        }
        Ok(RandomDistortion { partition, curves })
    }

    /// Same curve on every block.
    pub fn uniform(partition: BlockPartition, curve: DistortionCurve) -> Self {
        let curves = vec![curve; partition.len()];
        RandomDistortion { partition, curves }
    }

    pub fn from_specs(
        partition: BlockPartition,
        specs: &[DistortionSpec],
    ) -> Result<Self, DistortionError> {
        if specs.len() != partition.len() {
            return Err(DistortionError::BlockCountMismatch {
                expected: partition.len(),
                got: specs.len(),
            });
        }
        let curves = specs
            .iter()
            .enumerate()
            .map(|(b, spec)| spec.build().map_err(|e| in_block(&partition, b, e)))
            .collect::<Result<_, _>>()?;
        Self::new(partition, curves)
    }

    pub fn partition(&self) -> &BlockPartition {
        &self.partition
    }

    pub fn curves(&self) -> &[DistortionCurve] {
        &self.curves
    }

    pub fn curve(&self, block: usize) -> &DistortionCurve {
        &self.curves[block]
    }

    pub fn to_specs(&self) -> Vec<DistortionSpec> {
        self.curves.iter().map(DistortionCurve::to_spec).collect()
    }
}

fn in_block(partition: &BlockPartition, block: usize, source: DistortionError) -> DistortionError {
    DistortionError::InBlock {
        block: partition.label(block).to_string(),
        source: Box::new(source),
    }
}

/// Validates one raw affine segment list per block.
pub fn build_distortion(
    partition: BlockPartition,
    curves: &[Vec<RawSegment>],
) -> Result<RandomDistortion, DistortionError> {
    if curves.len() != partition.len() {
        return Err(DistortionError::BlockCountMismatch {
            expected: partition.len(),
            got: curves.len(),
        });
    }
    let built = curves
        .iter()
        .enumerate()
        .map(|(b, raw)| {
            let segments = raw
                .iter()
                .map(|r| Segment::affine(r.left, r.right, r.intercept, r.slope))
                .collect();
            DistortionCurve::new(segments).map_err(|e| in_block(&partition, b, e))
        })
        .collect::<Result<_, _>>()?;
    RandomDistortion::new(partition, built)
}

pub fn builtin_distortion(
    partition: BlockPartition,
    kinds: &[BuiltinKind],
) -> Result<RandomDistortion, DistortionError> {
    if kinds.len() != partition.len() {
        return Err(DistortionError::BlockCountMismatch {
            expected: partition.len(),
            got: kinds.len(),
        });
    }
    let curves = kinds
        .iter()
        .map(|k| k.curve())
        .collect::<Result<_, _>>()?;
    RandomDistortion::new(partition, curves)
}

pub fn eval_distortion(
    d: &RandomDistortion,
    block: usize,
    t: f64,
) -> Result<f64, DistortionError> {
    d.curves
        .get(block)
        .ok_or(DistortionError::NoSuchBlock(block))?
        .eval(t)
}

pub fn is_concave(d: &RandomDistortion) -> Vec<Concavity> {
    d.curves
        .iter()
        .map(|c| Concavity {
            concave: c.is_concave(),
            at_zero_plus: c.at_zero_plus(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::SampleSpace;
    use proptest::prelude::*;

    fn trivial() -> BlockPartition {
        BlockPartition::trivial(SampleSpace::indexed(2).unwrap())
    }

    fn raw(left: f64, right: f64, intercept: f64, slope: f64) -> RawSegment {
        RawSegment {
            left,
            right,
            intercept,
            slope,
        }
    }

    fn unwrap_block(e: DistortionError) -> DistortionError {
        match e {
            DistortionError::InBlock { source, .. } => *source,
            other => other,
        }
    }

    #[test]
    fn identity_is_valid() {
        let d = build_distortion(trivial(), &[vec![raw(0.0, 1.0, 0.0, 1.0)]]).unwrap();
        assert_eq!(eval_distortion(&d, 0, 0.42).unwrap(), 0.42);
    }

    #[test]
    fn unnormalised_curve_is_rejected() {
        let err = build_distortion(trivial(), &[vec![raw(0.0, 1.0, 0.0, 0.9)]]).unwrap_err();
        assert!(matches!(
            unwrap_block(err),
            DistortionError::NotNormalized { at, .. } if at == 1.0
        ));
    }

    #[test]
    fn downward_jump_is_rejected_with_witness() {
        let err = build_distortion(
            trivial(),
            &[vec![raw(0.0, 0.5, 0.0, 1.0), raw(0.5, 1.0, -0.2, 1.0)]],
        )
        .unwrap_err();
        match unwrap_block(err) {
            DistortionError::NotMonotone {
                lo,
                hi,
                lo_value,
                hi_value,
            } => {
                assert_eq!(lo, 0.5);
                assert!(hi > 0.5 && hi < 0.5 + 1e-15);
                assert!(lo_value > hi_value);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn gaps_and_overlaps_are_rejected() {
        let gap = build_distortion(
            trivial(),
            &[vec![raw(0.0, 0.4, 0.0, 0.0), raw(0.5, 1.0, 1.0, 0.0)]],
        )
        .unwrap_err();
        assert!(matches!(unwrap_block(gap), DistortionError::GapOrOverlap { .. }));
        let short = build_distortion(trivial(), &[vec![raw(0.0, 0.9, 0.0, 1.0)]]).unwrap_err();
        assert!(matches!(unwrap_block(short), DistortionError::GapOrOverlap { .. }));
        let count = build_distortion(trivial(), &[]).unwrap_err();
        assert!(matches!(count, DistortionError::BlockCountMismatch { .. }));
    }

    #[test]
    fn var_boundary_belongs_to_the_lower_piece() {
        let var = DistortionCurve::var(0.3).unwrap();
        assert_eq!(var.eval(0.7).unwrap(), 0.0);
        assert_eq!(var.eval(0.71).unwrap(), 1.0);
        assert_eq!(var.eval(0.0).unwrap(), 0.0);
        assert_eq!(var.eval(1.0).unwrap(), 1.0);
    }

    #[test]
    fn avar_values() {
        assert_eq!(DistortionCurve::avar(0.5).unwrap().eval(0.3).unwrap(), 0.6);
        assert_eq!(DistortionCurve::avar(0.25).unwrap().eval(0.75).unwrap(), 1.0);
    }

    #[test]
    fn levels_outside_unit_interval_are_rejected() {
        for alpha in [0.0, 1.0, 1.5, -0.1, f64::NAN] {
            assert!(matches!(
                DistortionCurve::var(alpha),
                Err(DistortionError::InvalidLevel(_))
            ));
        }
        let err = builtin_distortion(trivial(), &[BuiltinKind::Avar(1.0)]).unwrap_err();
        assert!(matches!(err, DistortionError::InvalidLevel(_)));
    }

    #[test]
    fn evaluation_outside_domain_fails() {
        let id = DistortionCurve::identity();
        assert_eq!(id.eval(1.5), Err(DistortionError::OutOfDomain(1.5)));
        assert_eq!(id.eval(-0.1), Err(DistortionError::OutOfDomain(-0.1)));
    }

    #[test]
    fn concavity_of_builtins() {
        let g = trivial();
        let avar = builtin_distortion(g.clone(), &[BuiltinKind::Avar(0.5)]).unwrap();
        assert_eq!(
            is_concave(&avar),
            vec![Concavity {
                concave: true,
                at_zero_plus: 0.0
            }]
        );
        let var = builtin_distortion(g.clone(), &[BuiltinKind::Var(0.3)]).unwrap();
        assert!(!is_concave(&var)[0].concave);
        let id = builtin_distortion(g, &[BuiltinKind::Identity]).unwrap();
        assert!(is_concave(&id)[0].concave);
    }

    #[test]
    fn jump_at_zero_is_concave() {
        let c = DistortionCurve::new(vec![Segment::affine(0.0, 1.0, 0.5, 0.5)]).unwrap();
        assert!(c.is_concave());
        assert_eq!(c.at_zero_plus(), 0.5);
        assert_eq!(c.value(0.0), 0.0);
    }

    #[test]
    fn knots_round_trip_through_spec() {
        let c = DistortionCurve::from_knots(&[0.0, 0.3, 1.0], &[0.1, 0.6], &[0.0, 0.5, 1.0])
            .unwrap();
        assert_eq!(c.to_spec().build().unwrap(), c);
        assert!(matches!(
            DistortionCurve::from_knots(&[0.0, 1.0], &[0.0], &[0.2, 1.0]),
            Err(DistortionError::NotNormalized { at, .. }) if at == 0.0
        ));
        assert!(matches!(
            DistortionCurve::from_knots(&[0.0, 1.0], &[0.0, 0.0], &[0.0, 1.0]),
            Err(DistortionError::Malformed(_))
        ));
    }

    #[test]
    fn right_slope_uses_the_next_segment_at_knots() {
        let c = DistortionCurve::avar(0.5).unwrap();
        assert_eq!(c.right_slope(0.0), 2.0);
        assert_eq!(c.right_slope(0.25), 2.0);
        assert_eq!(c.right_slope(0.5), 0.0);
    }

    #[test]
    fn spec_json_shapes() {
        let spec: DistortionSpec = serde_json::from_str(r#"{"kind":"var","alpha":0.3}"#).unwrap();
        assert_eq!(spec, DistortionSpec::Var { alpha: 0.3 });
        let seg: DistortionSpec = serde_json::from_str(
            r#"{"kind":"segments","knots":[0,1],"values-right-limit":[0],"values-at-knot":[0,1]}"#,
        )
        .unwrap();
        assert_eq!(seg.build().unwrap(), DistortionCurve::identity());
    }

    proptest! {
        #[test]
        fn builtins_match_closed_forms(k in 1u32..100, i in 0u32..=1000) {
            let alpha = f64::from(k) / 100.0;
            let t = f64::from(i) / 1000.0;
            let var = DistortionCurve::var(alpha).unwrap();
            let avar = DistortionCurve::avar(alpha).unwrap();
            let indicator = if t > 1.0 - alpha { 1.0 } else { 0.0 };
            prop_assert_eq!(var.value(t), indicator);
            let closed = t.min(1.0 - alpha) / (1.0 - alpha);
            prop_assert!((avar.value(t) - closed).abs() <= 1e-15);
            prop_assert!(avar.is_concave());
            prop_assert!(!var.is_concave());
        }

        #[test]
        fn random_curves_are_monotone(
            mut knots in proptest::collection::vec(0.001f64..0.999, 0..5),
            mut levels in proptest::collection::vec(0.0f64..=1.0, 10),
        ) {
            knots.sort_by(f64::total_cmp);
            knots.dedup();
            let m = knots.len() + 1;
            levels.truncate(2 * m);
            levels.sort_by(f64::total_cmp);
            let mut all = vec![0.0];
            all.extend(&knots);
            all.push(1.0);
            let mut at = vec![0.0];
            let mut right = Vec::new();
            for j in 0..m {
                right.push(levels[2 * j]);
                at.push(if j + 1 == m { 1.0 } else { levels[2 * j + 1] });
            }
            let c = DistortionCurve::from_knots(&all, &right, &at).unwrap();
            let mut probes: Vec<f64> = (0..=1000).map(|i| f64::from(i) / 1000.0).collect();
            for &k in &knots {
                probes.extend([k, k - 1e-9, k + 1e-9]);
            }
            probes.sort_by(f64::total_cmp);
            let vals: Vec<f64> = probes.iter().map(|&t| c.value(t)).collect();
            prop_assert!(vals.windows(2).all(|w| w[0] <= w[1] + TOL));
            prop_assert_eq!(c.value(0.0), 0.0);
            prop_assert_eq!(c.value(1.0), 1.0);
        }
    }
}
