//! First-order and stop-loss dominance with respect to a capacity, and a
//! sampled falsifier for the increasing-convex order.
//!
//! First-order dominance is decided from distribution functions alone. For a
//! non-decreasing `u`, every upper level set `{u(X) > z}` equals `{X > a}` or
//! `{X ≥ a}` for some `a`, and `c({X ≥ a}) = 1 − G_X(a−)`. So `E_c(u(X))` is
//! a functional of `G_X`, and `G_X ≥ G_Y` pointwise yields
//! `c(u(X) > z) ≤ c(u(Y) > z)` for every `z`. The converse direction uses
//! the indicators `u = 1_{(x, ∞)}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::capacity::Capacity;
use crate::choquet::choquet;
use crate::distortion::{segment_index, Segment};
use crate::space::{ensure_same, Position, SpaceError};
use crate::step::{distribution_function, quantiles, Continuity, Quantiles};

/// Falsifier margin: a utility is a witness when `E_c(u(X)) > E_c(u(Y)) + ICX_MARGIN`.
pub const ICX_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OrderError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(
        "stop-loss characterizations disagree: survival integrals say {survival}, quantile tails say {quantile}"
    )]
    CharacterizationMismatch { survival: bool, quantile: bool },
    #[error("invalid weight curve: {0}")]
    InvalidWeight(String),
    #[error("invalid utility: {0}")]
    InvalidUtility(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    pub x: f64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DominanceVerdict {
    pub holds: bool,
    pub witness: Option<Witness>,
}

impl DominanceVerdict {
    fn from_witness(witness: Option<Witness>) -> Self {
        DominanceVerdict {
            holds: witness.is_none(),
            witness,
        }
    }
}

fn breakpoint_union(x: &Position, y: &Position) -> Vec<f64> {
    let mut pts = x.distinct_values();
    pts.extend(y.distinct_values());
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// `X ⪯_{st,c} Y` iff `G_X(x) ≥ G_Y(x)` for all `x`. Both sides are
/// right-continuous steps, so the union of breakpoints suffices. The witness
/// reports `lhs = G_X(x)` and `rhs = G_Y(x)`.
pub fn dominates_st(x: &Position, y: &Position, c: &Capacity) -> Result<DominanceVerdict, OrderError> {
    ensure_same(x.space(), y.space())?;
    let gx = distribution_function(x, c)?;
    let gy = distribution_function(y, c)?;
    let witness = breakpoint_union(x, y).into_iter().find_map(|t| {
        let (lhs, rhs) = (gx.eval(t), gy.eval(t));
        (lhs < rhs).then_some(Witness { x: t, lhs, rhs })
    });
    Ok(DominanceVerdict::from_witness(witness))
}

/// Upper level sets of `X` as `(v_j, c(X > v_j))`, ascending in `v`.
fn survival_steps(x: &Position, c: &Capacity) -> Vec<(f64, f64)> {
    x.distinct_values()
        .into_iter()
        .map(|v| (v, c.value(x.exceeds(v))))
        .collect()
}

/// `∫_b^∞ c(X > z) dz` from precomputed survival steps.
fn survival_integral(steps: &[(f64, f64)], b: f64) -> f64 {
    let lo = steps[0].0;
    let mut total = if b < lo { lo - b } else { 0.0 };
    for w in steps.windows(2) {
        let (v, s) = w[0];
        let start = v.max(b);
        if w[1].0 > start {
            total += (w[1].0 - start) * s;
        }
    }
    total
}

/// `E_c((X − b)^+) = ∫_b^∞ c(X > z) dz`.
pub fn stop_loss(x: &Position, c: &Capacity, b: f64) -> Result<f64, OrderError> {
    ensure_same(x.space(), c.space())?;
    Ok(survival_integral(&survival_steps(x, c), b))
}

fn sl_tolerance(x: &Position, y: &Position) -> f64 {
    1e-12 * (1.0 + x.sup_norm().max(y.sup_norm())) * (x.space().len() as f64 + 1.0)
}

/// Stop-loss comparison through integrated survival functions. Both sides
/// are piecewise affine with kinks at the breakpoints, and agree in slope
/// below the smaller minimum, so the union of breakpoints suffices.
pub fn sl_by_survival(x: &Position, y: &Position, c: &Capacity) -> Result<DominanceVerdict, OrderError> {
    ensure_same(x.space(), y.space())?;
    ensure_same(x.space(), c.space())?;
    let (sx, sy) = (survival_steps(x, c), survival_steps(y, c));
    let tol = sl_tolerance(x, y);
    let witness = breakpoint_union(x, y).into_iter().find_map(|b| {
        let (lhs, rhs) = (survival_integral(&sx, b), survival_integral(&sy, b));
        (lhs > rhs + tol).then_some(Witness { x: b, lhs, rhs })
    });
    Ok(DominanceVerdict::from_witness(witness))
}

fn tail_integral(q: &Quantiles, which: Continuity, alpha: f64) -> f64 {
    let f = match which {
        Continuity::Right => &q.upper,
        Continuity::Left => &q.lower,
    };
    f.plateaus_within(alpha, 1.0)
        .into_iter()
        .map(|(p, r, v)| v * (r - p))
        .sum()
}

/// Stop-loss comparison through quantile tails `∫_α^1 r(u) du`, checked at
/// `α = 0` and at every plateau boundary of either quantile function.
/// `which` selects `r^+` (right) or `r^-` (left); the verdict is the same.
pub fn sl_by_quantiles(
    x: &Position,
    y: &Position,
    c: &Capacity,
    which: Continuity,
) -> Result<DominanceVerdict, OrderError> {
    ensure_same(x.space(), y.space())?;
    let (qx, qy) = (quantiles(x, c)?, quantiles(y, c)?);
    let mut alphas = vec![0.0];
    alphas.extend(qx.upper.breakpoints());
    alphas.extend(qy.upper.breakpoints());
    alphas.sort_by(f64::total_cmp);
    alphas.dedup();
    let tol = sl_tolerance(x, y);
    let witness = alphas.into_iter().find_map(|a| {
        let (lhs, rhs) = (tail_integral(&qx, which, a), tail_integral(&qy, which, a));
        (lhs > rhs + tol).then_some(Witness { x: a, lhs, rhs })
    });
    Ok(DominanceVerdict::from_witness(witness))
}

/// `X ⪯_{sl,c} Y`. Decided by integrated survival functions and confirmed
/// against quantile tails; the witness is the first failing strike `b`.
pub fn dominates_sl(x: &Position, y: &Position, c: &Capacity) -> Result<DominanceVerdict, OrderError> {
    let survival = sl_by_survival(x, y, c)?;
    let quantile = sl_by_quantiles(x, y, c, Continuity::Right)?;
    if survival.holds != quantile.holds {
        return Err(OrderError::CharacterizationMismatch {
            survival: survival.holds,
            quantile: quantile.holds,
        });
    }
    Ok(survival)
}

/// Non-negative, non-decreasing piecewise-affine weight on `[0,1]`, affine
/// on each `(left, right]`; jumps are allowed at knots.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightCurve {
    segments: Vec<Segment>,
}

impl WeightCurve {
    pub fn new(segments: Vec<Segment>) -> Result<Self, OrderError> {
        crate::distortion::check_tiling(&segments)
            .map_err(|e| OrderError::InvalidWeight(e.to_string()))?;
        let mut prev = 0.0;
        for s in &segments {
            if !(s.start.is_finite() && s.end.is_finite()) {
                return Err(OrderError::InvalidWeight("non-finite value".into()));
            }
            if s.start < 0.0 {
                return Err(OrderError::InvalidWeight(format!(
                    "negative value {} at {}+",
                    s.start, s.left
                )));
            }
            if s.start < prev || s.end < s.start {
                return Err(OrderError::InvalidWeight(format!(
                    "decreasing on ({}, {}]",
                    s.left, s.right
                )));
            }
            prev = s.end;
        }
        Ok(WeightCurve { segments })
    }

    pub fn constant(k: f64) -> Result<Self, OrderError> {
        WeightCurve::new(vec![Segment::affine(0.0, 1.0, k, 0.0)])
    }

    /// `lo` on `(0, at]`, `hi` on `(at, 1]`.
    pub fn step(at: f64, lo: f64, hi: f64) -> Result<Self, OrderError> {
        WeightCurve::new(vec![
            Segment::affine(0.0, at, lo, 0.0),
            Segment::affine(at, 1.0, hi, 0.0),
        ])
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn value(&self, t: f64) -> f64 {
        self.segments[segment_index(&self.segments, t)].at(t)
    }
}

/// `∫_0^1 g(t) r_X^+(t) dt`, exact over the common refinement.
pub fn weighted_quantile_integral(x: &Position, c: &Capacity, g: &WeightCurve) -> Result<f64, OrderError> {
    let q = quantiles(x, c)?;
    Ok(weighted_with(&q, g))
}

/// Block-wise weights: one curve per block, evaluated against the same
/// quantile function.
pub fn weighted_quantile_integral_blocks(
    x: &Position,
    c: &Capacity,
    gs: &[WeightCurve],
) -> Result<Vec<f64>, OrderError> {
    let q = quantiles(x, c)?;
    Ok(gs.iter().map(|g| weighted_with(&q, g)).collect())
}

fn weighted_with(q: &Quantiles, g: &WeightCurve) -> f64 {
    g.segments
        .iter()
        .flat_map(|s| {
            q.upper
                .plateaus_within(s.left, s.right)
                .into_iter()
                .map(move |(p, r, v)| v * s.integral(p, r))
        })
        .sum()
}

/// Utilities used to probe the orders.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TestUtility {
    /// `1_{z > threshold}`.
    Indicator { threshold: f64 },
    /// `(z − strike)^+`.
    Call { strike: f64 },
    /// `s_0 (z − k_1) + Σ_{i≥1} (s_i − s_{i−1}) (z − k_i)^+` with
    /// `0 ≤ s_0 ≤ s_1 ≤ …` and ascending knots.
    ConvexPiecewise { knots: Vec<f64>, slopes: Vec<f64> },
}

impl TestUtility {
    pub fn convex(knots: Vec<f64>, slopes: Vec<f64>) -> Result<Self, OrderError> {
        if knots.is_empty() || slopes.len() != knots.len() + 1 {
            return Err(OrderError::InvalidUtility(format!(
                "{} knots need {} slopes, got {}",
                knots.len(),
                knots.len() + 1,
                slopes.len()
            )));
        }
        if knots.windows(2).any(|w| w[0] >= w[1]) {
            return Err(OrderError::InvalidUtility("knots must increase".into()));
        }
        if slopes[0] < 0.0 || slopes.windows(2).any(|w| w[1] < w[0]) {
            return Err(OrderError::InvalidUtility(
                "slopes must be non-negative and non-decreasing".into(),
            ));
        }
        Ok(TestUtility::ConvexPiecewise { knots, slopes })
    }

    pub fn apply(&self, z: f64) -> f64 {
        match self {
            TestUtility::Indicator { threshold } => f64::from(u8::from(z > *threshold)),
            TestUtility::Call { strike } => (z - strike).max(0.0),
            TestUtility::ConvexPiecewise { knots, slopes } => {
                let mut u = slopes[0] * (z - knots[0]);
                for i in 1..slopes.len() {
                    u += (slopes[i] - slopes[i - 1]) * (z - knots[i - 1]).max(0.0);
                }
                u
            }
        }
    }

    pub fn apply_position(&self, x: &Position) -> Position {
        x.map(|z| self.apply(z)).expect("finite utility")
    }
}

/// `E_c(u(X)) − E_c(u(Y))` for one utility.
pub fn utility_gap(u: &TestUtility, x: &Position, y: &Position, c: &Capacity) -> f64 {
    let ex = choquet(&u.apply_position(x), c).expect("shared space");
    let ey = choquet(&u.apply_position(y), c).expect("shared space");
    ex - ey
}

/// Searches for a convex non-decreasing `u` with `E_c(u(X)) > E_c(u(Y))`.
/// Calls at every breakpoint are tried first, then `trials` random convex
/// ladders. `None` is not a proof of dominance.
pub fn falsify_icx(
    x: &Position,
    y: &Position,
    c: &Capacity,
    trials: usize,
    seed: u64,
) -> Result<Option<TestUtility>, OrderError> {
    ensure_same(x.space(), y.space())?;
    ensure_same(x.space(), c.space())?;
    let pts = breakpoint_union(x, y);
    for &b in &pts {
        let u = TestUtility::Call { strike: b };
        if utility_gap(&u, x, y, c) > ICX_MARGIN {
            return Ok(Some(u));
        }
    }
    let (lo, hi) = (pts[0], pts[pts.len() - 1]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let u = random_convex_utility(&mut rng, lo, hi);
        if utility_gap(&u, x, y, c) > ICX_MARGIN {
            return Ok(Some(u));
        }
    }
    Ok(None)
}

/// Random convex non-decreasing ladder with knots in `[lo, hi]`.
pub fn random_convex_utility<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> TestUtility {
    let k = rng.gen_range(1..=4);
    let mut knots: Vec<f64> = (0..k)
        .map(|_| if hi > lo { rng.gen_range(lo..=hi) } else { lo })
        .collect();
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let mut slopes = Vec::with_capacity(knots.len() + 1);
    let mut s = if rng.gen_bool(0.5) { 0.0 } else { rng.gen_range(0.0..1.0) };
    slopes.push(s);
    for _ in 0..knots.len() {
        s += rng.gen_range(0.0..2.0);
        slopes.push(s);
    }
    TestUtility::ConvexPiecewise { knots, slopes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{Event, SampleSpace};

    fn uniform4(v: &[f64], w: &[f64]) -> (Position, Position, Capacity) {
        let s = SampleSpace::new(["a", "b", "c", "d"]).unwrap();
        (
            Position::new(s.clone(), v.to_vec()).unwrap(),
            Position::new(s.clone(), w.to_vec()).unwrap(),
            Capacity::uniform(s),
        )
    }

    #[test]
    fn st_failure_fixture() {
        let (x, y, c) = uniform4(&[2.0, 0.0, 0.0, 0.0], &[0.0, 1.0, 1.0, 1.0]);
        let v = dominates_st(&x, &y, &c).unwrap();
        assert!(!v.holds);
        let w = v.witness.unwrap();
        assert_eq!((w.lhs, w.rhs), (0.75, 1.0));
        // The failure persists on the whole plateau [1, 2).
        assert!(w.x >= 1.0 && w.x < 2.0);
        assert!(dominates_st(&x, &x, &c).unwrap().holds);
        assert!(dominates_st(&x, &x.shift(0.5), &c).unwrap().holds);
    }

    #[test]
    fn sl_fixtures() {
        let (x, y, c) = uniform4(&[2.0, 0.0, 0.0, 0.0], &[0.0, 1.0, 1.0, 1.0]);
        let v = dominates_sl(&x, &y, &c).unwrap();
        assert!(!v.holds);
        assert_eq!(stop_loss(&x, &c, 1.0).unwrap(), 0.25);
        assert_eq!(stop_loss(&y, &c, 1.0).unwrap(), 0.0);
        assert_eq!(v.witness.unwrap().x, 1.0);
        assert!(dominates_sl(&x, &x.shift(1.0), &c).unwrap().holds);
        let u = falsify_icx(&x, &y, &c, 10, 0).unwrap().unwrap();
        assert_eq!(u, TestUtility::Call { strike: 1.0 });
        assert!(falsify_icx(&x, &x, &c, 50, 3).unwrap().is_none());
    }

    #[test]
    fn sl_input_from_concave_proof() {
        let s = SampleSpace::indexed(8).unwrap();
        let c = Capacity::uniform(s.clone());
        let top = |k: usize| Event::from_atoms(0..k);
        let x = Position::indicator(s.clone(), top(2), 0.5)
            .add(&Position::indicator(s.clone(), top(4), 0.5))
            .unwrap();
        let y = Position::indicator(s, top(3), 1.0);
        assert!(dominates_sl(&x, &y, &c).unwrap().holds);
        assert!(sl_by_quantiles(&x, &y, &c, Continuity::Left).unwrap().holds);
    }

    #[test]
    fn weighted_integrals() {
        let (x, _, c) = uniform4(&[0.0, 1.0, 2.0, 3.0], &[0.0; 4]);
        let one = WeightCurve::constant(1.0).unwrap();
        assert_eq!(weighted_quantile_integral(&x, &c, &one).unwrap(), 1.5);
        let tail = WeightCurve::step(0.5, 0.0, 2.0).unwrap();
        assert_eq!(weighted_quantile_integral(&x, &c, &tail).unwrap(), 2.5);
        let k = Position::constant(x.space().clone(), -2.0);
        let ramp = WeightCurve::new(vec![Segment::affine(0.0, 1.0, 0.0, 3.0)]).unwrap();
        assert_eq!(weighted_quantile_integral(&k, &c, &ramp).unwrap(), -3.0);
        assert_eq!(
            weighted_quantile_integral_blocks(&x, &c, &[one, tail]).unwrap(),
            vec![1.5, 2.5]
        );
        assert!(WeightCurve::step(0.5, 2.0, 1.0).is_err());
        assert!(WeightCurve::constant(-1.0).is_err());
    }

    #[test]
    fn utilities() {
        let u = TestUtility::convex(vec![0.0, 1.0], vec![0.0, 1.0, 3.0]).unwrap();
        assert_eq!(u.apply(-1.0), 0.0);
        assert_eq!(u.apply(0.5), 0.5);
        assert_eq!(u.apply(2.0), 4.0);
        assert!(TestUtility::convex(vec![0.0], vec![1.0, 0.5]).is_err());
        assert!(TestUtility::convex(vec![0.0], vec![1.0]).is_err());
        assert_eq!(TestUtility::Indicator { threshold: 1.0 }.apply(1.0), 0.0);
    }
}
