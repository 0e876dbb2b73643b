//! Randomly distorted Choquet integrals.
//!
//! For `X` with distinct values `v_1 > … > v_m` and upper level sets
//! `U_i = {X ≥ v_i}`, block `b` of the conditional value is
//!
//! ```text
//! v_m + Σ_{i<m} (v_i − v_{i+1}) φ_b(c(U_i))
//! ```
//!
//! which is the non-negative step formula applied to `X − min X`, with the
//! minimum added back by translation invariance.

use serde::Serialize;
use thiserror::Error;

use crate::capacity::Capacity;
use crate::distortion::{segment_index, RandomDistortion};
use crate::space::{
    ensure_same, same_space, BlockPartition, Event, Position, SpaceError,
};
use crate::step::quantiles;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChoquetError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("distortion is defined on a different partition")]
    PartitionMismatch,
    #[error("distortion is not concave on block `{0}`")]
    NotConcave(String),
    #[error("positions are not comonotonic: atoms `{0}` and `{1}` are ordered oppositely")]
    NotComonotonic(String, String),
    #[error("position takes the negative value {value} at atom `{atom}`")]
    NegativeInput { atom: String, value: f64 },
    #[error("grid step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("step representation is malformed: {0}")]
    MalformedForm(String),
}

/// A G-measurable value: one number per block.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalValue {
    partition: BlockPartition,
    values: Vec<f64>,
}

impl ConditionalValue {
    pub fn new(partition: BlockPartition, values: Vec<f64>) -> Self {
        assert_eq!(partition.len(), values.len(), "one value per block");
        ConditionalValue { partition, values }
    }

    pub fn partition(&self) -> &BlockPartition {
        &self.partition
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, block: usize) -> f64 {
        self.values[block]
    }

    /// `(block label, value)` pairs in block order.
    pub fn records(&self) -> Vec<BlockValue> {
        self.values
            .iter()
            .enumerate()
            .map(|(b, &value)| BlockValue {
                block: self.partition.label(b).to_string(),
                value,
            })
            .collect()
    }

    /// The value as a position constant on blocks.
    pub fn to_position(&self) -> Position {
        let space = self.partition.space().clone();
        let values = (0..space.len())
            .map(|a| self.values[self.partition.block_of(a)])
            .collect();
        Position::new(space, values).expect("finite block values")
    }

    /// `max_b |self_b − other_b|`.
    pub fn max_abs_diff(&self, other: &ConditionalValue) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockValue {
    pub block: String,
    pub value: f64,
}

fn check_inputs(x: &Position, c: &Capacity, d: &RandomDistortion) -> Result<(), ChoquetError> {
    ensure_same(x.space(), c.space())?;
    if !same_space(x.space(), d.partition().space()) {
        return Err(ChoquetError::PartitionMismatch);
    }
    Ok(())
}

/// Distinct values in descending order with the capacity of each upper
/// level set `{X ≥ v_i}`.
pub(crate) fn upper_levels(x: &Position, c: &Capacity) -> Vec<(f64, f64)> {
    let mut distinct = x.distinct_values();
    distinct.reverse();
    let mut level = Event::EMPTY;
    distinct
        .iter()
        .map(|&v| {
            for (i, &xi) in x.values().iter().enumerate() {
                if xi == v {
                    level = level.with(i);
                }
            }
            (v, c.value(level))
        })
        .collect()
}

/// `E_{φ^G ∘ c}(X)` by the exact step formula.
pub fn rd_choquet(
    x: &Position,
    c: &Capacity,
    d: &RandomDistortion,
) -> Result<ConditionalValue, ChoquetError> {
    check_inputs(x, c, d)?;
    let levels = upper_levels(x, c);
    let floor = levels.last().expect("non-empty space").0;
    let values = d
        .curves()
        .iter()
        .map(|curve| {
            floor
                + levels
                    .windows(2)
                    .map(|w| (w[0].0 - w[1].0) * curve.value(w[0].1))
                    .sum::<f64>()
        })
        .collect();
    Ok(ConditionalValue::new(d.partition().clone(), values))
}

/// Classical Choquet integral `E_c(X)`.
pub fn choquet(x: &Position, c: &Capacity) -> Result<f64, ChoquetError> {
    ensure_same(x.space(), c.space())?;
    let levels = upper_levels(x, c);
    let floor = levels.last().expect("non-empty").0;
    Ok(floor
        + levels
            .windows(2)
            .map(|w| (w[0].0 - w[1].0) * w[0].1)
            .sum::<f64>())
}

/// Step formula for `X = Σ x_i 1_{A_i}` with `x_1 ≥ … ≥ x_m ≥ 0` and the
/// `A_i` a partition: `Σ (x_i − x_{i+1}) φ(c(A_1 ∪ … ∪ A_i))`, `x_{m+1} = 0`.
pub fn step_formula(
    events: &[Event],
    xs: &[f64],
    c: &Capacity,
    d: &RandomDistortion,
) -> Result<ConditionalValue, ChoquetError> {
    if events.len() != xs.len() {
        return Err(ChoquetError::MalformedForm(format!(
            "{} events for {} values",
            events.len(),
            xs.len()
        )));
    }
    if xs.windows(2).any(|w| w[0] < w[1]) || xs.iter().any(|&v| v < 0.0) {
        return Err(ChoquetError::MalformedForm(
            "values must be non-negative and non-increasing".into(),
        ));
    }
    let mut union = Event::EMPTY;
    let caps: Vec<f64> = events
        .iter()
        .map(|&e| {
            union = union.union(e);
            c.value(union)
        })
        .collect();
    let values = d
        .curves()
        .iter()
        .map(|curve| {
            (0..xs.len())
                .map(|i| {
                    let next = xs.get(i + 1).copied().unwrap_or(0.0);
                    (xs[i] - next) * curve.value(caps[i])
                })
                .sum()
        })
        .collect();
    Ok(ConditionalValue::new(d.partition().clone(), values))
}

/// Midpoint-rule evaluation of the defining pair of integrals, as an
/// independent check on [`rd_choquet`].
///
/// The integrand is evaluated on `[min X − 1, max X + 1]`, split at `0`,
/// `min X` and `max X`; the integrand is constant outside that window and the
/// remaining stretch to `0` is added in closed form.
pub fn rd_choquet_oracle(
    x: &Position,
    c: &Capacity,
    d: &RandomDistortion,
    h: f64,
) -> Result<ConditionalValue, ChoquetError> {
    check_inputs(x, c, d)?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(ChoquetError::InvalidStep(h));
    }
    let (lo, hi) = (x.min() - 1.0, x.max() + 1.0);
    let mut cuts = vec![lo, x.min(), x.max(), hi];
    if lo < 0.0 && 0.0 < hi {
        cuts.push(0.0);
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let blocks = d.partition().len();
    // ∫_0^lo 1 dx when the window lies right of 0; ∫_hi^0 (0 − 1) dx when left.
    let tail = if lo > 0.0 { lo } else if hi < 0.0 { hi } else { 0.0 };
    let mut totals = vec![tail; blocks];
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let cells = ((b - a) / h).ceil().max(1.0) as usize;
        let step = (b - a) / cells as f64;
        for k in 0..cells {
            let mid = a + (k as f64 + 0.5) * step;
            let survival = c.value(x.exceeds(mid));
            let offset = if mid < 0.0 { 1.0 } else { 0.0 };
            for (b, t) in totals.iter_mut().enumerate() {
                *t += (d.curve(b).value(survival) - offset) * step;
            }
        }
    }
    Ok(ConditionalValue::new(d.partition().clone(), totals))
}

/// Dual quantile form for concave distortions:
/// `φ(0+) r^+(1) + ∫_0^1 φ'(1−t) r^+(t) dt`, with the integral summed exactly
/// over the common refinement of the quantile plateaus and the curve knots.
pub fn rd_choquet_concave_dual(
    x: &Position,
    c: &Capacity,
    d: &RandomDistortion,
) -> Result<ConditionalValue, ChoquetError> {
    check_inputs(x, c, d)?;
    for (b, curve) in d.curves().iter().enumerate() {
        if !curve.is_concave() {
            return Err(ChoquetError::NotConcave(d.partition().label(b).to_string()));
        }
    }
    let q = quantiles(x, c)?;
    let values = d
        .curves()
        .iter()
        .map(|curve| {
            let mut cuts: Vec<f64> = vec![0.0, 1.0];
            cuts.extend(q.upper.breakpoints());
            cuts.extend(curve.knots().iter().map(|k| 1.0 - k));
            cuts.retain(|&t| (0.0..=1.0).contains(&t));
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            let integral: f64 = cuts
                .windows(2)
                .filter(|w| w[1] > w[0])
                .map(|w| {
                    let mid = 0.5 * (w[0] + w[1]);
                    let seg = curve.segments()[segment_index(curve.segments(), 1.0 - mid)];
                    seg.slope() * q.upper_at(mid) * (w[1] - w[0])
                })
                .sum();
            curve.at_zero_plus() * q.at_one + integral
        })
        .collect();
    Ok(ConditionalValue::new(d.partition().clone(), values))
}
