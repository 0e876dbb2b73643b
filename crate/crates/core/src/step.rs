//! Step functions, distribution functions and quantile functions with
//! respect to a capacity.

use serde::Serialize;

use crate::capacity::Capacity;
use crate::space::{ensure_same, Position, SpaceError};

/// Which side of each breakpoint carries the new plateau value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Continuity {
    /// `v_j` on `[t_j, t_{j+1})`.
    Right,
    /// `v_j` on `(t_j, t_{j+1}]`.
    Left,
}

/// Non-decreasing piecewise-constant function with finitely many jumps.
///
/// `values[0]` is taken on `(-∞, t_1)` and `values[k]` on `[t_k, ∞)` (for
/// right continuity; left continuity closes intervals on the right instead).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    continuity: Continuity,
}

impl StepFunction {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>, continuity: Continuity) -> Self {
        assert_eq!(values.len(), breakpoints.len() + 1, "one plateau per gap");
        debug_assert!(breakpoints.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(values.windows(2).all(|w| w[0] <= w[1]));
        StepFunction {
            breakpoints,
            values,
            continuity,
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn continuity(&self) -> Continuity {
        self.continuity
    }

    pub fn eval(&self, x: f64) -> f64 {
        let j = match self.continuity {
            Continuity::Right => self.breakpoints.partition_point(|&t| t <= x),
            Continuity::Left => self.breakpoints.partition_point(|&t| t < x),
        };
        self.values[j]
    }

    /// `f(x-)`.
    pub fn left_limit(&self, x: f64) -> f64 {
        self.values[self.breakpoints.partition_point(|&t| t < x)]
    }

    /// `f(x+)`.
    pub fn right_limit(&self, x: f64) -> f64 {
        self.values[self.breakpoints.partition_point(|&t| t <= x)]
    }

    /// Plateau intervals `(lo, hi, value)` between consecutive breakpoints,
    /// restricted to `[lo, hi]`.
    pub fn plateaus_within(&self, lo: f64, hi: f64) -> Vec<(f64, f64, f64)> {
        let mut cuts = vec![lo];
        cuts.extend(self.breakpoints.iter().copied().filter(|&t| t > lo && t < hi));
        cuts.push(hi);
        cuts.windows(2)
            .map(|w| (w[0], w[1], self.eval(0.5 * (w[0] + w[1]))))
            .collect()
    }
}

/// `G_X(x) = 1 - c(X > x)`; breakpoints are the distinct values of `X`.
pub fn distribution_function(x: &Position, c: &Capacity) -> Result<StepFunction, SpaceError> {
    ensure_same(x.space(), c.space())?;
    let breakpoints = x.distinct_values();
    let mut values = Vec::with_capacity(breakpoints.len() + 1);
    values.push(0.0);
    for &t in &breakpoints {
        values.push(1.0 - c.value(x.exceeds(t)));
    }
    // Keep plateaus monotone against cancellation in `1 - c`.
    for j in 1..values.len() {
        if values[j] < values[j - 1] {
            values[j] = values[j - 1];
        }
    }
    Ok(StepFunction::new(breakpoints, values, Continuity::Right))
}

/// Lower and upper quantile functions with their endpoint extensions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quantiles {
    /// `r^-(t) = inf{x : G(x) ≥ t}` on `(0,1)`, left-continuous.
    pub lower: StepFunction,
    /// `r^+(t) = inf{x : G(x) > t}` on `(0,1)`, right-continuous.
    pub upper: StepFunction,
    /// `r(0) = inf_{t>0} r^+(t)`.
    pub at_zero: f64,
    /// `r(1) = sup_{t<1} r^-(t)`.
    pub at_one: f64,
}

impl Quantiles {
    pub fn lower_at(&self, t: f64) -> f64 {
        self.read(&self.lower, t)
    }

    pub fn upper_at(&self, t: f64) -> f64 {
        self.read(&self.upper, t)
    }

    fn read(&self, f: &StepFunction, t: f64) -> f64 {
        if t <= 0.0 {
            self.at_zero
        } else if t >= 1.0 {
            self.at_one
        } else {
            f.eval(t)
        }
    }

    /// `∫_a^b r^+(t) dt` for `0 ≤ a ≤ b ≤ 1`, exact.
    pub fn upper_integral(&self, a: f64, b: f64) -> f64 {
        self.upper
            .plateaus_within(a, b)
            .into_iter()
            .map(|(p, q, v)| v * (q - p))
            .sum()
    }
}

pub fn quantiles(x: &Position, c: &Capacity) -> Result<Quantiles, SpaceError> {
    let g = distribution_function(x, c)?;
    Ok(quantiles_of(&g))
}

/// Generalised inverses of a distribution step function `g`.
pub fn quantiles_of(g: &StepFunction) -> Quantiles {
    let xs = g.breakpoints();
    // Plateau value at and after breakpoint j.
    let levels = &g.values()[1..];
    let first_with = |pred: &dyn Fn(f64) -> bool| -> f64 {
        xs[levels.iter().position(|&v| pred(v)).unwrap_or(xs.len() - 1)]
    };
    let at_zero = first_with(&|v| v > 0.0);
    let at_one = first_with(&|v| v >= 1.0);

    // Distinct levels strictly inside (0,1) are where the quantiles jump.
    let mut cuts: Vec<f64> = levels
        .iter()
        .copied()
        .filter(|&v| v > 0.0 && v < 1.0)
        .collect();
    cuts.dedup();
    let mut lower_vals = Vec::with_capacity(cuts.len() + 1);
    let mut upper_vals = Vec::with_capacity(cuts.len() + 1);
    // Plateau between cuts: pick a representative level and invert.
    let mut edges = vec![0.0];
    edges.extend(&cuts);
    edges.push(1.0);
    for w in edges.windows(2) {
        let t = 0.5 * (w[0] + w[1]);
        lower_vals.push(first_with(&|v| v >= t));
        upper_vals.push(first_with(&|v| v > t));
    }
    Quantiles {
        lower: StepFunction::new(cuts.clone(), lower_vals, Continuity::Left),
        upper: StepFunction::new(cuts, upper_vals, Continuity::Right),
        at_zero,
        at_one,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::validate_capacity;
    use crate::space::{Event, SampleSpace};
    use proptest::prelude::*;
    use std::sync::Arc;

    fn abcd() -> Arc<SampleSpace> {
        SampleSpace::new(["a", "b", "c", "d"]).unwrap()
    }

    fn squared_counting(space: Arc<SampleSpace>) -> Capacity {
        let n = space.len() as f64;
        let table = (0..1u32 << space.len())
            .map(|b| (f64::from(b.count_ones()) / n).powi(2))
            .collect();
        validate_capacity(space, table).unwrap()
    }

    fn fixture(space: &Arc<SampleSpace>) -> Position {
        Position::new(space.clone(), vec![3.0, 1.0, 1.0, 0.0]).unwrap()
    }

    #[test]
    fn constant_position_jumps_once() {
        let space = abcd();
        let g = distribution_function(&Position::constant(space.clone(), 2.0), &Capacity::uniform(space))
            .unwrap();
        assert_eq!(g.breakpoints(), &[2.0]);
        assert_eq!(g.values(), &[0.0, 1.0]);
        assert_eq!(g.eval(1.999), 0.0);
        assert_eq!(g.eval(2.0), 1.0);
    }

    #[test]
    fn uniform_fixture_plateaus() {
        let space = abcd();
        let g = distribution_function(&fixture(&space), &Capacity::uniform(space)).unwrap();
        assert_eq!(g.breakpoints(), &[0.0, 1.0, 3.0]);
        assert_eq!(g.values(), &[0.0, 0.25, 0.75, 1.0]);
        assert_eq!(g.eval(-1.0), 0.0);
        assert_eq!(g.eval(0.5), 0.25);
        assert_eq!(g.eval(2.9), 0.75);
        assert_eq!(g.left_limit(3.0), 0.75);
    }

    #[test]
    fn squared_counting_fixture_plateaus() {
        let space = abcd();
        let g = distribution_function(&fixture(&space), &squared_counting(space)).unwrap();
        assert_eq!(g.values(), &[0.0, 7.0 / 16.0, 15.0 / 16.0, 1.0]);
    }

    #[test]
    fn fixture_quantiles() {
        let space = abcd();
        let q = quantiles(&fixture(&space), &Capacity::uniform(space)).unwrap();
        assert_eq!(q.lower_at(0.5), 1.0);
        assert_eq!(q.upper_at(0.75), 3.0);
        assert_eq!(q.lower_at(0.25), 0.0);
        assert_eq!(q.upper_at(0.25), 1.0);
        assert_eq!(q.at_zero, 0.0);
        assert_eq!(q.at_one, 3.0);
    }

    #[test]
    fn constant_quantiles() {
        let space = abcd();
        let q = quantiles(&Position::constant(space.clone(), -4.5), &Capacity::uniform(space)).unwrap();
        for i in 0..=10 {
            let t = f64::from(i) / 10.0;
            assert_eq!(q.lower_at(t), -4.5);
            assert_eq!(q.upper_at(t), -4.5);
        }
    }

    #[test]
    fn null_top_level_set_moves_the_right_endpoint() {
        // c({X > 0}) = 0 for the necessity capacity unless {X > 0} = Ω.
        let space = abcd();
        let table = (0..16u32).map(|b| if b == 15 { 1.0 } else { 0.0 }).collect();
        let c = validate_capacity(space.clone(), table).unwrap();
        let x = Position::new(space, vec![5.0, 0.0, 0.0, 0.0]).unwrap();
        let q = quantiles(&x, &c).unwrap();
        assert_eq!(q.at_one, 0.0);
        assert_eq!(q.upper_at(0.99), 0.0);
    }

    #[test]
    fn upper_integral_of_fixture() {
        let space = abcd();
        let x = Position::new(space.clone(), vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let q = quantiles(&x, &Capacity::uniform(space)).unwrap();
        assert_eq!(q.upper_integral(0.0, 1.0), 1.5);
        assert_eq!(q.upper_integral(0.5, 1.0), 1.25);
    }

    fn random_capacity_table(n: usize, raw: &[f64]) -> Vec<f64> {
        let mut table = vec![0.0; 1 << n];
        for bits in 1..(1usize << n) {
            let e = Event::from_bits(bits as u32);
            let floor = e
                .atoms()
                .map(|i| table[e.without(i).index()])
                .fold(0.0, f64::max);
            table[bits] = floor + raw[bits % raw.len()];
        }
        let top = table[(1 << n) - 1];
        table.iter().map(|v| v / top).collect()
    }

    proptest! {
        #[test]
        fn quantile_invariants(
            n in 1usize..6,
            raw in proptest::collection::vec(0.0f64..1.0, 8),
            vals in proptest::collection::vec(-3i32..4, 6),
        ) {
            prop_assume!(raw.iter().any(|&r| r > 0.0));
            let space = SampleSpace::indexed(n).unwrap();
            let c = validate_capacity(space.clone(), random_capacity_table(n, &raw)).unwrap();
            let x = Position::new(space, vals[..n].iter().map(|&v| f64::from(v)).collect()).unwrap();
            let g = distribution_function(&x, &c).unwrap();
            prop_assert!(g.values().windows(2).all(|w| w[0] <= w[1]));
            prop_assert_eq!(g.values()[0], 0.0);
            prop_assert_eq!(*g.values().last().unwrap(), 1.0);
            let q = quantiles_of(&g);
            let mut prev = (f64::NEG_INFINITY, f64::NEG_INFINITY);
            for i in 1..1000 {
                let t = f64::from(i) / 1000.0;
                let (lo, up) = (q.lower_at(t), q.upper_at(t));
                prop_assert!(lo <= up);
                prop_assert!(lo >= prev.0 && up >= prev.1);
                prev = (lo, up);
                for r in [lo, up] {
                    prop_assert!(g.left_limit(r) <= t && t <= g.right_limit(r));
                }
                // Defining infima.
                prop_assert!(g.eval(lo) >= t);
                prop_assert!(g.breakpoints().iter().filter(|&&b| b < lo).all(|&b| g.eval(b) < t));
                prop_assert!(g.eval(up) > t);
                prop_assert!(g.breakpoints().iter().filter(|&&b| b < up).all(|&b| g.eval(b) <= t));
            }
            prop_assert!(q.at_zero <= q.upper_at(1e-9));
            prop_assert!(q.at_one >= q.lower_at(1.0 - 1e-9));
        }
    }
}
