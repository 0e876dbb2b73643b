//! Random instances for property checks and the axiom sampler.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::capacity::{validate_capacity, Capacity};
use crate::distortion::{DistortionCurve, RandomDistortion};
use crate::space::{BlockPartition, Event, Position, SampleSpace};

/// Random capacity on a space of at most 16 atoms. Events are filled in
/// increasing bit order as the largest value over immediate subsets plus a
/// non-negative increment (zero about a quarter of the time, so flat pieces
/// occur), then everything is divided by `c(Ω)`.
pub fn random_capacity<R: Rng>(rng: &mut R, space: &Arc<SampleSpace>) -> Capacity {
    let n = space.len();
    let mut table = vec![0.0f64; 1 << n];
    for bits in 1..table.len() {
        let floor = Event::from_bits(bits as u32)
            .atoms()
            .map(|a| table[bits & !(1 << a)])
            .fold(0.0, f64::max);
        let inc = if rng.gen_bool(0.25) { 0.0 } else { rng.gen_range(0.0..1.0) };
        table[bits] = floor + inc;
    }
    let top = table[table.len() - 1];
    if top == 0.0 {
        table[(1 << n) - 1] = 1.0;
    } else {
        for v in &mut table {
            *v /= top;
        }
    }
    validate_capacity(space.clone(), table).expect("construction is monotone")
}

/// Random probability vector, with some zero masses when `n > 1`.
pub fn random_probability<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n)
        .map(|_| if n > 1 && rng.gen_bool(0.15) { 0.0 } else { rng.gen_range(0.05..1.0) })
        .collect();
    if w.iter().all(|&v| v == 0.0) {
        w[0] = 1.0;
    }
    let total: f64 = w.iter().sum();
    w.iter().map(|v| v / total).collect()
}

fn random_value<R: Rng>(rng: &mut R, scale: f64) -> f64 {
    if rng.gen_bool(0.5) {
        // Coarse grid so ties are common.
        f64::from(rng.gen_range(-8i32..=8)) * 0.25 * scale
    } else {
        rng.gen_range(-2.0..2.0) * scale
    }
}

/// Random position with frequent ties.
pub fn random_position<R: Rng>(rng: &mut R, space: &Arc<SampleSpace>) -> Position {
    let scale = if rng.gen_bool(0.2) { 10.0 } else { 1.0 };
    let values = (0..space.len()).map(|_| random_value(rng, scale)).collect();
    Position::new(space.clone(), values).expect("finite")
}

/// Random permutation of the atoms.
pub fn random_ranking<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    order
}

/// Values non-increasing along `ranking`.
pub fn ranked_position<R: Rng>(rng: &mut R, space: &Arc<SampleSpace>, ranking: &[usize]) -> Position {
    let mut vals: Vec<f64> = (0..space.len()).map(|_| random_value(rng, 1.0)).collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    let mut values = vec![0.0; space.len()];
    for (k, &a) in ranking.iter().enumerate() {
        values[a] = vals[k];
    }
    Position::new(space.clone(), values).expect("finite")
}

/// Two positions that are both non-increasing along one random ranking.
pub fn random_comonotonic_pair<R: Rng>(rng: &mut R, space: &Arc<SampleSpace>) -> (Position, Position) {
    let ranking = random_ranking(rng, space.len());
    (
        ranked_position(rng, space, &ranking),
        ranked_position(rng, space, &ranking),
    )
}

/// Random distortion curve with at most `max_knots` interior knots; jumps at
/// knots are allowed. Occasionally returns one of the built-in shapes.
pub fn random_curve<R: Rng>(rng: &mut R, max_knots: usize) -> DistortionCurve {
    match rng.gen_range(0..10) {
        0 => return DistortionCurve::var(rng.gen_range(0.0..1.0)).expect("valid level"),
        1 => return DistortionCurve::avar(rng.gen_range(0.0..1.0)).expect("valid level"),
        2 => return DistortionCurve::identity(),
        _ => {}
    }
    let m = rng.gen_range(0..=max_knots) + 1;
    let knots = random_knots(rng, m);
    // 0 = a_0 ≤ r_0 ≤ a_1 ≤ r_1 ≤ … ≤ r_{m−1} ≤ a_m = 1
    let mut ladder: Vec<f64> = (0..2 * m - 1).map(|_| rng.gen_range(0.0..=1.0)).collect();
    ladder.sort_by(f64::total_cmp);
    let mut right = Vec::with_capacity(m);
    let mut at = vec![0.0];
    for j in 0..m {
        let r = ladder[2 * j];
        // Continuous at this knot half of the time.
        right.push(if j > 0 && rng.gen_bool(0.5) { at[j] } else { r });
        at.push(if j + 1 < m { ladder[2 * j + 1] } else { 1.0 });
    }
    DistortionCurve::from_knots(&knots, &right, &at).expect("ladder is monotone")
}

fn random_knots<R: Rng>(rng: &mut R, m: usize) -> Vec<f64> {
    loop {
        let mut inner: Vec<f64> = (0..m - 1).map(|_| rng.gen_range(0.01..0.99)).collect();
        inner.sort_by(f64::total_cmp);
        if inner.windows(2).all(|w| w[1] - w[0] > 1e-3) {
            let mut knots = vec![0.0];
            knots.extend(inner);
            knots.push(1.0);
            return knots;
        }
    }
}

/// Random concave curve: optional jump at `0`, then continuous with
/// non-increasing slopes.
pub fn random_concave_curve<R: Rng>(rng: &mut R, max_knots: usize, allow_jump: bool) -> DistortionCurve {
    let m = rng.gen_range(0..=max_knots) + 1;
    let knots = random_knots(rng, m);
    let jump = if allow_jump && rng.gen_bool(0.5) { rng.gen_range(0.0..0.9) } else { 0.0 };
    let mut slopes: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..1.0)).collect();
    slopes.sort_by(|a, b| b.total_cmp(a));
    if rng.gen_bool(0.3) {
        // Flat tail.
        *slopes.last_mut().expect("m ≥ 1") = 0.0;
    }
    let mass: f64 = slopes.iter().zip(knots.windows(2)).map(|(s, w)| s * (w[1] - w[0])).sum();
    let mut at = vec![0.0];
    let mut right = Vec::with_capacity(m);
    let mut level = jump;
    for j in 0..m {
        right.push(level);
        let share = if mass > 0.0 {
            (1.0 - jump) * slopes[j] * (knots[j + 1] - knots[j]) / mass
        } else {
            0.0
        };
        level = if j + 1 == m { 1.0 } else { (level + share).min(1.0) };
        at.push(level);
    }
    if mass == 0.0 {
        // All slopes vanished: the only concave option left is a jump to 1.
        return DistortionCurve::from_knots(&[0.0, 1.0], &[1.0], &[0.0, 1.0]).expect("valid");
    }
    DistortionCurve::from_knots(&knots, &right, &at).expect("concave ladder is monotone")
}

/// Random partition into at most `max_blocks` non-empty blocks.
pub fn random_partition<R: Rng>(rng: &mut R, space: &Arc<SampleSpace>, max_blocks: usize) -> BlockPartition {
    let k = rng.gen_range(1..=max_blocks.min(space.len()).max(1));
    let mut events = vec![Event::EMPTY; k];
    for a in 0..space.len() {
        let b = rng.gen_range(0..k);
        events[b] = events[b].with(a);
    }
    events.retain(|e| !e.is_empty());
    BlockPartition::from_events(space.clone(), &events).expect("disjoint cover")
}

/// One random curve per block.
pub fn random_distortion<R: Rng>(rng: &mut R, partition: &BlockPartition, max_knots: usize) -> RandomDistortion {
    let curves = (0..partition.len()).map(|_| random_curve(rng, max_knots)).collect();
    RandomDistortion::new(partition.clone(), curves).expect("one curve per block")
}

/// One random concave curve per block.
pub fn random_concave_distortion<R: Rng>(
    rng: &mut R,
    partition: &BlockPartition,
    max_knots: usize,
) -> RandomDistortion {
    let curves = (0..partition.len())
        .map(|_| random_concave_curve(rng, max_knots, true))
        .collect();
    RandomDistortion::new(partition.clone(), curves).expect("one curve per block")
}
