#![allow(dead_code)]

use std::sync::Arc;

use choquet_core::sampling::{random_capacity, random_position, random_ranking};
use choquet_core::*;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn space(n: usize) -> Arc<SampleSpace> {
    SampleSpace::indexed(n).unwrap()
}

/// `c(E) = γ` when `C ⊆ E ≠ Ω`, `1` on `Ω`, `0` otherwise.
pub fn spike_capacity(space: &Arc<SampleSpace>, c_event: Event, gamma: f64) -> Capacity {
    let n = space.len();
    let full = space.full();
    let table = (0..1u32 << n)
        .map(|bits| {
            let e = Event::from_bits(bits);
            if e == full {
                1.0
            } else if c_event.is_subset(e) {
                gamma
            } else {
                0.0
            }
        })
        .collect();
    validate_capacity(space.clone(), table).unwrap()
}

/// `{first half, rest}` labelled `A` and `Ac`.
pub fn halves(space: &Arc<SampleSpace>) -> BlockPartition {
    let n = space.len();
    let a = Event::from_atoms(0..n / 2);
    BlockPartition::new(
        space.clone(),
        vec![
            Block { label: "A".into(), event: a },
            Block { label: "Ac".into(), event: a.complement(n) },
        ],
    )
    .unwrap()
}

/// `ψ(|E| / n)` for a random curve `ψ`: invariant under relabelling atoms.
pub fn symmetric_capacity<R: Rng>(rng: &mut R, space: &Arc<SampleSpace>) -> Capacity {
    let n = space.len();
    capacity_from_generator(
        space.clone(),
        CapacityGenerator::DistortedProbability {
            probability: vec![1.0 / n as f64; n],
            distortion: choquet_core::sampling::random_curve(rng, 4),
        },
    )
    .unwrap()
}

/// Candidate pair that is often, but not always, st-ordered.
pub fn st_candidate<R: Rng>(rng: &mut R, space: &Arc<SampleSpace>) -> (Position, Position) {
    let x = random_position(rng, space);
    let y = match rng.gen_range(0..4) {
        0 => x.zip_with(&random_position(rng, space), |a, b| a + b.abs()).unwrap(),
        1 => {
            let shift = rng.gen_range(0.0..1.0);
            x.map(|z| if z > 0.0 { 2.0 * z + shift } else { z + shift }).unwrap()
        }
        2 => x.clone(),
        _ => random_position(rng, space),
    };
    (x, y)
}

/// Candidate pair that is often sl-ordered: `X` a shrink of `Y` towards a
/// constant at or above its Choquet mean, or a st candidate.
pub fn sl_candidate<R: Rng>(rng: &mut R, space: &Arc<SampleSpace>, c: &Capacity) -> (Position, Position) {
    match rng.gen_range(0..3) {
        0 => {
            let y = random_position(rng, space);
            let m = choquet(&y, c).unwrap() + rng.gen_range(0.0..0.5);
            let lambda = rng.gen_range(0.0..=1.0);
            (y.map(|z| lambda * z + (1.0 - lambda) * m).unwrap(), y)
        }
        1 => st_candidate(rng, space),
        _ => (random_position(rng, space), random_position(rng, space)),
    }
}

/// Random permutation image `ω ↦ X(π(ω))`.
pub fn permuted<R: Rng>(rng: &mut R, x: &Position) -> Position {
    let perm = random_ranking(rng, x.space().len());
    Position::new(x.space().clone(), perm.iter().map(|&a| x.value(a)).collect()).unwrap()
}

pub struct Instance {
    pub space: Arc<SampleSpace>,
    pub capacity: Capacity,
    pub partition: BlockPartition,
}

pub fn instance<R: Rng>(rng: &mut R, max_atoms: usize) -> Instance {
    let space = space(rng.gen_range(1..=max_atoms));
    let capacity = random_capacity(rng, &space);
    let partition = choquet_core::sampling::random_partition(rng, &space, 3);
    Instance { space, capacity, partition }
}

pub fn config(cases: u32) -> proptest::test_runner::Config {
    proptest::test_runner::Config {
        cases,
        failure_persistence: None,
        ..Default::default()
    }
}
