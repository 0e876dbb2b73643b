mod common;

use choquet_core::sampling::*;
use choquet_core::*;
use common::*;
use proptest::prelude::*;

fn non_negative(x: &Position) -> Position {
    x.shift(-x.min().min(0.0))
}

proptest! {
    #![proptest_config(config(300))]

    #[test]
    fn indicator_evaluates_the_curve(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = instance(&mut r, 6);
        let d = random_distortion(&mut r, &inst.partition, 4);
        let bits = rand::Rng::gen_range(&mut r, 0..1u32 << inst.space.len());
        let e = Event::from_bits(bits);
        let v = rd_choquet(&Position::indicator(inst.space.clone(), e, 1.0), &inst.capacity, &d).unwrap();
        for b in 0..d.partition().len() {
            prop_assert_eq!(v.value(b), d.curve(b).value(inst.capacity.value(e)));
        }
    }

    #[test]
    fn step_formula_matches_engine(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = instance(&mut r, 8);
        let d = random_distortion(&mut r, &inst.partition, 5);
        let x = non_negative(&random_position(&mut r, &inst.space));
        let mut values = x.distinct_values();
        values.reverse();
        let events: Vec<Event> = values
            .iter()
            .map(|&v| Event::from_atoms((0..x.space().len()).filter(|&a| x.value(a) == v)))
            .collect();
        let by_steps = step_formula(&events, &values, &inst.capacity, &d).unwrap();
        let engine = rd_choquet(&x, &inst.capacity, &d).unwrap();
        prop_assert!(by_steps.max_abs_diff(&engine) <= 1e-12 * (1.0 + x.sup_norm()));
    }

    #[test]
    fn decomposition_reconstructs_the_pair(seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = space(rand::Rng::gen_range(&mut r, 1..=8));
        let (x, y) = random_comonotonic_pair(&mut r, &s);
        let (x, y) = (non_negative(&x), non_negative(&y));
        let form = comonotonic_decomposition(&x, &y).unwrap();
        prop_assert!(form.xs.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(form.ys.windows(2).all(|w| w[0] >= w[1]));
        let mut cover = Event::EMPTY;
        for &e in &form.events {
            prop_assert!(cover.intersection(e).is_empty());
            cover = cover.union(e);
        }
        prop_assert_eq!(cover, s.full());
        let (rx, ry) = form.reconstruct(&s);
        prop_assert_eq!(rx, x);
        prop_assert_eq!(ry, y);
    }

    #[test]
    fn shared_step_form_evaluates_the_sum(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = instance(&mut r, 8);
        let d = random_distortion(&mut r, &inst.partition, 5);
        let (x, y) = random_comonotonic_pair(&mut r, &inst.space);
        let (x, y) = (non_negative(&x), non_negative(&y));
        let form = comonotonic_decomposition(&x, &y).unwrap();
        let sum: Vec<f64> = form.xs.iter().zip(&form.ys).map(|(a, b)| a + b).collect();
        let lhs = step_formula(&form.events, &sum, &inst.capacity, &d).unwrap();
        let rhs = rd_choquet(&x.add(&y).unwrap(), &inst.capacity, &d).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-9);
    }

    #[test]
    fn non_comonotonic_pairs_are_flagged(seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = space(rand::Rng::gen_range(&mut r, 2..=8));
        let x = random_position(&mut r, &s);
        let y = random_position(&mut r, &s);
        let (ok, witness) = are_comonotonic(&x, &y).unwrap();
        let brute = (0..s.len()).all(|i| (0..s.len()).all(|j| {
            (x.value(i) - x.value(j)) * (y.value(i) - y.value(j)) >= 0.0
        }));
        prop_assert_eq!(ok, brute);
        if let Some((i, j)) = witness {
            prop_assert!((x.value(i) - x.value(j)) * (y.value(i) - y.value(j)) < 0.0);
        }
        prop_assert_eq!(ok, witness.is_none());
    }

    #[test]
    fn engine_is_measurable_per_block(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = instance(&mut r, 8);
        let d = random_distortion(&mut r, &inst.partition, 5);
        let x = random_position(&mut r, &inst.space);
        let v = rd_choquet(&x, &inst.capacity, &d).unwrap();
        prop_assert!(is_block_measurable(&v.to_position(), &inst.partition).unwrap());
    }
}

#[test]
fn worked_fixtures() {
    let s = SampleSpace::new(["a", "b", "c", "d"]).unwrap();
    let c = Capacity::uniform(s.clone());
    let trivial = BlockPartition::trivial(s.clone());
    let x = Position::new(s.clone(), vec![0.0, 1.0, 2.0, 3.0]).unwrap();
    let avar = RandomDistortion::uniform(trivial.clone(), DistortionCurve::avar(0.5).unwrap());
    assert_eq!(rd_choquet(&x, &c, &avar).unwrap().values(), &[2.5]);
    assert_eq!(rd_choquet_concave_dual(&x, &c, &avar).unwrap().values(), &[2.5]);

    let var = RandomDistortion::uniform(trivial, DistortionCurve::var(0.3).unwrap());
    assert!(matches!(rd_choquet_concave_dual(&x, &c, &var), Err(ChoquetError::NotConcave(_))));
    let oracle = rd_choquet_oracle(&x, &c, &avar, 1e-4).unwrap();
    assert!((oracle.value(0) - 2.5).abs() <= 5e-4 * 4.0);
    assert!(matches!(rd_choquet_oracle(&x, &c, &avar, 0.0), Err(ChoquetError::InvalidStep(_))));
}

#[test]
fn mismatched_spaces_are_rejected() {
    let s = space(3);
    let other = SampleSpace::new(["p", "q", "r"]).unwrap();
    let x = Position::constant(s.clone(), 1.0);
    let d = RandomDistortion::uniform(BlockPartition::trivial(other.clone()), DistortionCurve::identity());
    assert!(rd_choquet(&x, &Capacity::uniform(other.clone()), &d).is_err());
    assert!(matches!(
        rd_choquet(&x, &Capacity::uniform(s), &d),
        Err(ChoquetError::PartitionMismatch)
    ));
}
