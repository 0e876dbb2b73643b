//! Comonotonicity tests and the common step representation of a comonotonic
//! pair.

use crate::choquet::ChoquetError;
use crate::space::{ensure_same, Event, Position};

/// Returns `(true, None)` when `(X(ω) − X(ω'))(Y(ω) − Y(ω')) ≥ 0` for every
/// pair, otherwise `(false, Some((ω, ω')))` for a violating pair.
pub fn are_comonotonic(
    x: &Position,
    y: &Position,
) -> Result<(bool, Option<(usize, usize)>), ChoquetError> {
    ensure_same(x.space(), y.space())?;
    let order = sorted_atoms(x, y);
    // After sorting by X then Y, a violation shows up as Y increasing across
    // a strict decrease of X. Track the atom with the smallest Y seen so far
    // among strictly larger X values.
    let mut min_prev: Option<usize> = None;
    let mut group_min: Option<usize> = None;
    let mut group_x = f64::NAN;
    for &a in &order {
        if x.value(a) != group_x {
            min_prev = pick_min(y, min_prev, group_min);
            group_min = None;
            group_x = x.value(a);
        }
        if let Some(p) = min_prev {
            if y.value(a) > y.value(p) {
                return Ok((false, Some((p, a))));
            }
        }
        group_min = pick_min(y, group_min, Some(a));
    }
    Ok((true, None))
}

fn pick_min(y: &Position, a: Option<usize>, b: Option<usize>) -> Option<usize> {
    match (a, b) {
        (Some(a), Some(b)) => Some(if y.value(b) < y.value(a) { b } else { a }),
        (a, None) => a,
        (None, b) => b,
    }
}

fn sorted_atoms(x: &Position, y: &Position) -> Vec<usize> {
    let mut order: Vec<usize> = (0..x.space().len()).collect();
    order.sort_by(|&a, &b| {
        x.value(b)
            .total_cmp(&x.value(a))
            .then(y.value(b).total_cmp(&y.value(a)))
    });
    order
}

/// `X = Σ x_i 1_{A_i}`, `Y = Σ y_i 1_{A_i}` over one partition with both
/// coefficient sequences non-increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct ComonotonicForm {
    pub events: Vec<Event>,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

impl ComonotonicForm {
    pub fn reconstruct(&self, space: &std::sync::Arc<crate::SampleSpace>) -> (Position, Position) {
        let n = space.len();
        let mut xv = vec![0.0; n];
        let mut yv = vec![0.0; n];
        for (i, e) in self.events.iter().enumerate() {
            for a in e.atoms() {
                xv[a] = self.xs[i];
                yv[a] = self.ys[i];
            }
        }
        (
            Position::new(space.clone(), xv).expect("finite"),
            Position::new(space.clone(), yv).expect("finite"),
        )
    }
}

/// Common decomposition of a non-negative comonotonic pair.
pub fn comonotonic_decomposition(
    x: &Position,
    y: &Position,
) -> Result<ComonotonicForm, ChoquetError> {
    let space = x.space();
    if let (false, Some((a, b))) = are_comonotonic(x, y)? {
        return Err(ChoquetError::NotComonotonic(
            space.label(a).to_string(),
            space.label(b).to_string(),
        ));
    }
    for p in [x, y] {
        if let Some(a) = (0..space.len()).find(|&a| p.value(a) < 0.0) {
            return Err(ChoquetError::NegativeInput {
                atom: space.label(a).to_string(),
                value: p.value(a),
            });
        }
    }
    let mut form = ComonotonicForm {
        events: Vec::new(),
        xs: Vec::new(),
        ys: Vec::new(),
    };
    for a in sorted_atoms(x, y) {
        let pair = (x.value(a), y.value(a));
        match form.events.last_mut() {
            Some(e) if (form.xs[form.xs.len() - 1], form.ys[form.ys.len() - 1]) == pair => {
                *e = e.with(a);
            }
            _ => {
                form.events.push(Event::singleton(a));
                form.xs.push(pair.0);
                form.ys.push(pair.1);
            }
        }
    }
    Ok(form)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::SampleSpace;

    #[test]
    fn detects_violation() {
        let s = SampleSpace::indexed(3).unwrap();
        let x = Position::new(s.clone(), vec![1.0, 2.0, 3.0]).unwrap();
        let y = Position::new(s.clone(), vec![1.0, 5.0, 4.0]).unwrap();
        let (ok, pair) = are_comonotonic(&x, &y).unwrap();
        assert!(!ok);
        let (a, b) = pair.unwrap();
        assert!((x.value(a) - x.value(b)) * (y.value(a) - y.value(b)) < 0.0);
        assert_eq!(are_comonotonic(&x, &x.scale(2.0)).unwrap(), (true, None));
    }

    #[test]
    fn ties_in_x_are_free() {
        let s = SampleSpace::indexed(4).unwrap();
        let x = Position::new(s.clone(), vec![1.0, 1.0, 0.0, 2.0]).unwrap();
        let y = Position::new(s.clone(), vec![3.0, 0.0, 0.0, 3.0]).unwrap();
        assert!(are_comonotonic(&x, &y).unwrap().0);
        let form = comonotonic_decomposition(&x, &y).unwrap();
        assert_eq!(form.xs, vec![2.0, 1.0, 1.0, 0.0]);
        assert_eq!(form.ys, vec![3.0, 3.0, 0.0, 0.0]);
        assert_eq!(form.reconstruct(&s), (x, y));
    }

    #[test]
    fn rejects_negative() {
        let s = SampleSpace::indexed(2).unwrap();
        let x = Position::new(s.clone(), vec![-1.0, 0.0]).unwrap();
        assert!(matches!(
            comonotonic_decomposition(&x, &x),
            Err(ChoquetError::NegativeInput { .. })
        ));
    }
}
