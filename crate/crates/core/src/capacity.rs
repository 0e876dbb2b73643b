//! Capacities: grounded, normalised, monotone set functions on a finite
//! sample space.
//!
//! On a finite space every capacity is continuous from below (an increasing
//! sequence of events is eventually constant), so that property is not
//! tracked anywhere.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distortion::{DistortionCurve, DistortionError, DistortionSpec};
use crate::space::{Event, SampleSpace, SpaceError};

/// Tolerance for groundedness, normalisation, monotonicity and probability sums.
pub const TOL: f64 = 1e-12;

/// Largest space for which a capacity may be held as an explicit table.
pub const MAX_TABLE_ATOMS: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CapacityError {
    #[error("capacity of the empty set is {0}, expected 0")]
    NotGrounded(f64),
    #[error("capacity of Ω is {0}, expected 1")]
    NotNormalized(f64),
    #[error("capacity is not monotone: c({smaller}) = {smaller_value} > c({larger}) = {larger_value}")]
    NotMonotone {
        smaller: String,
        larger: String,
        smaller_value: f64,
        larger_value: f64,
    },
    #[error("no value given for event `{0}`")]
    MissingEvent(String),
    #[error("event `{0}` is given more than once")]
    DuplicateEvent(String),
    #[error("capacity value {value} for event `{event}` is outside [0,1]")]
    OutOfRange { event: String, value: f64 },
    #[error("invalid probability: {0}")]
    InvalidProbability(String),
    #[error("explicit tables are limited to {MAX_TABLE_ATOMS} atoms, space has {0}")]
    TableTooLarge(usize),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("distortion of the generator: {0}")]
    Distortion(#[from] DistortionError),
}

impl CapacityError {
    /// The `(A, B)` witness of a monotonicity failure.
    pub fn monotone_witness(&self) -> Option<(&str, &str)> {
        match self {
            CapacityError::NotMonotone {
                smaller, larger, ..
            } => Some((smaller, larger)),
            _ => None,
        }
    }
}

/// Ways to specify a capacity.
#[derive(Debug, Clone, PartialEq)]
pub enum CapacityGenerator {
    /// One value per event, indexed by event bitmask.
    ExplicitTable(Vec<f64>),
    /// `c(A) = ψ(P(A))`.
    DistortedProbability {
        probability: Vec<f64>,
        distortion: DistortionCurve,
    },
    /// `c(A) = max_j P_j(A)`.
    SupOfProbabilities(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Table(Vec<f64>),
    Distorted {
        probability: Vec<f64>,
        distortion: DistortionCurve,
    },
    Envelope(Vec<Vec<f64>>),
}

/// A validated capacity.
#[derive(Debug, Clone, PartialEq)]
pub struct Capacity {
    space: Arc<SampleSpace>,
    repr: Repr,
}

impl Capacity {
    pub fn space(&self) -> &Arc<SampleSpace> {
        &self.space
    }

    pub fn value(&self, event: Event) -> f64 {
        match &self.repr {
            Repr::Table(values) => values[event.index()],
            Repr::Distorted {
                probability,
                distortion,
            } => distorted_value(probability, distortion, event, self.space.len()),
            Repr::Envelope(ps) => envelope_value(ps, event),
        }
    }

    /// Full event table (requires `n ≤ MAX_TABLE_ATOMS`).
    pub fn table(&self) -> Result<Vec<f64>, CapacityError> {
        let n = self.space.len();
        if n > MAX_TABLE_ATOMS {
            return Err(CapacityError::TableTooLarge(n));
        }
        Ok(match &self.repr {
            Repr::Table(v) => v.clone(),
            _ => (0..1u32 << n)
                .map(|bits| self.value(Event::from_bits(bits)))
                .collect(),
        })
    }

    /// Additive capacity given by a probability vector.
    pub fn probability(space: Arc<SampleSpace>, p: Vec<f64>) -> Result<Self, CapacityError> {
        capacity_from_generator(
            space,
            CapacityGenerator::DistortedProbability {
                probability: p,
                distortion: DistortionCurve::identity(),
            },
        )
    }

    /// Uniform probability, `c(A) = |A| / n`.
    pub fn uniform(space: Arc<SampleSpace>) -> Self {
        let n = space.len();
        let table = (0..1u32 << n)
            .map(|bits| f64::from(bits.count_ones()) / n as f64)
            .collect();
        validate_capacity(space, table).expect("uniform probability is a capacity")
    }
}

fn distorted_value(p: &[f64], psi: &DistortionCurve, event: Event, n: usize) -> f64 {
    if event == Event::full(n) {
        return 1.0;
    }
    let mass: f64 = event.atoms().map(|i| p[i]).sum();
    psi.value(mass.min(1.0))
}

fn envelope_value(ps: &[Vec<f64>], event: Event) -> f64 {
    ps.iter()
        .map(|p| event.atoms().map(|i| p[i]).sum::<f64>().min(1.0))
        .fold(0.0, f64::max)
}

/// Validates an explicit event table (indexed by event bitmask).
///
/// Monotonicity is checked on the covering pairs `(S, S ∪ {i})`, which
/// implies it for all nested pairs.
pub fn validate_capacity(space: Arc<SampleSpace>, raw: Vec<f64>) -> Result<Capacity, CapacityError> {
    let n = space.len();
    if n > MAX_TABLE_ATOMS {
        return Err(CapacityError::TableTooLarge(n));
    }
    if raw.len() != 1 << n {
        let missing = Event::from_bits(raw.len().min((1 << n) - 1) as u32);
        return Err(CapacityError::MissingEvent(space.event_key(missing)));
    }
    let mut values = raw;
    for (bits, &v) in values.iter().enumerate() {
        if !v.is_finite() || !(-TOL..=1.0 + TOL).contains(&v) {
            return Err(CapacityError::OutOfRange {
                event: space.event_key(Event::from_bits(bits as u32)),
                value: v,
            });
        }
    }
    let full = (1usize << n) - 1;
    if values[0].abs() > TOL {
        return Err(CapacityError::NotGrounded(values[0]));
    }
    if (values[full] - 1.0).abs() > TOL {
        return Err(CapacityError::NotNormalized(values[full]));
    }
    values[0] = 0.0;
    values[full] = 1.0;
    for bits in 0..=full {
        let s = Event::from_bits(bits as u32);
        for i in 0..n {
            if s.contains(i) {
                continue;
            }
            let t = s.with(i);
            if values[s.index()] > values[t.index()] + TOL {
                return Err(CapacityError::NotMonotone {
                    smaller: space.event_key(s),
                    larger: space.event_key(t),
                    smaller_value: values[s.index()],
                    larger_value: values[t.index()],
                });
            }
        }
    }
    for v in &mut values {
        *v = v.clamp(0.0, 1.0);
    }
    Ok(Capacity {
        space,
        repr: Repr::Table(values),
    })
}

fn check_probability(space: &SampleSpace, p: &[f64]) -> Result<(), CapacityError> {
    if p.len() != space.len() {
        return Err(CapacityError::InvalidProbability(format!(
            "{} weights for {} atoms",
            p.len(),
            space.len()
        )));
    }
    if let Some(i) = p.iter().position(|w| !w.is_finite() || *w < 0.0) {
        return Err(CapacityError::InvalidProbability(format!(
            "weight {} at atom `{}`",
            p[i],
            space.label(i)
        )));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > TOL {
        return Err(CapacityError::InvalidProbability(format!(
            "weights sum to {total}"
        )));
    }
    Ok(())
}

/// Expands a generator and validates the result. Spaces above
/// [`MAX_TABLE_ATOMS`] keep the generator and evaluate lazily; the
/// generators are monotone by construction.
pub fn capacity_from_generator(
    space: Arc<SampleSpace>,
    gen: CapacityGenerator,
) -> Result<Capacity, CapacityError> {
    let n = space.len();
    let repr = match gen {
        CapacityGenerator::ExplicitTable(values) => return validate_capacity(space, values),
        CapacityGenerator::DistortedProbability {
            probability,
            distortion,
        } => {
            check_probability(&space, &probability)?;
            Repr::Distorted {
                probability,
                distortion,
            }
        }
        CapacityGenerator::SupOfProbabilities(ps) => {
            if ps.is_empty() {
                return Err(CapacityError::InvalidProbability(
                    "empty set of probabilities".into(),
                ));
            }
            for p in &ps {
                check_probability(&space, p)?;
            }
            Repr::Envelope(ps)
        }
    };
    let lazy = Capacity { space, repr };
    if n <= MAX_TABLE_ATOMS {
        let table = lazy.table()?;
        validate_capacity(lazy.space, table)
    } else {
        Ok(lazy)
    }
}

/// On-disk capacity description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CapacitySpec {
    /// Event keys are labels joined by `|`, `""` for ∅.
    Table {
        values: std::collections::BTreeMap<String, f64>,
    },
    DistortedProbability {
        probability: Vec<f64>,
        distortion: DistortionSpec,
    },
    SupOfProbabilities {
        probabilities: Vec<Vec<f64>>,
    },
}

impl CapacitySpec {
    pub fn to_generator(&self, space: &SampleSpace) -> Result<CapacityGenerator, CapacityError> {
        Ok(match self {
            CapacitySpec::Table { values } => {
                let n = space.len();
                if n > MAX_TABLE_ATOMS {
                    return Err(CapacityError::TableTooLarge(n));
                }
                let mut table = vec![f64::NAN; 1 << n];
                for (key, &v) in values {
                    let e = space.parse_event_key(key)?;
                    if !table[e.index()].is_nan() {
                        return Err(CapacityError::DuplicateEvent(key.clone()));
                    }
                    table[e.index()] = v;
                }
                if let Some(bits) = table.iter().position(|v| v.is_nan()) {
                    return Err(CapacityError::MissingEvent(
                        space.event_key(Event::from_bits(bits as u32)),
                    ));
                }
                CapacityGenerator::ExplicitTable(table)
            }
            CapacitySpec::DistortedProbability {
                probability,
                distortion,
            } => CapacityGenerator::DistortedProbability {
                probability: probability.clone(),
                distortion: distortion.build()?,
            },
            CapacitySpec::SupOfProbabilities { probabilities } => {
                CapacityGenerator::SupOfProbabilities(probabilities.clone())
            }
        })
    }

    pub fn build(&self, space: Arc<SampleSpace>) -> Result<Capacity, CapacityError> {
        let gen = self.to_generator(&space)?;
        capacity_from_generator(space, gen)
    }

    /// Table spec listing every event of `c`.
    pub fn table_of(c: &Capacity) -> Result<Self, CapacityError> {
        let space = c.space();
        let values = c
            .table()?
            .into_iter()
            .enumerate()
            .map(|(bits, v)| (space.event_key(Event::from_bits(bits as u32)), v))
            .collect();
        Ok(CapacitySpec::Table { values })
    }
}
