//! Finite sample spaces, events, block partitions and positions.
//!
//! Every σ-algebra handled here is generated by a finite partition, so an
//! event is just a subset of atom indices, stored as a bitmask.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Hard cap on the number of atoms (events are `u32` bitmasks).
pub const MAX_ATOMS: usize = 24;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpaceError {
    #[error("a sample space needs at least one atom")]
    Empty,
    #[error("{0} atoms exceeds the limit of {MAX_ATOMS}")]
    TooManyAtoms(usize),
    #[error("duplicate atom label `{0}`")]
    DuplicateLabel(String),
    #[error("invalid atom label `{0}` (labels must be non-empty and must not contain `|`)")]
    InvalidLabel(String),
    #[error("unknown atom label `{0}`")]
    UnknownLabel(String),
    #[error("objects live on different sample spaces")]
    SpaceMismatch,
    #[error("position has {got} values but the space has {expected} atoms")]
    LengthMismatch { expected: usize, got: usize },
    #[error("position value at atom `{atom}` is not finite")]
    NonFinite { atom: String },
    #[error("partition block {block} is empty")]
    EmptyBlock { block: usize },
    #[error("atom `{atom}` appears in more than one block")]
    OverlappingBlocks { atom: String },
    #[error("atom `{atom}` is not covered by any block")]
    Uncovered { atom: String },
    #[error("duplicate block label `{0}`")]
    DuplicateBlockLabel(String),
}

/// An ordered, finite set of labelled atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSpace {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl SampleSpace {
    pub fn new<I, S>(labels: I) -> Result<Arc<Self>, SpaceError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(SpaceError::Empty);
        }
        if labels.len() > MAX_ATOMS {
            return Err(SpaceError::TooManyAtoms(labels.len()));
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            if label.is_empty() || label.contains('|') {
                return Err(SpaceError::InvalidLabel(label.clone()));
            }
            if index.insert(label.clone(), i).is_some() {
                return Err(SpaceError::DuplicateLabel(label.clone()));
            }
        }
        Ok(Arc::new(SampleSpace { labels, index }))
    }

    /// Space with atoms labelled `w0, w1, ...`.
    pub fn indexed(n: usize) -> Result<Arc<Self>, SpaceError> {
        Self::new((0..n).map(|i| format!("w{i}")))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, atom: usize) -> &str {
        &self.labels[atom]
    }

    pub fn atom(&self, label: &str) -> Result<usize, SpaceError> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| SpaceError::UnknownLabel(label.to_string()))
    }

    pub fn full(&self) -> Event {
        Event::full(self.len())
    }

    /// Number of events, `2^n`.
    pub fn event_count(&self) -> usize {
        1usize << self.len()
    }

    pub fn event_from_labels<I, S>(&self, labels: I) -> Result<Event, SpaceError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut e = Event::EMPTY;
        for l in labels {
            e = e.with(self.atom(l.as_ref())?);
        }
        Ok(e)
    }

    /// Labels of `event`, sorted lexicographically.
    pub fn event_labels(&self, event: Event) -> Vec<&str> {
        let mut out: Vec<&str> = event.atoms().map(|i| self.label(i)).collect();
        out.sort_unstable();
        out
    }

    /// Canonical string key: sorted labels joined by `|`, empty for ∅.
    pub fn event_key(&self, event: Event) -> String {
        self.event_labels(event).join("|")
    }

    pub fn parse_event_key(&self, key: &str) -> Result<Event, SpaceError> {
        if key.is_empty() {
            return Ok(Event::EMPTY);
        }
        self.event_from_labels(key.split('|'))
    }
}

pub(crate) fn same_space(a: &Arc<SampleSpace>, b: &Arc<SampleSpace>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

pub(crate) fn ensure_same(a: &Arc<SampleSpace>, b: &Arc<SampleSpace>) -> Result<(), SpaceError> {
    if same_space(a, b) {
        Ok(())
    } else {
        Err(SpaceError::SpaceMismatch)
    }
}

/// A subset of atoms, as a bitmask over atom indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Event(u32);

impl Event {
    pub const EMPTY: Event = Event(0);

    pub fn full(n: usize) -> Event {
        debug_assert!(n <= MAX_ATOMS);
        Event(((1u64 << n) - 1) as u32)
    }

    pub fn singleton(atom: usize) -> Event {
        Event(1 << atom)
    }

    pub fn from_bits(bits: u32) -> Event {
        Event(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn from_atoms<I: IntoIterator<Item = usize>>(atoms: I) -> Event {
        atoms.into_iter().fold(Event::EMPTY, Event::with)
    }

    pub fn with(self, atom: usize) -> Event {
        Event(self.0 | (1 << atom))
    }

    pub fn without(self, atom: usize) -> Event {
        Event(self.0 & !(1 << atom))
    }

    pub fn contains(self, atom: usize) -> bool {
        self.0 & (1 << atom) != 0
    }

    pub fn union(self, other: Event) -> Event {
        Event(self.0 | other.0)
    }

    pub fn intersection(self, other: Event) -> Event {
        Event(self.0 & other.0)
    }

    pub fn complement(self, n: usize) -> Event {
        Event(!self.0 & Event::full(n).0)
    }

    pub fn is_subset(self, other: Event) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn atoms(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..32usize).filter(move |i| bits & (1 << i) != 0)
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let atoms: Vec<String> = self.atoms().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", atoms.join(","))
    }
}

/// A labelled block of a partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub label: String,
    pub event: Event,
}

/// The conditioning σ-algebra, given by its atoms (blocks).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPartition {
    space: Arc<SampleSpace>,
    blocks: Vec<Block>,
    block_of: Vec<usize>,
}

impl BlockPartition {
    pub fn new(space: Arc<SampleSpace>, blocks: Vec<Block>) -> Result<Self, SpaceError> {
        let n = space.len();
        let mut block_of = vec![usize::MAX; n];
        let mut seen_labels = std::collections::HashSet::new();
        for (b, block) in blocks.iter().enumerate() {
            if block.event.is_empty() {
                return Err(SpaceError::EmptyBlock { block: b });
            }
            if !seen_labels.insert(block.label.clone()) {
                return Err(SpaceError::DuplicateBlockLabel(block.label.clone()));
            }
            for atom in block.event.atoms() {
                if atom >= n {
                    return Err(SpaceError::UnknownLabel(format!("#{atom}")));
                }
                if block_of[atom] != usize::MAX {
                    return Err(SpaceError::OverlappingBlocks {
                        atom: space.label(atom).to_string(),
                    });
                }
                block_of[atom] = b;
            }
        }
        if let Some(atom) = block_of.iter().position(|&b| b == usize::MAX) {
            return Err(SpaceError::Uncovered {
                atom: space.label(atom).to_string(),
            });
        }
        Ok(BlockPartition {
            space,
            blocks,
            block_of,
        })
    }

    /// The trivial σ-algebra `{∅, Ω}`: one block labelled `Omega`.
    pub fn trivial(space: Arc<SampleSpace>) -> Self {
        let full = space.full();
        Self::new(
            space,
            vec![Block {
                label: "Omega".into(),
                event: full,
            }],
        )
        .expect("trivial partition is valid")
    }

    /// Unlabelled convenience constructor; blocks are named `B0, B1, ...`.
    pub fn from_events(space: Arc<SampleSpace>, events: &[Event]) -> Result<Self, SpaceError> {
        let blocks = events
            .iter()
            .enumerate()
            .map(|(i, &event)| Block {
                label: format!("B{i}"),
                event,
            })
            .collect();
        Self::new(space, blocks)
    }

    pub fn space(&self) -> &Arc<SampleSpace> {
        &self.space
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block_of(&self, atom: usize) -> usize {
        self.block_of[atom]
    }

    pub fn label(&self, block: usize) -> &str {
        &self.blocks[block].label
    }
}

/// A bounded loss `X: Ω → ℝ`, one finite value per atom.
#[derive(Debug, Clone, PartialEq)]
pub struct Position {
    space: Arc<SampleSpace>,
    values: Vec<f64>,
}

impl Position {
    pub fn new(space: Arc<SampleSpace>, values: Vec<f64>) -> Result<Self, SpaceError> {
        if values.len() != space.len() {
            return Err(SpaceError::LengthMismatch {
                expected: space.len(),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(SpaceError::NonFinite {
                atom: space.label(i).to_string(),
            });
        }
        Ok(Position { space, values })
    }

    pub fn constant(space: Arc<SampleSpace>, k: f64) -> Self {
        let n = space.len();
        Position::new(space, vec![k; n]).expect("finite constant")
    }

    /// `scale · 1_event`.
    pub fn indicator(space: Arc<SampleSpace>, event: Event, scale: f64) -> Self {
        let values = (0..space.len())
            .map(|i| if event.contains(i) { scale } else { 0.0 })
            .collect();
        Position::new(space, values).expect("finite indicator")
    }

    pub fn space(&self) -> &Arc<SampleSpace> {
        &self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, atom: usize) -> f64 {
        self.values[atom]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Supremum norm.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// The level set `{X > x}`.
    pub fn exceeds(&self, x: f64) -> Event {
        Event::from_atoms(
            self.values
                .iter()
                .enumerate()
                .filter(|(_, &v)| v > x)
                .map(|(i, _)| i),
        )
    }

    /// Distinct values in ascending order (exact double equality).
    pub fn distinct_values(&self) -> Vec<f64> {
        let mut vals = self.values.clone();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        vals
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Position, SpaceError> {
        Position::new(self.space.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(
        &self,
        other: &Position,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Position, SpaceError> {
        ensure_same(&self.space, &other.space)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Position::new(self.space.clone(), values)
    }

    pub fn add(&self, other: &Position) -> Result<Position, SpaceError> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn shift(&self, a: f64) -> Position {
        self.map(|v| v + a).expect("shift of finite values by finite a")
    }

    pub fn scale(&self, a: f64) -> Position {
        self.map(|v| a * v).expect("scaling of finite values by finite a")
    }

    /// Pointwise `self ≤ other`.
    pub fn le(&self, other: &Position) -> Result<bool, SpaceError> {
        ensure_same(&self.space, &other.space)?;
        Ok(self.values.iter().zip(&other.values).all(|(a, b)| a <= b))
    }
}

/// True iff `x` is constant on every block of `partition`.
pub fn is_block_measurable(x: &Position, partition: &BlockPartition) -> Result<bool, SpaceError> {
    ensure_same(x.space(), partition.space())?;
    Ok(partition.blocks().iter().all(|block| {
        let mut atoms = block.event.atoms();
        let first = atoms.next().map(|a| x.value(a));
        atoms.all(|a| Some(x.value(a)) == first)
    }))
}
