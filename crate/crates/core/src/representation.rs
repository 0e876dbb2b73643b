//! Black-box conditional risk measures: distortion extraction along a nested
//! chain of events, axiom sampling and representation checks.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::{Arc, Mutex};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::capacity::Capacity;
use crate::choquet::{rd_choquet, ChoquetError, ConditionalValue};
use crate::distortion::{DistortionCurve, DistortionError, RandomDistortion};
use crate::order::{dominates_sl, dominates_st, OrderError};
use crate::sampling::{random_comonotonic_pair, random_position, random_ranking, ranked_position};
use crate::space::{same_space, BlockPartition, Event, Position, SampleSpace, SpaceError};

/// Agreement required between extracted values at equal grid levels.
pub const WELL_DEFINED_TOL: f64 = 1e-9;

/// Events probed for well-definedness beyond the chain when `n` is at most this.
pub const PROBE_ALL_EVENTS_UP_TO: usize = 12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RepresentationError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Choquet(#[from] ChoquetError),
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error("extracted values do not form a distortion: {0}")]
    Distortion(#[from] DistortionError),
    #[error("invalid ranking: {0}")]
    InvalidRanking(String),
    #[error(
        "risk measure is not well defined on capacity level {level}: events `{first}` and `{second}` give {first_value} and {second_value} on block `{block}`"
    )]
    WellDefinednessViolation {
        level: f64,
        block: String,
        first: String,
        second: String,
        first_value: f64,
        second_value: f64,
    },
    #[error("risk measure and request use different partitions")]
    PartitionMismatch,
    #[error("no extracted distortion to verify")]
    ExtractionMissing,
    #[error("risk measure returned {got} values for {expected} blocks")]
    WrongArity { expected: usize, got: usize },
    #[error("plugin failure: {0}")]
    Plugin(String),
}

/// A conditional risk measure on a fixed space and partition. Evaluation
/// must be deterministic.
pub trait RiskMeasure {
    fn partition(&self) -> &BlockPartition;
    fn evaluate(&self, x: &Position) -> Result<ConditionalValue, RepresentationError>;
}

/// `X ↦ E_{φ^G ∘ c}(X)`.
#[derive(Debug, Clone)]
pub struct DistortedChoquet {
    pub capacity: Capacity,
    pub distortion: RandomDistortion,
}

impl RiskMeasure for DistortedChoquet {
    fn partition(&self) -> &BlockPartition {
        self.distortion.partition()
    }

    fn evaluate(&self, x: &Position) -> Result<ConditionalValue, RepresentationError> {
        Ok(rd_choquet(x, &self.capacity, &self.distortion)?)
    }
}

/// Block-wise conditional expectation under a probability vector. Blocks of
/// zero mass fall back to the plain average over the block.
#[derive(Debug, Clone)]
pub struct BlockConditionalMean {
    pub partition: BlockPartition,
    pub probability: Vec<f64>,
}

impl RiskMeasure for BlockConditionalMean {
    fn partition(&self) -> &BlockPartition {
        &self.partition
    }

    fn evaluate(&self, x: &Position) -> Result<ConditionalValue, RepresentationError> {
        ensure_partition_space(&self.partition, x)?;
        let values = self
            .partition
            .blocks()
            .iter()
            .map(|b| {
                let mass: f64 = b.event.atoms().map(|a| self.probability[a]).sum();
                if mass > 0.0 {
                    b.event.atoms().map(|a| self.probability[a] * x.value(a)).sum::<f64>() / mass
                } else {
                    b.event.atoms().map(|a| x.value(a)).sum::<f64>() / b.event.len() as f64
                }
            })
            .collect();
        Ok(ConditionalValue::new(self.partition.clone(), values))
    }
}

/// Closure-backed risk measure returning one value per block.
pub struct FnRisk<F> {
    pub partition: BlockPartition,
    pub f: F,
}

impl<F> RiskMeasure for FnRisk<F>
where
    F: Fn(&Position) -> Vec<f64>,
{
    fn partition(&self) -> &BlockPartition {
        &self.partition
    }

    fn evaluate(&self, x: &Position) -> Result<ConditionalValue, RepresentationError> {
        ensure_partition_space(&self.partition, x)?;
        let values = (self.f)(x);
        check_arity(&self.partition, values)
    }
}

fn ensure_partition_space(p: &BlockPartition, x: &Position) -> Result<(), RepresentationError> {
    if same_space(p.space(), x.space()) {
        Ok(())
    } else {
        Err(SpaceError::SpaceMismatch.into())
    }
}

fn check_arity(p: &BlockPartition, values: Vec<f64>) -> Result<ConditionalValue, RepresentationError> {
    if values.len() != p.len() {
        return Err(RepresentationError::WrongArity {
            expected: p.len(),
            got: values.len(),
        });
    }
    Ok(ConditionalValue::new(p.clone(), values))
}

struct PluginIo {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

/// Risk measure served by a subprocess speaking JSON lines.
///
/// Each request is one line `{"position":[…],"partition":[[labels…],…]}`;
/// the reply is one line holding a JSON array with one number per block.
pub struct PluginRisk {
    partition: BlockPartition,
    command: String,
    io: Mutex<PluginIo>,
}

impl PluginRisk {
    /// Runs `command` through `sh -c`.
    pub fn spawn(command: &str, partition: BlockPartition) -> Result<Self, RepresentationError> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|e| RepresentationError::Plugin(format!("cannot start `{command}`: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(PluginRisk {
            partition,
            command: command.to_string(),
            io: Mutex::new(PluginIo { child, stdin, stdout }),
        })
    }

    pub fn command(&self) -> &str {
        &self.command
    }
}

impl RiskMeasure for PluginRisk {
    fn partition(&self) -> &BlockPartition {
        &self.partition
    }

    fn evaluate(&self, x: &Position) -> Result<ConditionalValue, RepresentationError> {
        ensure_partition_space(&self.partition, x)?;
        let space = self.partition.space();
        let blocks: Vec<Vec<&str>> = self
            .partition
            .blocks()
            .iter()
            .map(|b| space.event_labels(b.event))
            .collect();
        let request = serde_json::json!({ "position": x.values(), "partition": blocks });
        let plugin_err = |e: std::io::Error| RepresentationError::Plugin(e.to_string());
        let mut io = self.io.lock().map_err(|_| RepresentationError::Plugin("poisoned".into()))?;
        writeln!(io.stdin, "{request}").map_err(plugin_err)?;
        io.stdin.flush().map_err(plugin_err)?;
        let mut line = String::new();
        if io.stdout.read_line(&mut line).map_err(plugin_err)? == 0 {
            return Err(RepresentationError::Plugin(format!(
                "`{}` closed its output",
                self.command
            )));
        }
        let values: Vec<f64> = serde_json::from_str(line.trim())
            .map_err(|e| RepresentationError::Plugin(format!("bad reply {:?}: {e}", line.trim())))?;
        check_arity(&self.partition, values)
    }
}

impl Drop for PluginRisk {
    fn drop(&mut self) {
        if let Ok(io) = self.io.get_mut() {
            let _ = io.child.kill();
            let _ = io.child.wait();
        }
    }
}

/// `∅ = B_0 ⊂ B_1 ⊂ … ⊂ B_n = Ω` with `B_k` the top `k` atoms of a ranking,
/// and the capacity grid `t_k = c(B_k)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NestedChain {
    #[serde(skip)]
    capacity: Capacity,
    pub ranking: Vec<usize>,
    #[serde(skip)]
    pub events: Vec<Event>,
    pub grid: Vec<f64>,
}

impl NestedChain {
    pub fn space(&self) -> &Arc<SampleSpace> {
        self.capacity.space()
    }

    pub fn capacity(&self) -> &Capacity {
        &self.capacity
    }

    /// Chain-adapted position: non-increasing along the ranking.
    pub fn adapted(&self, values_desc: &[f64]) -> Position {
        let mut v = vec![0.0; self.space().len()];
        for (k, &a) in self.ranking.iter().enumerate() {
            v[a] = values_desc[k];
        }
        Position::new(self.space().clone(), v).expect("finite")
    }
}

pub fn build_nested_chain(c: &Capacity, ranking: &[usize]) -> Result<NestedChain, RepresentationError> {
    let n = c.space().len();
    if ranking.len() != n {
        return Err(RepresentationError::InvalidRanking(format!(
            "expected {n} atoms, got {}",
            ranking.len()
        )));
    }
    let mut seen = vec![false; n];
    for &a in ranking {
        if a >= n || std::mem::replace(&mut seen[a], true) {
            return Err(RepresentationError::InvalidRanking(format!(
                "atom index {a} is out of range or repeated"
            )));
        }
    }
    let mut events = vec![Event::EMPTY];
    for &a in ranking {
        events.push(events[events.len() - 1].with(a));
    }
    let grid = events.iter().map(|&e| c.value(e)).collect();
    Ok(NestedChain {
        capacity: c.clone(),
        ranking: ranking.to_vec(),
        events,
        grid,
    })
}

/// Ranking given by atom labels.
pub fn ranking_from_labels<S: AsRef<str>>(
    space: &SampleSpace,
    labels: &[S],
) -> Result<Vec<usize>, RepresentationError> {
    labels
        .iter()
        .map(|l| {
            space
                .atom(l.as_ref())
                .map_err(|_| RepresentationError::InvalidRanking(format!("unknown atom `{}`", l.as_ref())))
        })
        .collect()
}

/// Extracted values `v_k(b) = ρ(1_{B_k})(b)` on the chain grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDistortion {
    partition: BlockPartition,
    pub grid: Vec<f64>,
    /// `values[b][k]`.
    pub values: Vec<Vec<f64>>,
}

/// How grid values are extended to a full curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Lift {
    /// Linear interpolation between grid points.
    #[default]
    Linear,
    /// `φ = v_{k+1}` on `(t_k, t_{k+1}]`.
    Step,
}

impl GridDistortion {
    pub fn partition(&self) -> &BlockPartition {
        &self.partition
    }

    /// Distinct `(t, v)` pairs of one block, ascending in `t`.
    pub fn points(&self, block: usize) -> Vec<(f64, f64)> {
        let mut pts: Vec<(f64, f64)> = Vec::new();
        for (&t, &v) in self.grid.iter().zip(&self.values[block]) {
            if pts.last().is_none_or(|p| p.0 < t) {
                pts.push((t, v));
            }
        }
        pts
    }

    pub fn lift(&self, lift: Lift) -> Result<RandomDistortion, RepresentationError> {
        let curves = (0..self.partition.len())
            .map(|b| {
                let pts = self.points(b);
                let knots: Vec<f64> = pts.iter().map(|p| p.0).collect();
                let at: Vec<f64> = pts.iter().map(|p| p.1).collect();
                let right: Vec<f64> = match lift {
                    Lift::Linear => at[..at.len() - 1].to_vec(),
                    Lift::Step => at[1..].to_vec(),
                };
                DistortionCurve::from_knots(&knots, &right, &at)
                    .map_err(|e| DistortionError::InBlock {
                        block: self.partition.label(b).to_string(),
                        source: Box::new(e),
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(RandomDistortion::new(self.partition.clone(), curves)?)
    }

    /// Per block: whether `v(s)/2 + v(t)/2 ≤ I((s+t)/2)` for every pair of
    /// grid points, `I` the linear interpolant of the grid. This holds exactly
    /// when the grid values are compatible with a concave distortion.
    pub fn midpoint_concave(&self) -> Vec<bool> {
        (0..self.partition.len())
            .map(|b| {
                let pts = self.points(b);
                let interp = |m: f64| {
                    let j = pts.partition_point(|p| p.0 < m).clamp(1, pts.len() - 1);
                    let ((t0, v0), (t1, v1)) = (pts[j - 1], pts[j]);
                    v0 + (v1 - v0) * (m - t0) / (t1 - t0)
                };
                pts.iter().enumerate().all(|(i, &(s, vs))| {
                    pts[i + 1..]
                        .iter()
                        .all(|&(t, vt)| 0.5 * (vs + vt) <= interp(0.5 * (s + t)) + 1e-9)
                })
            })
            .collect()
    }
}

fn same_partition(a: &BlockPartition, b: &BlockPartition) -> bool {
    same_space(a.space(), b.space()) && a.blocks() == b.blocks()
}

/// `v_k(b) = ρ(1_{B_k})(b)`. Chain levels with equal capacity must agree;
/// for small spaces every event whose capacity hits a grid level is probed
/// as well.
pub fn extract_distortion(
    rho: &dyn RiskMeasure,
    chain: &NestedChain,
    partition: &BlockPartition,
) -> Result<GridDistortion, RepresentationError> {
    if !same_partition(rho.partition(), partition) || !same_space(chain.space(), partition.space()) {
        return Err(RepresentationError::PartitionMismatch);
    }
    let space = chain.space();
    let indicator = |e: Event| rho.evaluate(&Position::indicator(space.clone(), e, 1.0));
    let per_level: Vec<ConditionalValue> = chain
        .events
        .iter()
        .map(|&e| indicator(e))
        .collect::<Result<_, _>>()?;

    let compare = |k: usize, other: Event, value: &ConditionalValue| -> Result<(), RepresentationError> {
        for b in 0..partition.len() {
            let (first_value, second_value) = (per_level[k].value(b), value.value(b));
            if (first_value - second_value).abs() > WELL_DEFINED_TOL {
                return Err(RepresentationError::WellDefinednessViolation {
                    level: chain.grid[k],
                    block: partition.label(b).to_string(),
                    first: space.event_key(chain.events[k]),
                    second: space.event_key(other),
                    first_value,
                    second_value,
                });
            }
        }
        Ok(())
    };
    for (k, value) in per_level.iter().enumerate().skip(1) {
        if let Some(j) = (0..k).find(|&j| chain.grid[j] == chain.grid[k]) {
            compare(j, chain.events[k], value)?;
        }
    }
    if space.len() <= PROBE_ALL_EVENTS_UP_TO {
        for bits in 0..(1u32 << space.len()) {
            let e = Event::from_bits(bits);
            if chain.events.contains(&e) {
                continue;
            }
            let level = chain.capacity.value(e);
            if let Some(k) = chain.grid.iter().position(|&g| g == level) {
                compare(k, e, &indicator(e)?)?;
            }
        }
    }
    Ok(GridDistortion {
        partition: partition.clone(),
        grid: chain.grid.clone(),
        values: (0..partition.len())
            .map(|b| per_level.iter().map(|v| v.value(b)).collect())
            .collect(),
    })
}

/// Outcome of one sampled axiom.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomCheck {
    pub name: &'static str,
    pub passed: bool,
    pub trials: usize,
    /// Largest observed defect, before tolerance.
    pub max_error: f64,
    pub counterexample: Option<String>,
}

impl AxiomCheck {
    fn new(name: &'static str) -> Self {
        AxiomCheck {
            name,
            passed: true,
            trials: 0,
            max_error: 0.0,
            counterexample: None,
        }
    }

    fn record(&mut self, err: f64, tol: f64, describe: impl FnOnce() -> String) {
        self.trials += 1;
        self.max_error = self.max_error.max(err);
        if err > tol && self.passed {
            self.passed = false;
            self.counterexample = Some(describe());
        }
    }
}

/// Sampled axiom checks. Passing is evidence only; a failure carries a
/// concrete counterexample. `sl_consistency` is reported on its own and does
/// not enter `all_passed`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomReport {
    pub checks: Vec<AxiomCheck>,
    pub sl_consistency: AxiomCheck,
    pub all_passed: bool,
}

impl AxiomReport {
    pub fn check(&self, name: &str) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn tol_for(scale: f64) -> f64 {
    1e-9 * (1.0 + scale)
}

fn max_block_gap(a: &ConditionalValue, b: &ConditionalValue, f: impl Fn(f64, f64) -> f64) -> (usize, f64) {
    (0..a.values().len())
        .map(|i| (i, f(a.value(i), b.value(i))))
        .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best })
}

fn describe(label: &str, x: &Position, y: Option<&Position>, extra: String) -> String {
    match y {
        Some(y) => format!("{label}: X={:?} Y={:?} {extra}", x.values(), y.values()),
        None => format!("{label}: X={:?} {extra}", x.values()),
    }
}

/// Candidate pair for a dominance check: a pointwise increase, a
/// rearrangement, or an unrelated draw.
fn candidate_pair<R: Rng>(rng: &mut R, space: &Arc<SampleSpace>) -> (Position, Position) {
    let x = random_position(rng, space);
    let y = match rng.gen_range(0..3) {
        0 => x
            .zip_with(&random_position(rng, space), |a, b| a + b.abs())
            .expect("same space"),
        1 => {
            let perm = random_ranking(rng, space.len());
            Position::new(space.clone(), perm.iter().map(|&a| x.value(a)).collect()).expect("finite")
        }
        _ => random_position(rng, space),
    };
    (x, y)
}

pub fn check_axioms(
    rho: &dyn RiskMeasure,
    c: &Capacity,
    trials: usize,
    seed: u64,
) -> Result<AxiomReport, RepresentationError> {
    let space = c.space().clone();
    if !same_space(rho.partition().space(), &space) {
        return Err(RepresentationError::PartitionMismatch);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eval = |x: &Position| rho.evaluate(x);

    let mut grounded = AxiomCheck::new("groundedness");
    let zero = Position::constant(space.clone(), 0.0);
    let (_, err) = max_block_gap(&eval(&zero)?, &eval(&zero)?, |a, _| a.abs());
    grounded.record(err, 1e-12, || "rho(0) differs from 0".into());

    let mut normalized = AxiomCheck::new("normalization");
    let one = Position::constant(space.clone(), 1.0);
    let (_, err) = max_block_gap(&eval(&one)?, &eval(&one)?, |a, _| (a - 1.0).abs());
    normalized.record(err, 1e-12, || "rho(1) differs from 1".into());

    let mut translation = AxiomCheck::new("translation-invariance");
    let mut homogeneity = AxiomCheck::new("positive-homogeneity");
    let mut additivity = AxiomCheck::new("comonotonic-additivity");
    let mut st = AxiomCheck::new("st-consistency");
    let mut sl = AxiomCheck::new("sl-consistency");

    for _ in 0..trials {
        let x = random_position(&mut rng, &space);
        let rx = eval(&x)?;

        let a = rng.gen_range(-5.0..5.0);
        let (b, err) = max_block_gap(&eval(&x.shift(a))?, &rx, |l, r| (l - r - a).abs());
        translation.record(err, tol_for(x.sup_norm() + a.abs()), || {
            describe("translation", &x, None, format!("a={a} block={b}"))
        });

        let a = rng.gen_range(0.0..5.0);
        let (b, err) = max_block_gap(&eval(&x.scale(a))?, &rx, |l, r| (l - a * r).abs());
        homogeneity.record(err, tol_for((1.0 + a) * x.sup_norm()), || {
            describe("homogeneity", &x, None, format!("a={a} block={b}"))
        });

        let (u, v) = random_comonotonic_pair(&mut rng, &space);
        let sum = eval(&u.add(&v)?)?;
        let parts = ConditionalValue::new(
            rho.partition().clone(),
            eval(&u)?.values().iter().zip(eval(&v)?.values()).map(|(p, q)| p + q).collect(),
        );
        let (b, err) = max_block_gap(&sum, &parts, |l, r| (l - r).abs());
        additivity.record(err, tol_for(u.sup_norm() + v.sup_norm()), || {
            describe("comonotonic sum", &u, Some(&v), format!("block={b}"))
        });
    }

    for (check, order) in [(&mut st, 0), (&mut sl, 1)] {
        let mut attempts = 0;
        while check.trials < trials && attempts < 20 * trials {
            attempts += 1;
            let (x, y) = candidate_pair(&mut rng, &space);
            let certified = if order == 0 {
                dominates_st(&x, &y, c)?.holds
            } else {
                dominates_sl(&x, &y, c)?.holds
            };
            if !certified {
                continue;
            }
            let (b, err) = max_block_gap(&eval(&x)?, &eval(&y)?, |l, r| (l - r).max(0.0));
            check.record(err, tol_for(x.sup_norm() + y.sup_norm()), || {
                describe("dominated pair", &x, Some(&y), format!("block={b}"))
            });
        }
    }

    let checks = vec![grounded, normalized, translation, homogeneity, additivity, st];
    let all_passed = checks.iter().all(|c| c.passed);
    Ok(AxiomReport {
        checks,
        sl_consistency: sl,
        all_passed,
    })
}

/// Errors of the lifted representation against the risk measure itself.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepresentationReport {
    pub lift: Lift,
    pub trials: usize,
    /// Over positions non-increasing along the chain ranking.
    pub adapted_max_error: f64,
    /// Over unrestricted positions.
    pub arbitrary_max_error: f64,
    /// Grid midpoint concavity per block, reported when sl-consistency held.
    pub concave_consistent: Option<bool>,
}

pub fn verify_representation(
    rho: &dyn RiskMeasure,
    chain: &NestedChain,
    grid: Option<&GridDistortion>,
    trials: usize,
    seed: u64,
    lift: Lift,
    axioms: Option<&AxiomReport>,
) -> Result<RepresentationReport, RepresentationError> {
    let grid = grid.ok_or(RepresentationError::ExtractionMissing)?;
    if !same_partition(rho.partition(), grid.partition()) {
        return Err(RepresentationError::PartitionMismatch);
    }
    let lifted = grid.lift(lift)?;
    let c = chain.capacity();
    let space = chain.space();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gap = |x: &Position| -> Result<f64, RepresentationError> {
        Ok(rho.evaluate(x)?.max_abs_diff(&rd_choquet(x, c, &lifted)?))
    };
    let (mut adapted, mut arbitrary) = (0.0f64, 0.0f64);
    for _ in 0..trials {
        let x = ranked_position(&mut rng, space, &chain.ranking);
        adapted = adapted.max(gap(&x)?);
        let y = random_position(&mut rng, space);
        arbitrary = arbitrary.max(gap(&y)?);
    }
    let concave_consistent = axioms
        .filter(|a| a.sl_consistency.passed)
        .map(|_| grid.midpoint_concave().into_iter().all(|ok| ok));
    Ok(RepresentationReport {
        lift,
        trials,
        adapted_max_error: adapted,
        arbitrary_max_error: arbitrary,
        concave_consistent,
    })
}
