//! Scenario files and result serialization.

use std::fmt;
use std::marker::PhantomData;
use std::sync::Arc;

use indexmap::IndexMap;
use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::capacity::{Capacity, CapacityError, CapacitySpec};
use crate::choquet::ConditionalValue;
use crate::distortion::{DistortionError, DistortionSpec, RandomDistortion};
use crate::json::{format_g17, to_json_string};
use crate::space::{Block, BlockPartition, Position, SampleSpace};

pub const SCHEMA_VERSION: &str = "choquet-risk/1";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    SyntaxError {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error: {0}")]
    SchemaError(String),
    #[error("invalid {element}: {message}")]
    ValidationError { element: String, message: String },
    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },
}

impl ScenarioError {
    fn invalid(element: impl Into<String>, err: impl fmt::Display) -> Self {
        ScenarioError::ValidationError {
            element: element.into(),
            message: err.to_string(),
        }
    }
}

/// Map that keeps file order and rejects repeated keys.
#[derive(Debug, Clone, PartialEq)]
pub struct UniqueMap<T>(pub IndexMap<String, T>);

impl<T> Default for UniqueMap<T> {
    fn default() -> Self {
        UniqueMap(IndexMap::new())
    }
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for UniqueMap<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V<T>(PhantomData<T>);
        impl<'de, T: Deserialize<'de>> Visitor<'de> for V<T> {
            type Value = UniqueMap<T>;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map with unique names")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Self::Value, A::Error> {
                let mut out = IndexMap::new();
                while let Some((k, v)) = map.next_entry::<String, T>()? {
                    if out.contains_key(&k) {
                        return Err(serde::de::Error::custom(format!("duplicate name `{k}`")));
                    }
                    out.insert(k, v);
                }
                Ok(UniqueMap(out))
            }
        }
        d.deserialize_map(V(PhantomData))
    }
}

impl<T: Serialize> Serialize for UniqueMap<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_map(self.0.iter())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBlock {
    label: String,
    atoms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    schema: String,
    atoms: Vec<String>,
    capacity: CapacitySpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    partition: Option<Vec<RawBlock>>,
    #[serde(default)]
    positions: UniqueMap<Vec<f64>>,
    #[serde(default)]
    distortions: UniqueMap<Vec<DistortionSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

/// A fully validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub space: Arc<SampleSpace>,
    pub capacity_spec: CapacitySpec,
    pub capacity: Capacity,
    pub partition: BlockPartition,
    pub positions: IndexMap<String, Position>,
    pub distortions: IndexMap<String, RandomDistortion>,
    pub distortion_specs: IndexMap<String, Vec<DistortionSpec>>,
    pub seed: Option<u64>,
}

impl Scenario {
    pub fn position(&self, name: &str) -> Result<&Position, ScenarioError> {
        self.positions.get(name).ok_or_else(|| ScenarioError::UnknownName {
            kind: "position",
            name: name.to_string(),
        })
    }

    pub fn distortion(&self, name: &str) -> Result<&RandomDistortion, ScenarioError> {
        self.distortions.get(name).ok_or_else(|| ScenarioError::UnknownName {
            kind: "distortion",
            name: name.to_string(),
        })
    }
}

fn syntax(e: serde_json::Error) -> ScenarioError {
    ScenarioError::SyntaxError {
        line: e.line(),
        column: e.column(),
        message: strip_position(&e.to_string()),
    }
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

pub fn parse_scenario(bytes: &[u8]) -> Result<Scenario, ScenarioError> {
    let value: serde_json::Value = serde_json::from_slice(bytes).map_err(syntax)?;
    match value.get("schema") {
        None => return Err(ScenarioError::SchemaError("missing field `schema`".into())),
        Some(serde_json::Value::String(s)) if s == SCHEMA_VERSION => {}
        Some(other) => {
            return Err(ScenarioError::SchemaError(format!(
                "unsupported schema version {other}, expected \"{SCHEMA_VERSION}\""
            )))
        }
    }
    let raw: RawScenario = serde_json::from_slice(bytes).map_err(|e| {
        ScenarioError::SchemaError(format!("{} (line {}, column {})", strip_position(&e.to_string()), e.line(), e.column()))
    })?;
    build(raw)
}

fn build(raw: RawScenario) -> Result<Scenario, ScenarioError> {
    let space = SampleSpace::new(raw.atoms.iter()).map_err(|e| ScenarioError::invalid("atoms", e))?;
    let capacity = raw.capacity.build(space.clone()).map_err(|e| match e {
        CapacityError::MissingEvent(key) => {
            ScenarioError::SchemaError(format!("capacity table is missing event \"{key}\""))
        }
        other => ScenarioError::invalid("capacity", other),
    })?;

    let partition = match &raw.partition {
        None => BlockPartition::trivial(space.clone()),
        Some(blocks) => {
            let blocks = blocks
                .iter()
                .map(|b| {
                    let event = space
                        .event_from_labels(b.atoms.iter())
                        .map_err(|e| ScenarioError::invalid(format!("partition block `{}`", b.label), e))?;
                    Ok(Block {
                        label: b.label.clone(),
                        event,
                    })
                })
                .collect::<Result<Vec<_>, ScenarioError>>()?;
            BlockPartition::new(space.clone(), blocks).map_err(|e| ScenarioError::invalid("partition", e))?
        }
    };

    let mut positions = IndexMap::new();
    for (name, values) in &raw.positions.0 {
        let p = Position::new(space.clone(), values.clone())
            .map_err(|e| ScenarioError::invalid(format!("position `{name}`"), e))?;
        positions.insert(name.clone(), p);
    }

    let mut distortions = IndexMap::new();
    for (name, specs) in &raw.distortions.0 {
        let d = RandomDistortion::from_specs(partition.clone(), specs).map_err(|e| {
            let e = match e {
                DistortionError::InBlock { block, source } => format!("block `{block}`: {source}"),
                other => other.to_string(),
            };
            ScenarioError::invalid(format!("distortion `{name}`"), e)
        })?;
        distortions.insert(name.clone(), d);
    }

    Ok(Scenario {
        space,
        capacity_spec: raw.capacity,
        capacity,
        partition,
        positions,
        distortions,
        distortion_specs: raw.distortions.0,
        seed: raw.seed,
    })
}

/// Writes a scenario back to JSON; parsing the output yields an equal value.
pub fn serialize_scenario(s: &Scenario) -> String {
    let raw = RawScenario {
        schema: SCHEMA_VERSION.to_string(),
        atoms: s.space.labels().to_vec(),
        capacity: s.capacity_spec.clone(),
        partition: Some(
            s.partition
                .blocks()
                .iter()
                .map(|b| RawBlock {
                    label: b.label.clone(),
                    atoms: s.space.event_labels(b.event).into_iter().map(String::from).collect(),
                })
                .collect(),
        ),
        positions: UniqueMap(
            s.positions
                .iter()
                .map(|(k, p)| (k.clone(), p.values().to_vec()))
                .collect(),
        ),
        distortions: UniqueMap(s.distortion_specs.clone()),
        seed: s.seed,
    };
    to_json_string(&raw).expect("scenario is serializable")
}

/// One evaluated block.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValueRecord {
    pub position: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distortion: Option<String>,
    pub block: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<f64>,
}

/// Records for every block of a conditional value.
pub fn value_records(position: &str, distortion: Option<&str>, v: &ConditionalValue) -> Vec<ValueRecord> {
    v.records()
        .into_iter()
        .map(|r| ValueRecord {
            position: position.to_string(),
            distortion: distortion.map(String::from),
            block: r.block,
            value: r.value,
            oracle: None,
        })
        .collect()
}

/// JSON array with sorted keys.
pub fn results_json<T: Serialize>(records: &[T]) -> String {
    to_json_string(&records).expect("records are serializable")
}

/// CSV with header `position,block,value`, extended by `distortion` and
/// `oracle` columns when any record carries them.
pub fn results_csv(records: &[ValueRecord]) -> String {
    let with_d = records.iter().any(|r| r.distortion.is_some());
    let with_o = records.iter().any(|r| r.oracle.is_some());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["position"];
    if with_d {
        header.push("distortion");
    }
    header.extend(["block", "value"]);
    if with_o {
        header.push("oracle");
    }
    w.write_record(&header).expect("in-memory write");
    for r in records {
        let mut row = vec![r.position.clone()];
        if with_d {
            row.push(r.distortion.clone().unwrap_or_default());
        }
        row.push(r.block.clone());
        row.push(format_g17(r.value));
        if with_o {
            row.push(r.oracle.map(format_g17).unwrap_or_default());
        }
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

/// Rows of `(column values…)` as CSV under the given header.
pub fn table_csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}
