//! Finite-space engine for randomly distorted Choquet integrals.
//!
//! A scenario fixes a sample space of labelled atoms, a capacity on its
//! events, a partition into blocks, and one distortion curve per block. The
//! conditional value of a position is computed exactly from its level sets.

pub mod capacity;
pub mod choquet;
pub mod comonotone;
pub mod distortion;
pub mod json;
pub mod order;
pub mod representation;
pub mod scenario;
pub mod sampling;
pub mod space;
pub mod step;

pub use capacity::{capacity_from_generator, validate_capacity, Capacity, CapacityError, CapacityGenerator, CapacitySpec};
pub use choquet::{choquet, rd_choquet, rd_choquet_concave_dual, rd_choquet_oracle, step_formula, ChoquetError, ConditionalValue};
pub use comonotone::{are_comonotonic, comonotonic_decomposition, ComonotonicForm};
pub use distortion::{
    build_distortion, builtin_distortion, eval_distortion, is_concave, BuiltinKind, DistortionCurve,
    DistortionError, DistortionSpec, RandomDistortion, RawSegment, Segment,
};
pub use space::{is_block_measurable, Block, BlockPartition, Event, Position, SampleSpace, SpaceError};
pub use step::{distribution_function, quantiles, Continuity, Quantiles, StepFunction};
pub use order::{
    dominates_sl, dominates_st, falsify_icx, stop_loss, weighted_quantile_integral, DominanceVerdict, OrderError,
    TestUtility, WeightCurve, Witness,
};
pub use representation::{
    build_nested_chain, check_axioms, extract_distortion, verify_representation, AxiomReport, BlockConditionalMean,
    DistortedChoquet, FnRisk, GridDistortion, Lift, NestedChain, PluginRisk, RepresentationError, RepresentationReport,
    RiskMeasure,
};
pub use scenario::{parse_scenario, serialize_scenario, Scenario, ScenarioError};
