//! Weighted k-server on uniform metrics through hierarchical service patterns.
//!
//! An online pattern constructor decides only *when* each server moves; the
//! revealed-pattern algorithm in [`rsp`] decides *where*, by sampling from the
//! sets of labels that keep the pattern feasibly labelable ([`feasibility`]).
//! [`offline`] gives exact optima for small instances and [`adversary`]
//! generates the hard input distribution for the lower bound.

pub mod adversary;
pub mod composer;
pub mod error;
pub mod feasibility;
pub mod model;
pub mod offline;
pub mod rsp;
pub mod sequences;
pub mod spc;

pub use composer::{compose_run, ComposedRun};
pub use error::{Error, Result};
pub use feasibility::{FeasibilityIndex, LabelSet};
pub use model::{
    pattern_cost, CostReport, ExtensionTrace, Interval, Labeling, Level, LevelCounters, Point,
    Universe, Weights,
};
pub use rsp::{MoveKind, RspEngine, StepOutcome};
pub use spc::{LazySpc, OracleSpc, SpcAlgorithm};
