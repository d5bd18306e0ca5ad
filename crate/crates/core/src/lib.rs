//! Simulation and benchmarking of sampling-based replanners for a point robot
//! among moving and appearing rectangular obstacles.
//!
//! The [`multistage`] planner keeps a single path and repairs it locally with
//! cheap geometric edits; the [`replanners`] module holds the tree-based DRRT
//! and MP-RRT baselines. [`bench`] runs paired trials of any of them against a
//! [`scenario`] and writes per-trial CSV rows, summaries and SVG traces.

pub mod bench;
pub mod counters;
pub mod error;
pub mod geom2d;
pub mod multistage;
pub mod planner;
pub mod replanners;
pub mod rrt;
pub mod scenario;
pub mod world;

pub use counters::{CounterSnapshot, TrialCounters};
pub use error::{BenchError, PathError, RrtError, ScenarioError};
pub use geom2d::{Point2, Rect, Segment};
pub use multistage::{MultiStage, MultiStageConfig, Path};
pub use planner::{Algorithm, Planner, PlannerTickOutcome};
pub use replanners::{Drrt, DrrtConfig, MpRrt, MpRrtConfig};
pub use rrt::{Budget, NnBackend, PlannerRng, Tree};
pub use scenario::Scenario;
pub use world::WorldState;
