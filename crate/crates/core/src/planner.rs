//! Per-tick interface shared by every planner.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::counters::CounterSnapshot;
use crate::error::BenchError;
use crate::multistage::Path;
use crate::rrt::{Budget, PlannerRng, Tree};
use crate::world::WorldState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    #[serde(rename = "multistage")]
    MultiStage,
    Drrt,
    #[serde(rename = "mprrt")]
    MpRrt,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::MultiStage, Algorithm::Drrt, Algorithm::MpRrt];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::MultiStage => "multistage",
            Algorithm::Drrt => "drrt",
            Algorithm::MpRrt => "mprrt",
        }
    }

    /// Label used in printed result tables.
    pub fn display_name(&self) -> &'static str {
        match self {
            Algorithm::MultiStage => "Multi-stage",
            Algorithm::Drrt => "DRRT",
            Algorithm::MpRrt => "MP-RRT",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "multistage" => Ok(Algorithm::MultiStage),
            "drrt" => Ok(Algorithm::Drrt),
            "mprrt" => Ok(Algorithm::MpRrt),
            _ => Err(BenchError::UnknownAlgorithm(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannerTickOutcome {
    /// Current plan from the robot to the goal, if the planner holds one.
    pub path: Option<Path>,
    /// The robot may follow `path` this tick: the path was feasible against
    /// the world snapshot the tick planned on.
    pub moved: bool,
    pub diagnostics: CounterSnapshot,
}

pub trait Planner {
    fn algorithm(&self) -> Algorithm;

    /// One `process` call against the current world.
    fn tick(&mut self, world: &WorldState, rng: &mut PlannerRng, budget: Budget) -> PlannerTickOutcome;

    /// Informs the planner that the robot moved; `remaining` starts at the new
    /// robot position and is the unconsumed tail of the last emitted path.
    fn robot_advanced(&mut self, remaining: &Path);

    /// Trees currently stored, for invariant checks and tracing.
    fn trees(&self) -> Vec<&Tree>;
}
