//! Scenario documents: map, obstacles, robot parameters and trial limits.
//!
//! On disk a scenario is UTF-8 JSON:
//!
//! ```json
//! {
//!   "name": "dynamic",
//!   "bounds": [0, 0, 100, 100],
//!   "walls": [[30, 0, 32, 40]],
//!   "obstacles": [{"kind": "moving", "rect": [50, 50, 52, 52], "speed": 0.2, "motion_seed": 7}],
//!   "start": [8, 8], "goal": [92, 92],
//!   "robot_speed": 0.75, "robot_half_extent": 1.0,
//!   "cutoff_s": 300, "planning_budget_s": 0.05
//! }
//! ```
//!
//! Rectangles are `[min_x, min_y, max_x, max_y]` and describe the physical
//! footprint; collision checks use them inflated by `robot_half_extent`.

use std::path::Path as FsPath;

use serde::{Deserialize, Serialize};

use crate::error::ScenarioError;
use crate::geom2d::{Point2, Rect};

pub const DYNAMIC_SCENARIO: &str = include_str!("../scenarios/dynamic.scenario");
pub const PARTIAL_SCENARIO: &str = include_str!("../scenarios/partial.scenario");

/// Moving obstacle speeds must fall in this band, as a fraction of robot speed.
pub const MOVING_SPEED_RANGE: (f64, f64) = (0.10, 0.55);

const DEFAULT_TICK_S: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObstacleKind {
    Static,
    Moving,
    Appearing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObstacleSpec {
    /// Footprint at spawn, before inflation.
    pub shape: Rect,
    pub kind: ObstacleKind,
    /// Length per tick; zero unless moving.
    pub speed: f64,
    /// First tick at which the obstacle exists; zero unless appearing.
    pub spawn_tick: u64,
    pub motion_seed: u64,
}

impl ObstacleSpec {
    pub fn is_active_at(&self, tick: u64) -> bool {
        self.kind != ObstacleKind::Appearing || tick >= self.spawn_tick
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub bounds: Rect,
    pub walls: Vec<Rect>,
    pub obstacles: Vec<ObstacleSpec>,
    pub start: Point2,
    pub goal: Point2,
    /// Length per tick.
    pub robot_speed: f64,
    pub robot_half_extent: f64,
    pub cutoff_s: f64,
    /// Wall-clock planning allowance per tick.
    pub planning_budget_s: f64,
    /// Simulated duration of one tick.
    pub tick_s: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObstacleDoc {
    kind: ObstacleKind,
    rect: [f64; 4],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    speed: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    spawn_tick: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    motion_seed: Option<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    name: String,
    bounds: [f64; 4],
    #[serde(default)]
    walls: Vec<[f64; 4]>,
    #[serde(default)]
    obstacles: Vec<ObstacleDoc>,
    start: [f64; 2],
    goal: [f64; 2],
    robot_speed: f64,
    robot_half_extent: f64,
    cutoff_s: f64,
    planning_budget_s: f64,
    #[serde(default = "default_tick_s")]
    tick_s: f64,
}

fn default_tick_s() -> f64 {
    DEFAULT_TICK_S
}

impl Scenario {
    /// Parses and validates a scenario document.
    pub fn from_json(text: &str) -> Result<Scenario, ScenarioError> {
        let doc: ScenarioDoc = serde_json::from_str(text)?;
        let obstacles = doc
            .obstacles
            .iter()
            .enumerate()
            .map(|(i, o)| obstacle_from_doc(i, o))
            .collect::<Result<Vec<_>, _>>()?;
        let scenario = Scenario {
            name: doc.name,
            bounds: rect_field("bounds", doc.bounds)?,
            walls: doc
                .walls
                .iter()
                .enumerate()
                .map(|(i, w)| rect_field(&format!("walls[{i}]"), *w))
                .collect::<Result<Vec<_>, _>>()?,
            obstacles,
            start: Point2::new(doc.start[0], doc.start[1]),
            goal: Point2::new(doc.goal[0], doc.goal[1]),
            robot_speed: doc.robot_speed,
            robot_half_extent: doc.robot_half_extent,
            cutoff_s: doc.cutoff_s,
            planning_budget_s: doc.planning_budget_s,
            tick_s: doc.tick_s,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: impl AsRef<FsPath>) -> Result<Scenario, ScenarioError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Scenario::from_json(&text)
    }

    /// One of the scenarios shipped with the crate: `dynamic` or `partial`.
    pub fn bundled(name: &str) -> Result<Scenario, ScenarioError> {
        match name {
            "dynamic" => Scenario::from_json(DYNAMIC_SCENARIO),
            "partial" => Scenario::from_json(PARTIAL_SCENARIO),
            other => Err(ScenarioError::UnknownBundled(other.to_string())),
        }
    }

    pub fn to_json(&self) -> String {
        let doc = ScenarioDoc {
            name: self.name.clone(),
            bounds: self.bounds.to_array(),
            walls: self.walls.iter().map(Rect::to_array).collect(),
            obstacles: self
                .obstacles
                .iter()
                .map(|o| ObstacleDoc {
                    kind: o.kind,
                    rect: o.shape.to_array(),
                    speed: (o.kind == ObstacleKind::Moving).then_some(o.speed),
                    spawn_tick: (o.kind == ObstacleKind::Appearing).then_some(o.spawn_tick),
                    motion_seed: (o.kind == ObstacleKind::Moving).then_some(o.motion_seed),
                })
                .collect(),
            start: [self.start.x, self.start.y],
            goal: [self.goal.x, self.goal.y],
            robot_speed: self.robot_speed,
            robot_half_extent: self.robot_half_extent,
            cutoff_s: self.cutoff_s,
            planning_budget_s: self.planning_budget_s,
            tick_s: self.tick_s,
        };
        serde_json::to_string_pretty(&doc).expect("scenario serializes")
    }

    /// Number of simulation ticks before the cutoff.
    pub fn max_ticks(&self) -> u64 {
        (self.cutoff_s / self.tick_s).round() as u64
    }

    pub fn inflated_walls(&self) -> Vec<Rect> {
        self.walls.iter().map(|w| w.inflate(self.robot_half_extent)).collect()
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let positive = |field: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(ScenarioError::invalid(
                    field,
                    format!("must be a positive number, got {v}"),
                ))
            }
        };
        positive("robot_speed", self.robot_speed)?;
        positive("cutoff_s", self.cutoff_s)?;
        positive("planning_budget_s", self.planning_budget_s)?;
        positive("tick_s", self.tick_s)?;
        if !(self.robot_half_extent.is_finite() && self.robot_half_extent >= 0.0) {
            return Err(ScenarioError::invalid(
                "robot_half_extent",
                "must be a non-negative number",
            ));
        }
        for (i, w) in self.walls.iter().enumerate() {
            if !self.bounds.contains_rect(w) {
                return Err(ScenarioError::invalid(format!("walls[{i}]"), "lies outside bounds"));
            }
        }
        let (lo, hi) = MOVING_SPEED_RANGE;
        for (i, o) in self.obstacles.iter().enumerate() {
            let field = format!("obstacles[{i}]");
            if !self.bounds.contains_rect(&o.shape) {
                return Err(ScenarioError::invalid(field, "lies outside bounds"));
            }
            if o.kind == ObstacleKind::Moving {
                let ratio = o.speed / self.robot_speed;
                // Small slack so documents written with rounded speeds validate.
                if !(ratio >= lo - 1e-9 && ratio <= hi + 1e-9) {
                    return Err(ScenarioError::invalid(
                        format!("{field}.speed"),
                        format!("must be within [{lo}, {hi}] x robot_speed, got ratio {ratio:.4}"),
                    ));
                }
                if let Some(j) = self.walls.iter().position(|w| w.overlaps_interior(&o.shape)) {
                    return Err(ScenarioError::invalid(field, format!("overlaps walls[{j}]")));
                }
            }
        }
        for (field, p) in [("start", self.start), ("goal", self.goal)] {
            if !p.is_finite() || !self.bounds.contains(p) {
                return Err(ScenarioError::invalid(field, "lies outside bounds"));
            }
            let h = self.robot_half_extent;
            if let Some(i) = self.walls.iter().position(|w| w.inflate(h).contains(p)) {
                return Err(ScenarioError::invalid(field, format!("lies inside walls[{i}]")));
            }
            if let Some(i) = self
                .obstacles
                .iter()
                .position(|o| o.is_active_at(0) && o.shape.inflate(h).contains(p))
            {
                return Err(ScenarioError::invalid(field, format!("overlaps obstacles[{i}]")));
            }
        }
        if self.start == self.goal {
            return Err(ScenarioError::invalid("goal", "must differ from start"));
        }
        Ok(())
    }
}

fn rect_field(field: &str, a: [f64; 4]) -> Result<Rect, ScenarioError> {
    let r = Rect::from_array(a);
    if !r.is_valid() {
        return Err(ScenarioError::invalid(
            field,
            "must be [min_x, min_y, max_x, max_y] with min <= max",
        ));
    }
    Ok(r)
}

fn obstacle_from_doc(i: usize, o: &ObstacleDoc) -> Result<ObstacleSpec, ScenarioError> {
    let field = format!("obstacles[{i}]");
    let shape = rect_field(&format!("{field}.rect"), o.rect)?;
    let (speed, spawn_tick) = match o.kind {
        ObstacleKind::Static => (0.0, 0),
        ObstacleKind::Moving => {
            let s = o
                .speed
                .ok_or_else(|| ScenarioError::invalid(format!("{field}.speed"), "is required for moving obstacles"))?;
            (s, 0)
        }
        ObstacleKind::Appearing => {
            let t = o.spawn_tick.ok_or_else(|| {
                ScenarioError::invalid(format!("{field}.spawn_tick"), "is required for appearing obstacles")
            })?;
            (0.0, t)
        }
    };
    Ok(ObstacleSpec {
        shape,
        kind: o.kind,
        speed,
        spawn_tick,
        motion_seed: o.motion_seed.unwrap_or(i as u64),
    })
}
