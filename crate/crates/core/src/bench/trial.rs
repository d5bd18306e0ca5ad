use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::counters::TrialCounters;
use crate::geom2d::{Point2, Rect};
use crate::multistage::{MultiStage, MultiStageConfig, Path};
use crate::planner::{Algorithm, Planner};
use crate::replanners::{Drrt, DrrtConfig, MpRrt, MpRrtConfig};
use crate::rrt::{Budget, NnBackend, PlannerRng};
use crate::scenario::Scenario;
use crate::world::WorldState;

/// Knobs shared by every trial of a batch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    /// Planner iterations granted per tick in deterministic mode.
    pub iterations_per_tick: u32,
    /// Use the scenario's wall-clock planning budget instead of iterations.
    /// Results then depend on machine speed.
    pub wall_clock: bool,
    pub nn_backend: NnBackend,
    /// Obstacles are sampled into the trace every this many ticks.
    pub trace_every: u64,
}

impl Default for TrialConfig {
    fn default() -> Self {
        Self {
            iterations_per_tick: 100,
            wall_clock: false,
            nn_backend: NnBackend::Linear,
            trace_every: 20,
        }
    }
}

impl TrialConfig {
    pub fn budget(&self, scenario: &Scenario) -> Budget {
        if self.wall_clock {
            Budget::WallClock(Duration::from_secs_f64(scenario.planning_budget_s))
        } else {
            Budget::Iterations(self.iterations_per_tick)
        }
    }
}

/// Outcome of one trial; one raw CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialMetrics {
    pub algorithm: Algorithm,
    pub scenario: String,
    pub seed: u64,
    pub success: bool,
    #[serde(rename = "coll_checks")]
    pub collision_checks: u64,
    pub nn_lookups: u64,
    /// Simulated time to reach the goal, or the cutoff on failure.
    pub sim_time_s: f64,
    pub wall_time_s: f64,
}

/// What happened during a trial, for plotting.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub bounds: Rect,
    pub walls: Vec<Rect>,
    /// Robot position at the start and after every tick.
    pub trajectory: Vec<Point2>,
    /// Active obstacle footprints at sampled ticks.
    pub obstacles: Vec<(u64, Vec<Rect>)>,
    /// Plan the robot held when a failed trial timed out.
    pub final_path: Option<Path>,
}

/// Planner stream seed for a trial. Worlds use the trial seed directly, so
/// every algorithm sees the same obstacle motion for a given seed.
pub fn planner_seed(seed: u64) -> u64 {
    (seed ^ 0x5851_f42d_4c95_7f2d).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

pub fn make_planner(
    algorithm: Algorithm,
    world: &WorldState,
    scenario: &Scenario,
    cfg: &TrialConfig,
    counters: TrialCounters,
) -> Box<dyn Planner> {
    let h = scenario.robot_half_extent;
    match algorithm {
        Algorithm::MultiStage => {
            let mut c = MultiStageConfig::for_robot(h);
            c.nn_backend = cfg.nn_backend;
            Box::new(MultiStage::new(world, c, counters))
        }
        Algorithm::Drrt => {
            let mut c = DrrtConfig::for_robot(h);
            c.nn_backend = cfg.nn_backend;
            Box::new(Drrt::new(world, c, counters))
        }
        Algorithm::MpRrt => {
            let c = MpRrtConfig {
                nn_backend: cfg.nn_backend,
                ..MpRrtConfig::default()
            };
            Box::new(MpRrt::new(world, c, counters))
        }
    }
}

pub fn run_trial(scenario: &Scenario, algorithm: Algorithm, seed: u64, cfg: &TrialConfig) -> TrialMetrics {
    run(scenario, algorithm, seed, cfg, false).0
}

pub fn run_trial_traced(
    scenario: &Scenario,
    algorithm: Algorithm,
    seed: u64,
    cfg: &TrialConfig,
) -> (TrialMetrics, Trace) {
    let (m, t) = run(scenario, algorithm, seed, cfg, true);
    (m, t.expect("trace requested"))
}

fn run(
    scenario: &Scenario,
    algorithm: Algorithm,
    seed: u64,
    cfg: &TrialConfig,
    traced: bool,
) -> (TrialMetrics, Option<Trace>) {
    let started = Instant::now();
    let counters = TrialCounters::new();
    let mut world = WorldState::new(scenario, seed);
    let mut planner = make_planner(algorithm, &world, scenario, cfg, counters.clone());
    let mut rng = PlannerRng::new(planner_seed(seed));
    let budget = cfg.budget(scenario);
    let mut trace = traced.then(|| Trace {
        bounds: scenario.bounds,
        walls: scenario.walls.clone(),
        trajectory: vec![world.robot],
        obstacles: Vec::new(),
        final_path: None,
    });
    let sample = |world: &WorldState, trace: &mut Option<Trace>| {
        if let Some(t) = trace {
            if world.tick.is_multiple_of(cfg.trace_every.max(1)) {
                t.obstacles
                    .push((world.tick, world.active_obstacles().map(|o| o.rect).collect()));
            }
        }
    };
    sample(&world, &mut trace);

    let mut success = false;
    let mut held: Option<Path> = None;
    for _ in 0..scenario.max_ticks() {
        world.update_world();
        sample(&world, &mut trace);
        let out = planner.tick(&world, &mut rng, budget);
        held = out.path.clone();
        if out.moved {
            if let Some(path) = &out.path {
                let remaining = world.advance_robot(path);
                planner.robot_advanced(&remaining);
                held = Some(remaining);
            }
        }
        if let Some(t) = &mut trace {
            t.trajectory.push(world.robot);
        }
        if world.robot.distance(&world.goal) <= scenario.robot_half_extent {
            success = true;
            break;
        }
    }
    let sim_time_s = if success {
        world.tick as f64 * scenario.tick_s
    } else {
        scenario.cutoff_s
    };
    if let Some(t) = &mut trace {
        if !success {
            t.final_path = held;
        }
    }
    let metrics = TrialMetrics {
        algorithm,
        scenario: scenario.name.clone(),
        seed,
        success,
        collision_checks: counters.collision_checks(),
        nn_lookups: counters.nn_lookups(),
        sim_time_s,
        wall_time_s: started.elapsed().as_secs_f64(),
    };
    (metrics, trace)
}
