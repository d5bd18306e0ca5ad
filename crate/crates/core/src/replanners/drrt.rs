use serde::{Deserialize, Serialize};

use super::{trim_invalid, GoalTree, SampleKind, SampleStats, WaypointCache};
use crate::counters::TrialCounters;
use crate::geom2d::{Point2, Rect};
use crate::multistage::Path;
use crate::planner::{Algorithm, Planner, PlannerTickOutcome};
use crate::rrt::{BidirectionalRrt, Budget, BudgetTracker, NnBackend, PlannerRng, Tree, DEFAULT_GOAL_BIAS};
use crate::world::WorldState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DrrtConfig {
    pub goal_bias: f64,
    /// Probability of sampling near a cached waypoint while the cache is non-empty.
    pub waypoint_bias: f64,
    pub cache_capacity: usize,
    /// Radius of the sampling disc around a cached waypoint.
    pub vicinity: f64,
    pub nn_backend: NnBackend,
}

impl DrrtConfig {
    pub fn for_robot(half_extent: f64) -> Self {
        Self {
            goal_bias: DEFAULT_GOAL_BIAS,
            waypoint_bias: 0.4,
            cache_capacity: 100,
            vicinity: 5.0 * half_extent,
            nn_backend: NnBackend::Linear,
        }
    }
}

/// Draws one regrowth target.
pub fn sample_drrt(
    rng: &mut PlannerRng,
    cache: &WaypointCache,
    robot: Point2,
    bounds: &Rect,
    cfg: &DrrtConfig,
) -> (Point2, SampleKind) {
    if !cache.is_empty() && rng.unit() < cfg.waypoint_bias {
        let w = cache.pick(rng).expect("non-empty cache");
        let q = rng.point_in_disc(w, cfg.vicinity);
        let q = Point2::new(
            q.x.clamp(bounds.min.x, bounds.max.x),
            q.y.clamp(bounds.min.y, bounds.max.y),
        );
        return (q, SampleKind::Waypoint);
    }
    if rng.unit() < cfg.goal_bias {
        (robot, SampleKind::Robot)
    } else {
        (rng.point_in(bounds), SampleKind::Uniform)
    }
}

#[derive(Debug, Clone)]
enum Phase {
    Bootstrap(BidirectionalRrt),
    Tree(GoalTree),
}

/// Trim-and-regrow replanner. Invalid branches are deleted and their node
/// positions feed a waypoint cache that biases regrowth.
#[derive(Debug, Clone)]
pub struct Drrt {
    cfg: DrrtConfig,
    counters: TrialCounters,
    phase: Phase,
    cache: WaypointCache,
    stats: SampleStats,
}

impl Drrt {
    pub fn new(world: &WorldState, cfg: DrrtConfig, counters: TrialCounters) -> Self {
        let bootstrap = BidirectionalRrt::new(world.robot, world.goal, counters.clone(), cfg.nn_backend, cfg.goal_bias);
        Self {
            cache: WaypointCache::new(cfg.cache_capacity),
            cfg,
            counters,
            phase: Phase::Bootstrap(bootstrap),
            stats: SampleStats::default(),
        }
    }

    pub fn cache(&self) -> &WaypointCache {
        &self.cache
    }

    pub fn sample_stats(&self) -> SampleStats {
        self.stats
    }

    pub fn config(&self) -> &DrrtConfig {
        &self.cfg
    }

    fn trim_into_cache(&mut self, tree: &Tree, world: &WorldState, rng: &mut PlannerRng) -> super::Trimmed {
        let out = trim_invalid(tree, world, &self.counters);
        for &p in &out.removed {
            self.cache.push(p, rng);
        }
        out
    }

    fn regrow(&mut self, gt: &mut GoalTree, world: &WorldState, rng: &mut PlannerRng, tracker: &mut BudgetTracker) {
        while gt.attach.is_none() && tracker.try_consume() {
            let eligible = !self.cache.is_empty();
            let (q, kind) = sample_drrt(rng, &self.cache, world.robot, &world.bounds, &self.cfg);
            self.stats.eligible += eligible as u64;
            match kind {
                SampleKind::Waypoint => self.stats.biased += 1,
                SampleKind::Robot => self.stats.robot += 1,
                _ => self.stats.uniform += 1,
            }
            if let Some(id) = gt.tree.extend(q, world).node() {
                gt.try_attach(id, world.robot);
            }
        }
    }
}

impl Planner for Drrt {
    fn algorithm(&self) -> Algorithm {
        Algorithm::Drrt
    }

    fn tick(&mut self, world: &WorldState, rng: &mut PlannerRng, budget: Budget) -> PlannerTickOutcome {
        let mut tracker = BudgetTracker::new(budget);
        let placeholder = Phase::Tree(GoalTree {
            tree: Tree::empty(self.counters.clone(), self.cfg.nn_backend),
            attach: None,
        });
        let mut gt = match std::mem::replace(&mut self.phase, placeholder) {
            Phase::Bootstrap(mut b) => {
                b.init = self.trim_into_cache(&b.init, world, rng).tree;
                b.goal = self.trim_into_cache(&b.goal, world, rng).tree;
                b.grow(rng, world, &mut tracker);
                if !b.is_connected() {
                    self.phase = Phase::Bootstrap(b);
                    return PlannerTickOutcome {
                        path: None,
                        moved: false,
                        diagnostics: self.counters.snapshot(),
                    };
                }
                let (tree, robot) = b.into_goal_rooted().expect("connected");
                GoalTree {
                    tree,
                    attach: Some(robot),
                }
            }
            Phase::Tree(mut gt) => {
                let out = self.trim_into_cache(&gt.tree, world, rng);
                gt.attach = gt.attach.and_then(|a| out.remap[a]);
                gt.tree = out.tree;
                gt.check_attachment(world, &self.counters);
                gt
            }
        };
        if gt.attach.is_none() {
            self.regrow(&mut gt, world, rng, &mut tracker);
        }
        let path = gt.route(world.robot);
        self.phase = Phase::Tree(gt);
        PlannerTickOutcome {
            moved: path.is_some(),
            path,
            diagnostics: self.counters.snapshot(),
        }
    }

    fn robot_advanced(&mut self, remaining: &Path) {
        if let Phase::Tree(gt) = &mut self.phase {
            gt.follow(remaining);
        }
    }

    fn trees(&self) -> Vec<&Tree> {
        match &self.phase {
            Phase::Bootstrap(b) => vec![&b.init, &b.goal],
            Phase::Tree(gt) => vec![&gt.tree],
        }
    }
}
