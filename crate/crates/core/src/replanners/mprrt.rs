use serde::{Deserialize, Serialize};

use super::{split_invalid, trim_invalid, Forest, GoalTree, SampleKind, SampleStats};
use crate::counters::TrialCounters;
use crate::geom2d::{Point2, Rect};
use crate::multistage::Path;
use crate::planner::{Algorithm, Planner, PlannerTickOutcome};
use crate::rrt::{
    BidirectionalRrt, Budget, BudgetTracker, ExtendOutcome, NnBackend, PlannerRng, Tree, DEFAULT_GOAL_BIAS,
};
use crate::world::WorldState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MpRrtConfig {
    pub goal_bias: f64,
    /// Probability of trying to reconnect a stored subtree.
    pub reuse_bias: f64,
    pub forest_capacity: usize,
    pub min_subtree: usize,
    pub nn_backend: NnBackend,
}

impl Default for MpRrtConfig {
    fn default() -> Self {
        Self {
            goal_bias: DEFAULT_GOAL_BIAS,
            reuse_bias: 0.1,
            forest_capacity: 25,
            min_subtree: 5,
            nn_backend: NnBackend::Linear,
        }
    }
}

/// Draws one regrowth target.
pub fn sample_mprrt(
    rng: &mut PlannerRng,
    forest: &Forest,
    robot: Point2,
    bounds: &Rect,
    cfg: &MpRrtConfig,
) -> (Point2, SampleKind) {
    let u = rng.unit();
    if u < cfg.reuse_bias && !forest.is_empty() {
        let i = rng.index(forest.len());
        (forest.root_of(i), SampleKind::Forest(i))
    } else if u < cfg.reuse_bias + cfg.goal_bias {
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

/// Replanner that keeps pruned subtrees and grafts them back when the main
/// tree reaches one of their roots.
#[derive(Debug, Clone)]
pub struct MpRrt {
    cfg: MpRrtConfig,
    counters: TrialCounters,
    phase: Phase,
    forest: Forest,
    stats: SampleStats,
}

impl MpRrt {
    pub fn new(world: &WorldState, cfg: MpRrtConfig, counters: TrialCounters) -> Self {
        let bootstrap = BidirectionalRrt::new(world.robot, world.goal, counters.clone(), cfg.nn_backend, cfg.goal_bias);
        Self {
            forest: Forest::new(cfg.forest_capacity, cfg.min_subtree),
            cfg,
            counters,
            phase: Phase::Bootstrap(bootstrap),
            stats: SampleStats::default(),
        }
    }

    pub fn forest(&self) -> &Forest {
        &self.forest
    }

    pub fn sample_stats(&self) -> SampleStats {
        self.stats
    }

    pub fn config(&self) -> &MpRrtConfig {
        &self.cfg
    }

    fn regrow(&mut self, gt: &mut GoalTree, world: &WorldState, rng: &mut PlannerRng, tracker: &mut BudgetTracker) {
        while gt.attach.is_none() && tracker.try_consume() {
            let eligible = !self.forest.is_empty();
            let (q, kind) = sample_mprrt(rng, &self.forest, world.robot, &world.bounds, &self.cfg);
            self.stats.eligible += eligible as u64;
            match kind {
                SampleKind::Forest(_) => self.stats.biased += 1,
                SampleKind::Robot => self.stats.robot += 1,
                _ => self.stats.uniform += 1,
            }
            let out = gt.tree.extend(q, world);
            if let (SampleKind::Forest(i), ExtendOutcome::Added(id)) = (kind, out) {
                if gt.tree.position(id) == q {
                    let sub = self.forest.take(i);
                    graft(&mut gt.tree, id, &sub);
                }
            }
            if let Some(id) = out.node() {
                gt.try_attach(id, world.robot);
            }
        }
    }
}

/// Appends `sub` below `at`, whose position equals the subtree root.
fn graft(tree: &mut Tree, at: usize, sub: &Tree) {
    let mut ids = Vec::with_capacity(sub.len());
    ids.push(at);
    for n in &sub.nodes()[1..] {
        let parent = ids[n.parent.expect("non-root node has a parent")];
        ids.push(tree.add(n.position, Some(parent)));
    }
}

impl Planner for MpRrt {
    fn algorithm(&self) -> Algorithm {
        Algorithm::MpRrt
    }

    fn tick(&mut self, world: &WorldState, rng: &mut PlannerRng, budget: Budget) -> PlannerTickOutcome {
        let mut tracker = BudgetTracker::new(budget);
        let placeholder = Phase::Tree(GoalTree {
            tree: Tree::empty(self.counters.clone(), self.cfg.nn_backend),
            attach: None,
        });
        let mut gt = match std::mem::replace(&mut self.phase, placeholder) {
            Phase::Bootstrap(mut b) => {
                b.init = trim_invalid(&b.init, world, &self.counters).tree;
                b.goal = trim_invalid(&b.goal, world, &self.counters).tree;
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
                self.forest.prune(world, &self.counters);
                let split = split_invalid(&gt.tree, world, true, &self.counters);
                gt.attach = gt.attach.and_then(|a| split.main_remap[a]);
                gt.tree = split.main.expect("goal root is kept");
                for orphan in split.orphans {
                    self.forest.insert(orphan);
                }
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
        let mut out: Vec<&Tree> = match &self.phase {
            Phase::Bootstrap(b) => vec![&b.init, &b.goal],
            Phase::Tree(gt) => vec![&gt.tree],
        };
        out.extend(self.forest.trees());
        out
    }
}
