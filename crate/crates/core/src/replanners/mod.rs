//! Baseline dynamic replanners built on goal-rooted trees: DRRT (trim and
//! regrow with waypoint bias) and MP-RRT (keep pruned subtrees in a forest and
//! reconnect them).
//!
//! Both start with the same bidirectional RRT as the multi-stage planner, join
//! the two trees into one rooted at the goal, and from then on regrow that
//! tree towards the robot whenever the robot's route is cut. The robot only
//! moves while it holds a route that is free in the current snapshot.

mod drrt;
mod mprrt;

pub use drrt::{Drrt, DrrtConfig};
pub use mprrt::{MpRrt, MpRrtConfig};

use serde::{Deserialize, Serialize};

use crate::counters::TrialCounters;
use crate::geom2d::{Point2, Segment};
use crate::multistage::Path;
use crate::rrt::{NodeId, PlannerRng, Tree, TreeNode};
use crate::world::WorldState;

/// Fixed-capacity store of positions with uniform random replacement.
#[derive(Debug, Clone, PartialEq)]
pub struct WaypointCache {
    capacity: usize,
    entries: Vec<Point2>,
}

impl WaypointCache {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "waypoint cache needs room for one entry");
        Self {
            capacity,
            entries: Vec::with_capacity(capacity),
        }
    }

    /// Inserts `p`. When full, returns the slot that was overwritten.
    pub fn push(&mut self, p: Point2, rng: &mut PlannerRng) -> Option<usize> {
        if self.entries.len() < self.capacity {
            self.entries.push(p);
            None
        } else {
            let slot = rng.index(self.capacity);
            self.entries[slot] = p;
            Some(slot)
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn entries(&self) -> &[Point2] {
        &self.entries
    }

    pub fn pick(&self, rng: &mut PlannerRng) -> Option<Point2> {
        (!self.entries.is_empty()).then(|| self.entries[rng.index(self.entries.len())])
    }
}

/// Disconnected subtrees kept for reuse, oldest first.
#[derive(Debug, Clone)]
pub struct Forest {
    capacity: usize,
    min_subtree: usize,
    entries: Vec<(u64, Tree)>,
    next_stamp: u64,
}

impl Forest {
    pub fn new(capacity: usize, min_subtree: usize) -> Self {
        Self {
            capacity,
            min_subtree,
            entries: Vec::new(),
            next_stamp: 0,
        }
    }

    /// Stores `tree` if it is large enough, evicting the oldest entry when the
    /// forest is full. Returns the evicted tree, if any.
    pub fn insert(&mut self, tree: Tree) -> Option<Tree> {
        let stamp = self.next_stamp;
        self.next_stamp += 1;
        self.insert_stamped(stamp, tree)
    }

    fn insert_stamped(&mut self, stamp: u64, tree: Tree) -> Option<Tree> {
        if tree.len() < self.min_subtree {
            return None;
        }
        let at = self.entries.partition_point(|(s, _)| *s <= stamp);
        self.entries.insert(at, (stamp, tree));
        if self.entries.len() > self.capacity {
            Some(self.entries.remove(0).1)
        } else {
            None
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn min_subtree(&self) -> usize {
        self.min_subtree
    }

    pub fn trees(&self) -> impl Iterator<Item = &Tree> {
        self.entries.iter().map(|(_, t)| t)
    }

    /// Insertion stamps, oldest first.
    pub fn stamps(&self) -> Vec<u64> {
        self.entries.iter().map(|(s, _)| *s).collect()
    }

    pub fn root_of(&self, i: usize) -> Point2 {
        self.entries[i].1.position(Tree::ROOT)
    }

    pub fn take(&mut self, i: usize) -> Tree {
        self.entries.remove(i).1
    }

    /// Splits every stored tree against the world. Surviving fragments keep
    /// their parent's stamp; fragments below the minimum size are dropped.
    pub fn prune(&mut self, world: &WorldState, counters: &TrialCounters) {
        let old = std::mem::take(&mut self.entries);
        for (stamp, tree) in old {
            let split = split_invalid(&tree, world, false, counters);
            for piece in split.main.into_iter().chain(split.orphans) {
                self.insert_stamped(stamp, piece);
            }
        }
    }
}

/// Result of removing invalid branches from a tree.
#[derive(Debug, Clone)]
pub struct Trimmed {
    pub tree: Tree,
    /// Positions of every deleted node.
    pub removed: Vec<Point2>,
    /// Old id to new id, `None` for deleted nodes.
    pub remap: Vec<Option<NodeId>>,
}

/// Keeps the largest subtree containing the root whose edges are all free of
/// moving and appearing obstacles; every node hanging below an invalid edge is
/// deleted. Kept and removed nodes partition the input.
pub fn trim_invalid(tree: &Tree, world: &WorldState, counters: &TrialCounters) -> Trimmed {
    let mut remap = vec![None; tree.len()];
    let mut kept = Tree::empty(counters.clone(), tree.backend());
    let mut removed = Vec::new();
    for (i, n) in tree.nodes().iter().enumerate() {
        let keep = match n.parent {
            None => true,
            Some(p) => {
                remap[p].is_some()
                    && !world.segment_blocked_by_dynamic(&Segment::new(tree.position(p), n.position), counters)
            }
        };
        if keep {
            remap[i] = Some(kept.add(n.position, n.parent.and_then(|p| remap[p])));
        } else {
            removed.push(n.position);
        }
    }
    Trimmed {
        tree: kept,
        removed,
        remap,
    }
}

/// Result of cutting a tree at invalid nodes and edges.
#[derive(Debug, Clone)]
pub struct Split {
    /// Component containing the original root, if the root survived.
    pub main: Option<Tree>,
    /// Other connected components, each re-rooted at its topmost node.
    pub orphans: Vec<Tree>,
    /// Positions of nodes lying inside obstacles.
    pub removed: Vec<Point2>,
    /// Old id to new id in `main`.
    pub main_remap: Vec<Option<NodeId>>,
}

/// Deletes nodes inside obstacles and cuts edges crossing them. What stays
/// attached to the root forms `main`; every other piece becomes an orphan.
/// With `keep_root` the root is never deleted.
pub fn split_invalid(tree: &Tree, world: &WorldState, keep_root: bool, counters: &TrialCounters) -> Split {
    let n = tree.len();
    let point_bad = |p: Point2| world.segment_blocked_by_dynamic(&Segment::new(p, p), counters);
    // component index and position inside that component
    let mut slot: Vec<Option<(usize, NodeId)>> = vec![None; n];
    let mut pieces: Vec<Vec<TreeNode>> = Vec::new();
    let mut removed = Vec::new();
    for (i, node) in tree.nodes().iter().enumerate() {
        let parent_slot = node.parent.and_then(|p| slot[p]);
        let attached = match (node.parent, parent_slot) {
            (Some(p), Some(ps)) => {
                let edge = Segment::new(tree.position(p), node.position);
                (!world.segment_blocked_by_dynamic(&edge, counters)).then_some(ps)
            }
            _ => None,
        };
        let starts_piece = attached.is_none();
        // A blocked edge may mean the node itself is inside an obstacle.
        let is_root = node.parent.is_none();
        if starts_piece && !(is_root && keep_root) && point_bad(node.position) {
            removed.push(node.position);
            continue;
        }
        match attached {
            Some((comp, parent_local)) => {
                let local = pieces[comp].len();
                pieces[comp].push(TreeNode {
                    position: node.position,
                    parent: Some(parent_local),
                });
                slot[i] = Some((comp, local));
            }
            None => {
                slot[i] = Some((pieces.len(), 0));
                pieces.push(vec![TreeNode {
                    position: node.position,
                    parent: None,
                }]);
            }
        }
    }
    let root_alive = n > 0 && slot[0].is_some();
    let mut main_remap = vec![None; n];
    if root_alive {
        for (i, s) in slot.iter().enumerate() {
            if let Some((0, local)) = s {
                main_remap[i] = Some(*local);
            }
        }
    }
    let mut trees = pieces
        .into_iter()
        .map(|nodes| Tree::from_nodes(nodes, counters.clone(), tree.backend()));
    let main = if root_alive { trees.next() } else { None };
    Split {
        main,
        orphans: trees.collect(),
        removed,
        main_remap,
    }
}

/// Goal-rooted tree plus the node the robot is currently heading to.
#[derive(Debug, Clone)]
pub(crate) struct GoalTree {
    pub tree: Tree,
    pub attach: Option<NodeId>,
}

impl GoalTree {
    /// Robot, then the attach node and its ancestors up to the goal.
    pub fn route(&self, robot: Point2) -> Option<Path> {
        let attach = self.attach?;
        let mut pts = vec![robot];
        for id in self.tree.path_to_root(attach) {
            let q = self.tree.position(id);
            if *pts.last().unwrap() != q {
                pts.push(q);
            }
        }
        if pts.len() == 1 {
            pts.push(robot);
        }
        Some(Path::from_points_unchecked(pts))
    }

    /// Drops the attachment if the robot's own leg is cut.
    pub fn check_attachment(&mut self, world: &WorldState, counters: &TrialCounters) {
        if let Some(a) = self.attach {
            let leg = Segment::new(world.robot, self.tree.position(a));
            if world.segment_blocked_by_dynamic(&leg, counters) {
                self.attach = None;
            }
        }
    }

    /// Moves the attachment up the tree to the next vertex still ahead.
    pub fn follow(&mut self, remaining: &Path) {
        let Some(mut a) = self.attach else { return };
        let next = remaining.points()[1];
        while self.tree.position(a) != next {
            match self.tree.parent(a) {
                Some(p) => a = p,
                None => break,
            }
        }
        self.attach = Some(a);
    }

    /// Marks the robot reached if `id` sits exactly on it.
    pub fn try_attach(&mut self, id: NodeId, robot: Point2) -> bool {
        if self.tree.position(id) == robot {
            self.attach = Some(id);
            true
        } else {
            false
        }
    }
}

/// Tally of which sampling branch each regrowth draw took.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleStats {
    /// Draws made while a biased branch (cache or forest) was available.
    pub eligible: u64,
    /// Of those, draws that took the biased branch.
    pub biased: u64,
    pub robot: u64,
    pub uniform: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SampleKind {
    /// Near a cached waypoint (DRRT).
    Waypoint,
    /// Root of forest subtree `i` (MP-RRT).
    Forest(usize),
    Robot,
    Uniform,
}
