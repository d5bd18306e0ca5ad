//! Rapidly-exploring random trees.
//!
//! The EXTEND step used here adds the sample itself when the straight edge from
//! the nearest node is free. Otherwise it adds the midpoint between the nearest
//! node and the first contact point along that edge, so most iterations still
//! grow the tree. There is no step-size cap.
//!
//! Two trees, one rooted at the robot and one at the goal, are grown with the
//! same sample each iteration; when both reach the sample exactly they are
//! joined there.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::counters::TrialCounters;
use crate::error::RrtError;
use crate::geom2d::{Point2, Rect, Segment};
use crate::multistage::Path;
use crate::world::WorldState;

/// Probability of sampling a tree root instead of a uniform state.
pub const DEFAULT_GOAL_BIAS: f64 = 0.05;

/// Midpoint insertions shorter than this are rejected.
pub const MIN_EDGE: f64 = 1e-6;

/// Seeded random stream owned by one planner in one trial.
#[derive(Debug, Clone)]
pub struct PlannerRng {
    inner: ChaCha8Rng,
}

impl PlannerRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Uniform in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Uniform in `[lo, hi)`; returns `lo` for an empty interval.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    pub fn coin(&mut self) -> bool {
        self.inner.random::<bool>()
    }

    /// Uniform index in `0..n`. `n` must be non-zero.
    pub fn index(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    pub fn point_in(&mut self, r: &Rect) -> Point2 {
        Point2::new(self.uniform(r.min.x, r.max.x), self.uniform(r.min.y, r.max.y))
    }

    /// Uniform over the disc of radius `radius` around `center`.
    pub fn point_in_disc(&mut self, center: Point2, radius: f64) -> Point2 {
        let r = radius * self.unit().sqrt();
        let a = self.uniform(0.0, std::f64::consts::TAU);
        Point2::new(center.x + r * a.cos(), center.y + r * a.sin())
    }
}

/// Planning allowance for one tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Budget {
    /// Fixed number of planner iterations. Deterministic.
    Iterations(u32),
    /// Wall-clock allowance, as in a live deployment.
    WallClock(Duration),
}

#[derive(Debug)]
pub struct BudgetTracker {
    budget: Budget,
    used: u32,
    started: Instant,
}

impl BudgetTracker {
    pub fn new(budget: Budget) -> Self {
        Self {
            budget,
            used: 0,
            started: Instant::now(),
        }
    }

    /// Claims one iteration; false once the allowance is spent.
    pub fn try_consume(&mut self) -> bool {
        let ok = match self.budget {
            Budget::Iterations(n) => self.used < n,
            Budget::WallClock(d) => self.started.elapsed() < d,
        };
        if ok {
            self.used += 1;
        }
        ok
    }

    pub fn used(&self) -> u32 {
        self.used
    }
}

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeNode {
    pub position: Point2,
    pub parent: Option<NodeId>,
}

/// Nearest-neighbor strategy. Both return identical answers, including ties.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum NnBackend {
    #[default]
    Linear,
    Grid {
        cell: f64,
    },
}

#[derive(Debug, Clone)]
struct GridIndex {
    cell: f64,
    buckets: HashMap<(i64, i64), Vec<NodeId>>,
    lo: (i64, i64),
    hi: (i64, i64),
}

impl serde::Serialize for NnBackend {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            NnBackend::Linear => s.serialize_str("linear"),
            NnBackend::Grid { cell } => s.serialize_str(&format!("grid:{cell}")),
        }
    }
}

impl<'de> serde::Deserialize<'de> for NnBackend {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = <String as serde::Deserialize>::deserialize(d)?;
        match s.split_once(':') {
            None if s == "linear" => Ok(NnBackend::Linear),
            Some(("grid", cell)) => cell
                .parse()
                .map(|cell| NnBackend::Grid { cell })
                .map_err(serde::de::Error::custom),
            _ => Err(serde::de::Error::custom(format!("unknown NN backend `{s}`"))),
        }
    }
}

impl GridIndex {
    fn new(cell: f64) -> Self {
        assert!(cell > 0.0, "grid cell must be positive");
        Self {
            cell,
            buckets: HashMap::new(),
            lo: (i64::MAX, i64::MAX),
            hi: (i64::MIN, i64::MIN),
        }
    }

    fn key(&self, p: Point2) -> (i64, i64) {
        ((p.x / self.cell).floor() as i64, (p.y / self.cell).floor() as i64)
    }

    fn insert(&mut self, id: NodeId, p: Point2) {
        let k = self.key(p);
        self.lo = (self.lo.0.min(k.0), self.lo.1.min(k.1));
        self.hi = (self.hi.0.max(k.0), self.hi.1.max(k.1));
        self.buckets.entry(k).or_default().push(id);
    }

    fn nearest(&self, nodes: &[TreeNode], q: Point2) -> Option<NodeId> {
        if nodes.is_empty() {
            return None;
        }
        let (cx, cy) = self.key(q);
        let max_ring = [cx - self.lo.0, self.hi.0 - cx, cy - self.lo.1, self.hi.1 - cy]
            .into_iter()
            .map(i64::abs)
            .max()
            .unwrap_or(0);
        let mut best: Option<(f64, NodeId)> = None;
        let visit = |best: &mut Option<(f64, NodeId)>, key: (i64, i64)| {
            if let Some(ids) = self.buckets.get(&key) {
                for &id in ids {
                    let d = nodes[id].position.distance_sq(&q);
                    let better = match *best {
                        None => true,
                        Some((bd, bid)) => d < bd || (d == bd && id < bid),
                    };
                    if better {
                        *best = Some((d, id));
                    }
                }
            }
        };
        for r in 0..=max_ring {
            if r == 0 {
                visit(&mut best, (cx, cy));
            } else {
                for dx in -r..=r {
                    visit(&mut best, (cx + dx, cy - r));
                    visit(&mut best, (cx + dx, cy + r));
                }
                for dy in (-r + 1)..r {
                    visit(&mut best, (cx - r, cy + dy));
                    visit(&mut best, (cx + r, cy + dy));
                }
            }
            // Cells beyond ring r+1 are at least r*cell away; one ring of slack
            // keeps exact ties safe from rounding.
            if let Some((bd, _)) = best {
                let reach = (r - 1).max(0) as f64 * self.cell;
                if r >= 1 && bd < reach * reach {
                    break;
                }
            }
        }
        best.map(|(_, id)| id)
    }
}

#[derive(Debug, Clone)]
enum NnIndex {
    Linear,
    Grid(GridIndex),
}

/// Node store with parent links. Node 0 is the root, and every node's parent
/// has a smaller id, so the structure is acyclic by construction.
#[derive(Debug, Clone)]
pub struct Tree {
    nodes: Vec<TreeNode>,
    backend: NnBackend,
    index: NnIndex,
    counters: TrialCounters,
}

/// Result of one EXTEND step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtendOutcome {
    /// The target itself is in the tree (newly added or already present).
    Added(NodeId),
    /// The edge was blocked; the midpoint towards the first contact was added.
    AddedMidpoint(NodeId),
    Rejected,
}

impl ExtendOutcome {
    pub fn node(&self) -> Option<NodeId> {
        match *self {
            ExtendOutcome::Added(id) | ExtendOutcome::AddedMidpoint(id) => Some(id),
            ExtendOutcome::Rejected => None,
        }
    }
}

impl Tree {
    pub fn new(root: Point2, counters: TrialCounters) -> Self {
        Self::with_backend(root, counters, NnBackend::Linear)
    }

    pub fn with_backend(root: Point2, counters: TrialCounters, backend: NnBackend) -> Self {
        let mut t = Self::empty(counters, backend);
        t.add(root, None);
        t
    }

    pub fn empty(counters: TrialCounters, backend: NnBackend) -> Self {
        let index = match backend {
            NnBackend::Linear => NnIndex::Linear,
            NnBackend::Grid { cell } => NnIndex::Grid(GridIndex::new(cell)),
        };
        Self {
            nodes: Vec::new(),
            backend,
            index,
            counters,
        }
    }

    /// Builds a tree from nodes already in parent-before-child order.
    pub fn from_nodes(nodes: Vec<TreeNode>, counters: TrialCounters, backend: NnBackend) -> Self {
        let mut t = Self::empty(counters, backend);
        for n in nodes {
            debug_assert!(n.parent.is_none_or(|p| p < t.nodes.len()));
            t.add(n.position, n.parent);
        }
        t
    }

    /// Builds a tree rooted at `root` from arbitrary parent links, renumbering
    /// nodes breadth-first. Nodes not reachable from `root` are dropped. Returns
    /// the tree and the old-to-new id map.
    pub fn from_parent_links(
        positions: &[Point2],
        parents: &[Option<usize>],
        root: usize,
        counters: TrialCounters,
        backend: NnBackend,
    ) -> (Tree, Vec<Option<NodeId>>) {
        let mut children = vec![Vec::new(); positions.len()];
        for (i, p) in parents.iter().enumerate() {
            if let Some(p) = *p {
                if i != root {
                    children[p].push(i);
                }
            }
        }
        let mut remap = vec![None; positions.len()];
        let mut t = Tree::empty(counters, backend);
        let mut queue = std::collections::VecDeque::from([root]);
        remap[root] = Some(t.add(positions[root], None));
        while let Some(old) = queue.pop_front() {
            let new_parent = remap[old];
            for &c in &children[old] {
                if remap[c].is_none() {
                    remap[c] = Some(t.add(positions[c], new_parent));
                    queue.push_back(c);
                }
            }
        }
        (t, remap)
    }

    pub const ROOT: NodeId = 0;

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &TreeNode {
        &self.nodes[id]
    }

    pub fn position(&self, id: NodeId) -> Point2 {
        self.nodes[id].position
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id].parent
    }

    pub fn root_position(&self) -> Option<Point2> {
        self.nodes.first().map(|n| n.position)
    }

    pub fn backend(&self) -> NnBackend {
        self.backend
    }

    pub fn counters(&self) -> &TrialCounters {
        &self.counters
    }

    pub fn add(&mut self, position: Point2, parent: Option<NodeId>) -> NodeId {
        let id = self.nodes.len();
        self.nodes.push(TreeNode { position, parent });
        if let NnIndex::Grid(g) = &mut self.index {
            g.insert(id, position);
        }
        id
    }

    /// Node closest to `q`, ties going to the lowest id. Counts one lookup.
    pub fn nearest(&self, q: Point2) -> Result<NodeId, RrtError> {
        self.counters.record_nn_lookup();
        let found = match &self.index {
            NnIndex::Linear => self.nearest_by_scan(q),
            NnIndex::Grid(g) => g.nearest(&self.nodes, q),
        };
        found.ok_or(RrtError::EmptyTree)
    }

    /// Uncounted exhaustive scan; the reference every index must agree with.
    pub fn nearest_by_scan(&self, q: Point2) -> Option<NodeId> {
        let mut best: Option<(f64, NodeId)> = None;
        for (id, n) in self.nodes.iter().enumerate() {
            let d = n.position.distance_sq(&q);
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, id));
            }
        }
        best.map(|(_, id)| id)
    }

    /// Ids from `id` up to and including the root.
    pub fn path_to_root(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = vec![id];
        let mut cur = id;
        while let Some(p) = self.nodes[cur].parent {
            out.push(p);
            cur = p;
        }
        out
    }

    /// Edge from each non-root node to its parent, as `(child, segment)`.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, Segment)> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter_map(|(i, n)| n.parent.map(|p| (i, Segment::new(self.nodes[p].position, n.position))))
    }

    /// Independent structural check: exactly one root, every parent chain ends there.
    pub fn is_acyclic(&self) -> bool {
        if self.nodes.is_empty() {
            return true;
        }
        if self.nodes[0].parent.is_some() || self.nodes.iter().skip(1).any(|n| n.parent.is_none()) {
            return false;
        }
        (0..self.nodes.len()).all(|start| {
            let mut cur = start;
            for _ in 0..=self.nodes.len() {
                match self.nodes[cur].parent {
                    None => return cur == 0,
                    Some(p) if p < self.nodes.len() => cur = p,
                    Some(_) => return false,
                }
            }
            false
        })
    }

    /// One EXTEND step towards `target` against the current world.
    pub fn extend(&mut self, target: Point2, world: &WorldState) -> ExtendOutcome {
        let Ok(near) = self.nearest(target) else {
            return ExtendOutcome::Rejected;
        };
        let from = self.nodes[near].position;
        if from == target {
            return ExtendOutcome::Added(near);
        }
        let edge = Segment::new(from, target);
        match world.first_contact(&edge, &self.counters) {
            None => ExtendOutcome::Added(self.add(target, Some(near))),
            Some(t) => {
                // The first contact is the minimum over all rectangles, so the
                // half-way edge is free whenever it has positive length.
                let mid = from.midpoint(&from.lerp(&target, t));
                if from.distance(&mid) > MIN_EDGE {
                    ExtendOutcome::AddedMidpoint(self.add(mid, Some(near)))
                } else {
                    ExtendOutcome::Rejected
                }
            }
        }
    }
}

/// Two trees grown towards each other, kept across ticks until they connect.
#[derive(Debug, Clone)]
pub struct BidirectionalRrt {
    pub init: Tree,
    pub goal: Tree,
    pub goal_bias: f64,
    connection: Option<(NodeId, NodeId)>,
}

impl BidirectionalRrt {
    pub fn new(start: Point2, goal: Point2, counters: TrialCounters, backend: NnBackend, goal_bias: f64) -> Self {
        Self {
            init: Tree::with_backend(start, counters.clone(), backend),
            goal: Tree::with_backend(goal, counters, backend),
            goal_bias,
            connection: None,
        }
    }

    pub fn is_connected(&self) -> bool {
        self.connection.is_some()
    }

    /// One sample, extended into both trees. Returns the join when both trees
    /// reach the sample exactly.
    pub fn step(&mut self, rng: &mut PlannerRng, world: &WorldState) -> Option<(NodeId, NodeId)> {
        if self.connection.is_some() {
            return self.connection;
        }
        let q = if rng.unit() < self.goal_bias {
            if rng.coin() {
                self.goal.position(Tree::ROOT)
            } else {
                self.init.position(Tree::ROOT)
            }
        } else {
            rng.point_in(&world.bounds)
        };
        let a = self.init.extend(q, world);
        let b = self.goal.extend(q, world);
        if let (ExtendOutcome::Added(a), ExtendOutcome::Added(b)) = (a, b) {
            self.connection = Some((a, b));
        }
        self.connection
    }

    /// Grows until connected or the budget runs out.
    pub fn grow(&mut self, rng: &mut PlannerRng, world: &WorldState, tracker: &mut BudgetTracker) -> Option<Path> {
        while self.connection.is_none() && tracker.try_consume() {
            self.step(rng, world);
        }
        self.path()
    }

    /// Root-to-root path through the join, robot first.
    pub fn path(&self) -> Option<Path> {
        let (a, b) = self.connection?;
        let mut pts: Vec<Point2> = self
            .init
            .path_to_root(a)
            .iter()
            .rev()
            .map(|&i| self.init.position(i))
            .collect();
        pts.extend(self.goal.path_to_root(b).iter().skip(1).map(|&i| self.goal.position(i)));
        if pts.len() == 1 {
            pts.push(pts[0]);
        }
        Some(Path::from_points_unchecked(pts))
    }

    /// Joins both trees into one tree rooted at the goal. Returns it with the id
    /// of the node at the robot's start.
    pub fn into_goal_rooted(self) -> Option<(Tree, NodeId)> {
        let (a, b) = self.connection?;
        let goal_len = self.goal.len();
        let mut positions: Vec<Point2> = self.goal.nodes().iter().map(|n| n.position).collect();
        let mut parents: Vec<Option<usize>> = self.goal.nodes().iter().map(|n| n.parent).collect();
        positions.extend(self.init.nodes().iter().map(|n| n.position));
        parents.extend(self.init.nodes().iter().map(|n| n.parent.map(|p| p + goal_len)));
        // Re-root the init tree at the join node by reversing its chain.
        let chain = self.init.path_to_root(a);
        for w in chain.windows(2) {
            parents[w[1] + goal_len] = Some(w[0] + goal_len);
        }
        // The join node coincides with `b`; hang its children from `b`.
        let join = a + goal_len;
        for p in parents.iter_mut().skip(goal_len) {
            if *p == Some(join) {
                *p = Some(b);
            }
        }
        parents[join] = None;
        let robot_old = if chain.len() == 1 { b } else { Tree::ROOT + goal_len };
        let counters = self.goal.counters().clone();
        let backend = self.goal.backend();
        let (tree, remap) = Tree::from_parent_links(&positions, &parents, Tree::ROOT, counters, backend);
        let robot = remap[robot_old].expect("robot node reachable from the goal root");
        Some((tree, robot))
    }
}

/// Bidirectional growth from `t_init` and `t_goal` within `budget`.
pub fn grow_bidirectional(
    rrt: &mut BidirectionalRrt,
    rng: &mut PlannerRng,
    world: &WorldState,
    budget: Budget,
) -> Option<Path> {
    rrt.grow(rng, world, &mut BudgetTracker::new(budget))
}
