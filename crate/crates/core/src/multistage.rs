//! Multi-stage planner: an RRT finds the first path, then informed local
//! search keeps it feasible and a greedy pass keeps it short.
//!
//! Each tick, while budget remains:
//!
//! * without a path, grow the bidirectional RRT;
//! * with a path, find the first colliding segment (in order from the robot)
//!   and try the `arc` and `mutation` operators on it.
//!
//! After the loop the path is shortened by dropping intermediate points whose
//! removal keeps the path collision-free. The objective being minimized is the
//! number of points, subject to every segment being in free space.

use serde::{Deserialize, Serialize};

use crate::counters::TrialCounters;
use crate::error::PathError;
use crate::geom2d::{Point2, Segment};
use crate::planner::{Algorithm, Planner, PlannerTickOutcome};
use crate::rrt::{BidirectionalRrt, Budget, BudgetTracker, NnBackend, PlannerRng, Tree, DEFAULT_GOAL_BIAS};
use crate::world::WorldState;

/// Ordered points from the robot (first) to the goal (last).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    points: Vec<Point2>,
}

impl Path {
    pub fn new(points: Vec<Point2>) -> Result<Path, PathError> {
        if points.len() < 2 {
            return Err(PathError::TooShort(points.len()));
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(PathError::NonFinite(i));
        }
        Ok(Path { points })
    }

    pub(crate) fn from_points_unchecked(points: Vec<Point2>) -> Path {
        debug_assert!(points.len() >= 2);
        Path { points }
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Point2> {
        self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first(&self) -> Point2 {
        self.points[0]
    }

    pub fn last(&self) -> Point2 {
        self.points[self.points.len() - 1]
    }

    /// Segment from point `i` to point `i + 1`.
    pub fn segment(&self, i: usize) -> Segment {
        Segment::new(self.points[i], self.points[i + 1])
    }

    pub fn segment_count(&self) -> usize {
        self.points.len() - 1
    }

    /// Euclidean length of the polyline.
    pub fn length(&self) -> f64 {
        self.points.windows(2).map(|w| w[0].distance(&w[1])).sum()
    }
}

/// Number of points; the quantity the planner minimizes.
pub fn eval(path: &Path) -> usize {
    path.len()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feasibility {
    Free,
    /// Index of the first colliding segment, counted from the robot.
    Blocked(usize),
}

impl Feasibility {
    pub fn is_free(&self) -> bool {
        matches!(self, Feasibility::Free)
    }
}

pub fn feas(path: &Path, world: &WorldState, counters: &TrialCounters) -> Feasibility {
    feas_from(path, world, 0, counters)
}

/// Like [`feas`], skipping segments before `start` that are known to be free.
pub fn feas_from(path: &Path, world: &WorldState, start: usize, counters: &TrialCounters) -> Feasibility {
    (start..path.segment_count())
        .find(|&i| world.segment_blocked(&path.segment(i), counters))
        .map_or(Feasibility::Free, Feasibility::Blocked)
}

/// What to do when the full square arc collides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArcFallback {
    /// Keep only the first new point if it alone bypasses the collision.
    #[default]
    DropSecond,
    /// Leave the path unchanged.
    RejectAll,
}

/// When the shortening pass runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShortenPolicy {
    /// Once per tick after the search loop, whatever the path state.
    #[default]
    EveryTick,
    /// Only once the path has been confirmed collision-free.
    WhenFeasible,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepairConfig {
    /// Half-width of the uniform offset interval used by both operators.
    pub vicinity: f64,
    /// Cap on repair iterations per tick, on top of the planning budget.
    pub max_repair_iters: u32,
    pub arc_fallback: ArcFallback,
    pub shorten: ShortenPolicy,
}

impl RepairConfig {
    /// Defaults scaled to the robot: vicinity is four half-extents.
    pub fn for_robot(half_extent: f64) -> Self {
        Self {
            vicinity: 4.0 * half_extent,
            max_repair_iters: u32::MAX,
            arc_fallback: ArcFallback::default(),
            shorten: ShortenPolicy::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArcAxis {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArcOutcome {
    /// Both detour points inserted.
    Both,
    /// Only the first detour point inserted.
    FirstOnly,
    Unchanged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MutOutcome {
    Accepted,
    Rejected,
}

/// Square-arc operator with a random offset and axis.
pub fn arc(
    path: &mut Path,
    first_col: usize,
    rng: &mut PlannerRng,
    world: &WorldState,
    cfg: &RepairConfig,
    counters: &TrialCounters,
) -> ArcOutcome {
    let dev = rng.uniform(-cfg.vicinity, cfg.vicinity);
    let axis = if rng.coin() { ArcAxis::X } else { ArcAxis::Y };
    arc_with(path, first_col, dev, axis, world, cfg.arc_fallback, counters)
}

/// Square-arc operator with the offset and axis given.
///
/// Both endpoints of segment `first_col` are shifted by `dev` along `axis`.
/// The two shifted points are inserted between the endpoints when the detour
/// `point1 -> new1 -> new2 -> point2` is free; otherwise `fallback` decides.
pub fn arc_with(
    path: &mut Path,
    first_col: usize,
    dev: f64,
    axis: ArcAxis,
    world: &WorldState,
    fallback: ArcFallback,
    counters: &TrialCounters,
) -> ArcOutcome {
    if first_col + 1 >= path.len() {
        return ArcOutcome::Unchanged;
    }
    let point1 = path.points[first_col];
    let point2 = path.points[first_col + 1];
    let (new1, new2) = match axis {
        ArcAxis::X => (point1.offset(dev, 0.0), point2.offset(dev, 0.0)),
        ArcAxis::Y => (point1.offset(0.0, dev), point2.offset(0.0, dev)),
    };
    if !world.bounds.contains(new1) {
        return ArcOutcome::Unchanged;
    }
    let blocked = |a: Point2, b: Point2| world.segment_blocked(&Segment::new(a, b), counters);
    if blocked(point1, new1) {
        return ArcOutcome::Unchanged;
    }
    if world.bounds.contains(new2) && !blocked(new1, new2) && !blocked(new2, point2) {
        path.points.splice(first_col + 1..first_col + 1, [new1, new2]);
        return ArcOutcome::Both;
    }
    match fallback {
        ArcFallback::DropSecond if !blocked(new1, point2) => {
            path.points.insert(first_col + 1, new1);
            ArcOutcome::FirstOnly
        }
        _ => ArcOutcome::Unchanged,
    }
}

/// Index the mutation operator moves for a collision at `first_col`. The
/// robot's own position is never moved, so a collision on the first segment
/// moves the next point instead.
pub fn mutation_target(first_col: usize) -> usize {
    first_col.max(1)
}

/// Mutation operator with random offsets in `(-vicinity, vicinity)`.
pub fn mutate(
    path: &mut Path,
    first_col: usize,
    rng: &mut PlannerRng,
    world: &WorldState,
    cfg: &RepairConfig,
    counters: &TrialCounters,
) -> MutOutcome {
    let dx = rng.uniform(-cfg.vicinity, cfg.vicinity);
    let dy = rng.uniform(-cfg.vicinity, cfg.vicinity);
    mutate_with(path, first_col, dx, dy, world, counters)
}

/// Moves the point at [`mutation_target`] by `(dx, dy)` and keeps the move
/// only if both segments touching it are free.
pub fn mutate_with(
    path: &mut Path,
    first_col: usize,
    dx: f64,
    dy: f64,
    world: &WorldState,
    counters: &TrialCounters,
) -> MutOutcome {
    let target = mutation_target(first_col);
    if target + 1 >= path.len() {
        return MutOutcome::Rejected;
    }
    let cand = path.points[target].offset(dx, dy);
    if !world.bounds.contains(cand) {
        return MutOutcome::Rejected;
    }
    let before = Segment::new(path.points[target - 1], cand);
    let after = Segment::new(cand, path.points[target + 1]);
    if world.segment_blocked(&before, counters) || world.segment_blocked(&after, counters) {
        return MutOutcome::Rejected;
    }
    path.points[target] = cand;
    MutOutcome::Accepted
}

/// One forward sweep: drop `path[i+1]` whenever `path[i] -> path[i+2]` is free.
fn shorten_sweep(points: &mut Vec<Point2>, world: &WorldState, counters: &TrialCounters) -> bool {
    let mut removed = false;
    let mut i = 0;
    while i + 2 < points.len() {
        if world.segment_blocked(&Segment::new(points[i], points[i + 2]), counters) {
            i += 1;
        } else {
            points.remove(i + 1);
            removed = true;
        }
    }
    removed
}

/// Greedy shortening. Sweeps repeat until one removes nothing, so the result
/// is a fixed point of the sweep. Endpoints never change.
pub fn post_process(path: &Path, world: &WorldState, counters: &TrialCounters) -> Path {
    let mut points = path.points.clone();
    while shorten_sweep(&mut points, world, counters) {}
    Path { points }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiStageConfig {
    pub repair: RepairConfig,
    pub goal_bias: f64,
    pub nn_backend: NnBackend,
}

impl MultiStageConfig {
    pub fn for_robot(half_extent: f64) -> Self {
        Self {
            repair: RepairConfig::for_robot(half_extent),
            goal_bias: DEFAULT_GOAL_BIAS,
            nn_backend: NnBackend::Linear,
        }
    }
}

/// The multi-stage planner's per-trial state.
#[derive(Debug, Clone)]
pub struct MultiStage {
    cfg: MultiStageConfig,
    counters: TrialCounters,
    bootstrap: Option<BidirectionalRrt>,
    path: Option<Path>,
}

impl MultiStage {
    pub fn new(world: &WorldState, cfg: MultiStageConfig, counters: TrialCounters) -> Self {
        let bootstrap = BidirectionalRrt::new(world.robot, world.goal, counters.clone(), cfg.nn_backend, cfg.goal_bias);
        Self {
            cfg,
            counters,
            bootstrap: Some(bootstrap),
            path: None,
        }
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_ref()
    }

    pub fn config(&self) -> &MultiStageConfig {
        &self.cfg
    }
}

impl Planner for MultiStage {
    fn algorithm(&self) -> Algorithm {
        Algorithm::MultiStage
    }

    fn tick(&mut self, world: &WorldState, rng: &mut PlannerRng, budget: Budget) -> PlannerTickOutcome {
        let mut tracker = BudgetTracker::new(budget);
        let repair = self.cfg.repair;
        let mut known_free = false;
        // Segments before this index are known to be free in this snapshot.
        let mut free_prefix = 0;
        let mut repairs = 0u32;
        while tracker.try_consume() {
            match self.path.as_mut() {
                None => {
                    let rrt = self
                        .bootstrap
                        .as_mut()
                        .expect("bootstrap trees live until the first path");
                    rrt.step(rng, world);
                    if let Some(p) = rrt.path() {
                        self.path = Some(p);
                        self.bootstrap = None;
                    }
                }
                Some(path) => {
                    if repairs >= repair.max_repair_iters {
                        break;
                    }
                    match feas_from(path, world, free_prefix, &self.counters) {
                        Feasibility::Free => {
                            known_free = true;
                            break;
                        }
                        Feasibility::Blocked(col) => {
                            repairs += 1;
                            arc(path, col, rng, world, &repair, &self.counters);
                            mutate(path, col, rng, world, &repair, &self.counters);
                            // Both operators validate every segment they create,
                            // and neither touches segments before `col`.
                            free_prefix = col;
                        }
                    }
                }
            }
        }
        if let Some(path) = self.path.as_mut() {
            let shorten = match repair.shorten {
                ShortenPolicy::EveryTick => true,
                ShortenPolicy::WhenFeasible => known_free,
            };
            if shorten {
                *path = post_process(path, world, &self.counters);
            }
            if !known_free {
                known_free = feas(path, world, &self.counters).is_free();
            }
        }
        PlannerTickOutcome {
            path: self.path.clone(),
            moved: self.path.is_some() && known_free,
            diagnostics: self.counters.snapshot(),
        }
    }

    fn robot_advanced(&mut self, remaining: &Path) {
        if self.path.is_some() {
            self.path = Some(remaining.clone());
        }
    }

    fn trees(&self) -> Vec<&Tree> {
        self.bootstrap.iter().flat_map(|b| [&b.init, &b.goal]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom2d::Rect;
    use crate::scenario::{ObstacleKind, ObstacleSpec, Scenario};
    use crate::world::Obstacle;

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    fn path(pts: &[(f64, f64)]) -> Path {
        Path::new(pts.iter().map(|&q| q.into()).collect()).unwrap()
    }

    fn scenario() -> Scenario {
        Scenario {
            name: "open".into(),
            bounds: Rect::new(-20.0, -20.0, 40.0, 40.0),
            walls: vec![],
            obstacles: vec![],
            start: p(0.0, 0.0),
            goal: p(10.0, 0.0),
            robot_speed: 1.0,
            robot_half_extent: 0.5,
            cutoff_s: 10.0,
            planning_budget_s: 0.05,
            tick_s: 0.05,
        }
    }

    fn world_with(walls: &[Rect]) -> WorldState {
        let mut w = WorldState::new(&scenario(), 0);
        w.inflated_walls = walls.to_vec();
        w
    }

    #[test]
    fn path_needs_two_finite_points() {
        assert_eq!(Path::new(vec![p(0.0, 0.0)]), Err(PathError::TooShort(1)));
        assert_eq!(
            Path::new(vec![p(0.0, 0.0), p(f64::NAN, 0.0)]),
            Err(PathError::NonFinite(1))
        );
    }

    #[test]
    fn feas_free_in_empty_map() {
        let w = world_with(&[]);
        assert_eq!(
            feas(&path(&[(0.0, 0.0), (10.0, 0.0)]), &w, &TrialCounters::new()),
            Feasibility::Free
        );
    }

    #[test]
    fn feas_reports_collision_closest_to_robot() {
        // Obstacles on segments 3 and 7 of a zig-zag.
        let pts: Vec<(f64, f64)> = (0..9)
            .map(|i| (i as f64 * 2.0, if i % 2 == 0 { 0.0 } else { 1.0 }))
            .collect();
        let pth = path(&pts);
        let on = |i: usize| {
            let m = pth.segment(i).a.midpoint(&pth.segment(i).b);
            Rect::new(m.x - 0.05, m.y - 0.05, m.x + 0.05, m.y + 0.05)
        };
        let w = world_with(&[on(7), on(3)]);
        assert_eq!(feas(&pth, &w, &TrialCounters::new()), Feasibility::Blocked(3));
    }

    #[test]
    fn feas_degenerate_path() {
        let w = world_with(&[Rect::new(5.0, 5.0, 6.0, 6.0)]);
        assert!(feas(&path(&[(1.0, 1.0), (1.0, 1.0)]), &w, &TrialCounters::new()).is_free());
    }

    #[test]
    fn eval_counts_points() {
        assert_eq!(eval(&path(&[(0.0, 0.0), (1.0, 1.0)])), 2);
    }

    #[test]
    fn arc_candidates_follow_axis_and_offset() {
        let w = world_with(&[Rect::new(4.0, -1.0, 6.0, 1.0)]);
        let mut pth = path(&[(0.0, 0.0), (10.0, 0.0)]);
        let out = arc_with(
            &mut pth,
            0,
            3.0,
            ArcAxis::Y,
            &w,
            ArcFallback::DropSecond,
            &TrialCounters::new(),
        );
        assert_eq!(out, ArcOutcome::Both);
        assert_eq!(pth.points(), &[p(0.0, 0.0), p(0.0, 3.0), p(10.0, 3.0), p(10.0, 0.0)]);
        assert_eq!(eval(&pth), 4);
    }

    #[test]
    fn arc_drops_second_point_when_detour_blocked() {
        // The shifted segment (0,3)->(10,3) is blocked, but (0,3)->(10,0) clears the low block.
        let walls = [Rect::new(4.0, -1.0, 6.0, 1.0), Rect::new(4.0, 2.5, 6.0, 3.5)];
        let w = world_with(&walls);
        let mut pth = path(&[(0.0, 0.0), (10.0, 0.0)]);
        let out = arc_with(
            &mut pth,
            0,
            3.0,
            ArcAxis::Y,
            &w,
            ArcFallback::DropSecond,
            &TrialCounters::new(),
        );
        assert_eq!(out, ArcOutcome::FirstOnly);
        assert_eq!(pth.points(), &[p(0.0, 0.0), p(0.0, 3.0), p(10.0, 0.0)]);

        let mut strict = path(&[(0.0, 0.0), (10.0, 0.0)]);
        let out = arc_with(
            &mut strict,
            0,
            3.0,
            ArcAxis::Y,
            &w,
            ArcFallback::RejectAll,
            &TrialCounters::new(),
        );
        assert_eq!(out, ArcOutcome::Unchanged);
        assert_eq!(strict.len(), 2);
    }

    #[test]
    fn arc_out_of_bounds_is_noop() {
        let w = world_with(&[Rect::new(4.0, -1.0, 6.0, 1.0)]);
        let mut pth = path(&[(0.0, 0.0), (10.0, 0.0)]);
        let out = arc_with(
            &mut pth,
            0,
            -25.0,
            ArcAxis::Y,
            &w,
            ArcFallback::DropSecond,
            &TrialCounters::new(),
        );
        assert_eq!(out, ArcOutcome::Unchanged);
    }

    #[test]
    fn mutation_moves_interior_point() {
        let w = world_with(&[Rect::new(4.0, 4.0, 6.0, 6.0)]);
        let mut pth = path(&[(0.0, 0.0), (5.0, 5.0), (10.0, 0.0)]);
        let out = mutate_with(&mut pth, 1, 1.0, -2.0, &w, &TrialCounters::new());
        assert_eq!(out, MutOutcome::Accepted);
        assert_eq!(pth.points()[1], p(6.0, 3.0));
        assert_eq!(eval(&pth), 3);
    }

    #[test]
    fn null_mutation_accepted_only_if_already_clear() {
        let w = world_with(&[Rect::new(2.0, 2.0, 3.0, 3.0)]);
        let mut blocked = path(&[(0.0, 0.0), (5.0, 5.0), (10.0, 0.0)]);
        assert_eq!(
            mutate_with(&mut blocked, 1, 0.0, 0.0, &w, &TrialCounters::new()),
            MutOutcome::Rejected
        );
        let mut clear = path(&[(0.0, 0.0), (5.0, -5.0), (10.0, 0.0)]);
        assert_eq!(
            mutate_with(&mut clear, 1, 0.0, 0.0, &w, &TrialCounters::new()),
            MutOutcome::Accepted
        );
    }

    #[test]
    fn mutation_never_moves_robot() {
        let w = world_with(&[]);
        let mut pth = path(&[(0.0, 0.0), (5.0, 5.0), (10.0, 0.0)]);
        mutate_with(&mut pth, 0, 1.0, 1.0, &w, &TrialCounters::new());
        assert_eq!(pth.first(), p(0.0, 0.0));
        assert_eq!(pth.points()[1], p(6.0, 6.0));
        // Two-point path: the only movable index would be the goal.
        let mut two = path(&[(0.0, 0.0), (10.0, 0.0)]);
        assert_eq!(
            mutate_with(&mut two, 0, 1.0, 1.0, &w, &TrialCounters::new()),
            MutOutcome::Rejected
        );
    }

    #[test]
    fn post_process_collapses_collinear_path() {
        let w = world_with(&[]);
        let pth = path(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (3.0, 0.0), (4.0, 0.0)]);
        let out = post_process(&pth, &w, &TrialCounters::new());
        assert_eq!(out.points(), &[p(0.0, 0.0), p(4.0, 0.0)]);
    }

    #[test]
    fn post_process_keeps_corner_around_obstacle() {
        let w = world_with(&[Rect::new(1.0, 1.0, 5.0, 5.0)]);
        let pth = path(&[(0.0, 0.0), (6.0, 0.0), (6.0, 6.0)]);
        assert_eq!(post_process(&pth, &w, &TrialCounters::new()), pth);
    }

    fn crossing_world(spawn_at: Point2, velocity: Point2) -> WorldState {
        let mut s = scenario();
        s.goal = p(30.0, 0.0);
        s.obstacles.push(ObstacleSpec {
            shape: Rect::from_corners(spawn_at, spawn_at.offset(1.0, 1.0)),
            kind: ObstacleKind::Moving,
            speed: velocity.x.hypot(velocity.y),
            spawn_tick: 0,
            motion_seed: 0,
        });
        let mut w = WorldState::new(&s, 0);
        let rect = w.obstacles[0].rect;
        w.obstacles[0] = Obstacle {
            spec: w.obstacles[0].spec.clone(),
            rect,
            velocity,
            inflated: rect.inflate(s.robot_half_extent),
        };
        w
    }

    #[test]
    fn bootstrap_on_empty_map_emits_path_on_first_tick() {
        let w = WorldState::new(&scenario(), 0);
        let c = TrialCounters::new();
        let mut planner = MultiStage::new(&w, MultiStageConfig::for_robot(0.5), c);
        let mut rng = PlannerRng::new(0);
        let out = planner.tick(&w, &mut rng, Budget::Iterations(200));
        let pth = out.path.expect("path after first tick");
        assert!(out.moved);
        assert_eq!(pth.first(), w.robot);
        assert_eq!(pth.last(), w.goal);
        // Free straight line: shortening leaves just the endpoints.
        assert_eq!(pth.len(), 2);
    }

    #[test]
    fn free_path_is_a_fixed_point() {
        let w = WorldState::new(&scenario(), 0);
        let mut planner = MultiStage::new(&w, MultiStageConfig::for_robot(0.5), TrialCounters::new());
        let mut rng = PlannerRng::new(4);
        let first = planner.tick(&w, &mut rng, Budget::Iterations(200)).path.unwrap();
        for _ in 0..5 {
            let again = planner.tick(&w, &mut rng, Budget::Iterations(200));
            assert_eq!(again.path.as_ref(), Some(&first));
            assert!(again.moved);
        }
    }

    #[test]
    fn obstacle_crossing_is_repaired_or_waited_out() {
        // A block drifts down across the straight path and leaves.
        let mut w = crossing_world(p(14.5, 6.0), p(0.0, -0.3));
        let c = TrialCounters::new();
        let mut planner = MultiStage::new(&w, MultiStageConfig::for_robot(0.5), c.clone());
        let mut rng = PlannerRng::new(11);
        let mut saw_block = false;
        let mut free_after_block = false;
        for _ in 0..120 {
            w.update_world();
            let blocked_before = planner
                .path()
                .is_some_and(|pp| !feas(pp, &w, &TrialCounters::new()).is_free());
            saw_block |= blocked_before;
            let out = planner.tick(&w, &mut rng, Budget::Iterations(50));
            if let Some(pp) = &out.path {
                assert_eq!(pp.first(), w.robot);
                assert_eq!(pp.last(), w.goal);
                if out.moved {
                    assert!(feas(pp, &w, &TrialCounters::new()).is_free());
                    if saw_block {
                        free_after_block = true;
                    }
                }
            }
        }
        assert!(saw_block, "scripted obstacle never crossed the path");
        assert!(free_after_block, "path never became feasible again");
    }
}
