//! Discrete-time simulation of obstacles and the robot.
//!
//! One tick advances every moving obstacle by its constant velocity, with
//! specular reflection off the map bounds and static walls, and activates any
//! appearing obstacle whose spawn tick has come. Obstacles pass through each
//! other and through the robot.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::counters::TrialCounters;
use crate::geom2d::{point_in_rect, segment_entry, segment_intersects_rect, Point2, Rect, Segment};
use crate::multistage::Path;
use crate::scenario::{ObstacleKind, ObstacleSpec, Scenario};

#[derive(Debug, Clone, PartialEq)]
pub struct Obstacle {
    pub spec: ObstacleSpec,
    /// Current physical footprint.
    pub rect: Rect,
    /// Length per tick; zero for static and appearing obstacles.
    pub velocity: Point2,
    /// `rect` inflated by the robot half-extent.
    pub inflated: Rect,
}

impl Obstacle {
    pub fn is_active(&self, tick: u64) -> bool {
        self.spec.is_active_at(tick)
    }

    /// Moving or appearing; the obstacles that can invalidate previously checked edges.
    pub fn is_dynamic(&self) -> bool {
        self.spec.kind != ObstacleKind::Static
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    pub tick: u64,
    pub obstacles: Vec<Obstacle>,
    pub robot: Point2,
    pub goal: Point2,
    pub bounds: Rect,
    pub walls: Vec<Rect>,
    pub inflated_walls: Vec<Rect>,
    pub robot_speed: f64,
    pub robot_half_extent: f64,
}

/// Mixes the trial seed with an obstacle's own seed so every trial gets its
/// own obstacle trajectories while all planners in a trial see the same ones.
fn motion_stream(world_seed: u64, motion_seed: u64) -> ChaCha8Rng {
    let mixed = world_seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ motion_seed.rotate_left(29) ^ 0xD1B5_4A32_D192_ED03;
    ChaCha8Rng::seed_from_u64(mixed)
}

impl WorldState {
    /// Initial state at tick 0 for the given scenario and trial seed.
    pub fn new(scenario: &Scenario, world_seed: u64) -> WorldState {
        let h = scenario.robot_half_extent;
        let obstacles = scenario
            .obstacles
            .iter()
            .map(|spec| {
                let velocity = if spec.kind == ObstacleKind::Moving {
                    let mut rng = motion_stream(world_seed, spec.motion_seed);
                    let angle = rng.random_range(0.0..std::f64::consts::TAU);
                    Point2::new(spec.speed * angle.cos(), spec.speed * angle.sin())
                } else {
                    Point2::default()
                };
                Obstacle {
                    spec: spec.clone(),
                    rect: spec.shape,
                    velocity,
                    inflated: spec.shape.inflate(h),
                }
            })
            .collect();
        WorldState {
            tick: 0,
            obstacles,
            robot: scenario.start,
            goal: scenario.goal,
            bounds: scenario.bounds,
            walls: scenario.walls.clone(),
            inflated_walls: scenario.inflated_walls(),
            robot_speed: scenario.robot_speed,
            robot_half_extent: h,
        }
    }

    /// Advances the clock by one tick and moves the obstacles.
    pub fn update_world(&mut self) {
        self.tick += 1;
        let h = self.robot_half_extent;
        for ob in &mut self.obstacles {
            if ob.spec.kind != ObstacleKind::Moving {
                continue;
            }
            let (dx, hit_x) = slide(&ob.rect, Axis::X, ob.velocity.x, &self.bounds, &self.walls);
            ob.rect = ob.rect.translate(dx, 0.0);
            if hit_x {
                ob.velocity.x = -ob.velocity.x;
            }
            let (dy, hit_y) = slide(&ob.rect, Axis::Y, ob.velocity.y, &self.bounds, &self.walls);
            ob.rect = ob.rect.translate(0.0, dy);
            if hit_y {
                ob.velocity.y = -ob.velocity.y;
            }
            ob.inflated = ob.rect.inflate(h);
        }
    }

    /// Moves the robot up to `robot_speed` along `path` and returns the part of
    /// the path still ahead, starting at the new robot position.
    ///
    /// `path` must start at the robot.
    pub fn advance_robot(&mut self, path: &Path) -> Path {
        let pts = path.points();
        debug_assert!(
            pts[0].distance(&self.robot) <= 1e-6,
            "path does not start at the robot: {:?} vs {:?}",
            pts[0],
            self.robot
        );
        let mut budget = self.robot_speed;
        let mut pos = self.robot;
        let mut next = 1;
        while next < pts.len() {
            let d = pos.distance(&pts[next]);
            if d <= budget {
                budget -= d;
                pos = pts[next];
                next += 1;
            } else {
                pos = pos.lerp(&pts[next], budget / d);
                break;
            }
        }
        self.robot = pos;
        let mut rest = Vec::with_capacity(pts.len() - next + 1);
        rest.push(pos);
        rest.extend_from_slice(&pts[next..]);
        if rest.len() == 1 {
            rest.push(pos);
        }
        Path::from_points_unchecked(rest)
    }

    /// True when the robot point lies in an active inflated obstacle or wall.
    pub fn robot_collides(&self) -> bool {
        self.point_blocked(self.robot)
    }

    /// Uncounted closed containment test against walls and active obstacles.
    pub fn point_blocked(&self, p: Point2) -> bool {
        self.inflated_walls.iter().any(|w| point_in_rect(p, w)) || self.active_inflated().any(|r| point_in_rect(p, r))
    }

    pub fn active_obstacles(&self) -> impl Iterator<Item = &Obstacle> {
        let tick = self.tick;
        self.obstacles.iter().filter(move |o| o.is_active(tick))
    }

    pub fn active_inflated(&self) -> impl Iterator<Item = &Rect> {
        self.active_obstacles().map(|o| &o.inflated)
    }

    fn active_dynamic_inflated(&self) -> impl Iterator<Item = &Rect> {
        self.active_obstacles().filter(|o| o.is_dynamic()).map(|o| &o.inflated)
    }

    /// Full feasibility check of one segment: walls and every active obstacle.
    pub fn segment_blocked(&self, s: &Segment, counters: &TrialCounters) -> bool {
        self.inflated_walls
            .iter()
            .any(|w| segment_intersects_rect(s, w, counters))
            || self.active_inflated().any(|r| segment_intersects_rect(s, r, counters))
    }

    /// Checks only obstacles that move or appear. Edges that passed
    /// [`segment_blocked`](Self::segment_blocked) once can only be invalidated by these.
    pub fn segment_blocked_by_dynamic(&self, s: &Segment, counters: &TrialCounters) -> bool {
        self.active_dynamic_inflated()
            .any(|r| segment_intersects_rect(s, r, counters))
    }

    /// Smallest parameter at which `s` touches a wall or active obstacle.
    pub fn first_contact(&self, s: &Segment, counters: &TrialCounters) -> Option<f64> {
        self.inflated_walls
            .iter()
            .chain(self.active_inflated())
            .filter_map(|r| segment_entry(s, r, counters))
            .min_by(f64::total_cmp)
    }

    /// Every rectangle a feasible path must avoid right now.
    pub fn blocking_rects(&self) -> Vec<Rect> {
        self.inflated_walls
            .iter()
            .chain(self.active_inflated())
            .copied()
            .collect()
    }
}

#[derive(Clone, Copy)]
enum Axis {
    X,
    Y,
}

/// Largest move along `axis` of at most `delta` that keeps `rect` inside
/// `bounds` without entering any wall. The flag reports a contact, which
/// reverses that velocity component.
fn slide(rect: &Rect, axis: Axis, delta: f64, bounds: &Rect, walls: &[Rect]) -> (f64, bool) {
    if delta == 0.0 {
        return (0.0, false);
    }
    let (lo, hi, cross_lo, cross_hi) = match axis {
        Axis::X => (rect.min.x, rect.max.x, rect.min.y, rect.max.y),
        Axis::Y => (rect.min.y, rect.max.y, rect.min.x, rect.max.x),
    };
    let span = |r: &Rect| match axis {
        Axis::X => (r.min.x, r.max.x, r.min.y, r.max.y),
        Axis::Y => (r.min.y, r.max.y, r.min.x, r.max.x),
    };
    let (b_lo, b_hi, _, _) = span(bounds);
    let mut room = if delta > 0.0 { b_hi - hi } else { lo - b_lo };
    for w in walls {
        let (w_lo, w_hi, w_cross_lo, w_cross_hi) = span(w);
        if !(w_cross_lo < cross_hi && cross_lo < w_cross_hi) {
            continue;
        }
        if delta > 0.0 && w_lo >= hi {
            room = room.min(w_lo - hi);
        } else if delta < 0.0 && w_hi <= lo {
            room = room.min(lo - w_hi);
        }
    }
    let room = room.max(0.0);
    if delta.abs() <= room {
        (delta, false)
    } else {
        (room.copysign(delta), true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::ObstacleSpec;

    fn empty_scenario() -> Scenario {
        Scenario {
            name: "empty".into(),
            bounds: Rect::new(-10.0, -10.0, 20.0, 20.0),
            walls: vec![],
            obstacles: vec![],
            start: Point2::new(0.0, 0.0),
            goal: Point2::new(10.0, 0.0),
            robot_speed: 1.0,
            robot_half_extent: 0.0,
            cutoff_s: 10.0,
            planning_budget_s: 0.05,
            tick_s: 0.05,
        }
    }

    fn mover(rect: Rect, velocity: Point2) -> Obstacle {
        let spec = ObstacleSpec {
            shape: rect,
            kind: ObstacleKind::Moving,
            speed: velocity.x.hypot(velocity.y),
            spawn_tick: 0,
            motion_seed: 0,
        };
        Obstacle {
            spec,
            rect,
            velocity,
            inflated: rect,
        }
    }

    fn path(pts: &[(f64, f64)]) -> Path {
        Path::new(pts.iter().map(|&p| p.into()).collect()).unwrap()
    }

    #[test]
    fn reflects_off_wall_on_contact() {
        // Hand-computed: right edge at 1.0, wall face at 1.5, step 0.3.
        // Tick 1: edge 1.3. Tick 2: only 0.2 of room, so it stops at 1.5 and flips.
        let mut w = WorldState::new(&empty_scenario(), 1);
        w.walls = vec![Rect::new(1.5, -5.0, 2.0, 5.0)];
        w.obstacles = vec![mover(Rect::new(0.0, 0.0, 1.0, 1.0), Point2::new(0.3, 0.0))];
        w.update_world();
        assert!((w.obstacles[0].rect.max.x - 1.3).abs() < 1e-12);
        assert_eq!(w.obstacles[0].velocity.x, 0.3);
        w.update_world();
        assert!((w.obstacles[0].rect.max.x - 1.5).abs() < 1e-12);
        assert_eq!(w.obstacles[0].velocity.x, -0.3);
        w.update_world();
        assert!((w.obstacles[0].rect.max.x - 1.2).abs() < 1e-12);
    }

    #[test]
    fn reflects_off_bounds() {
        let mut w = WorldState::new(&empty_scenario(), 1);
        w.obstacles = vec![mover(Rect::new(0.0, 18.5, 1.0, 19.5), Point2::new(0.0, 0.4))];
        w.update_world();
        w.update_world();
        assert!((w.obstacles[0].rect.max.y - 20.0).abs() < 1e-12);
        assert_eq!(w.obstacles[0].velocity.y, -0.4);
    }

    #[test]
    fn appearing_obstacle_activates_at_spawn_tick() {
        let mut s = empty_scenario();
        s.obstacles.push(ObstacleSpec {
            shape: Rect::new(5.0, 5.0, 7.0, 7.0),
            kind: ObstacleKind::Appearing,
            speed: 0.0,
            spawn_tick: 600,
            motion_seed: 0,
        });
        let mut w = WorldState::new(&s, 3);
        w.tick = 599;
        assert_eq!(w.active_obstacles().count(), 0);
        w.update_world();
        assert_eq!(w.tick, 600);
        assert_eq!(w.active_obstacles().count(), 1);
        assert_eq!(w.obstacles[0].rect, Rect::new(5.0, 5.0, 7.0, 7.0));
    }

    #[test]
    fn statics_never_move() {
        let mut s = empty_scenario();
        s.walls.push(Rect::new(3.0, 3.0, 4.0, 8.0));
        s.obstacles.push(ObstacleSpec {
            shape: Rect::new(5.0, 5.0, 7.0, 7.0),
            kind: ObstacleKind::Static,
            speed: 0.0,
            spawn_tick: 0,
            motion_seed: 0,
        });
        let mut w = WorldState::new(&s, 3);
        let before = w.obstacles.clone();
        w.update_world();
        assert_eq!(w.obstacles, before);
        assert_eq!(w.tick, 1);
    }

    #[test]
    fn same_seed_same_trajectories() {
        let s = Scenario::bundled("dynamic").unwrap();
        let mut a = WorldState::new(&s, 42);
        let mut b = WorldState::new(&s, 42);
        let mut c = WorldState::new(&s, 43);
        for _ in 0..500 {
            a.update_world();
            b.update_world();
            c.update_world();
        }
        assert_eq!(a, b);
        assert_ne!(a.obstacles, c.obstacles);
    }

    #[test]
    fn moving_obstacles_keep_speed_and_stay_in_bounds() {
        let s = Scenario::bundled("dynamic").unwrap();
        let mut w = WorldState::new(&s, 9);
        let speeds: Vec<f64> = w.obstacles.iter().map(|o| o.velocity.x.hypot(o.velocity.y)).collect();
        for _ in 0..3000 {
            w.update_world();
            for (o, &v) in w.obstacles.iter().zip(&speeds) {
                assert!((o.velocity.x.hypot(o.velocity.y) - v).abs() < 1e-12);
                assert!(s.bounds.contains_rect(&o.rect));
                assert!(!s.walls.iter().any(|wall| wall.overlaps_interior(&o.rect)));
            }
        }
    }

    #[test]
    fn advance_straight_line() {
        let mut w = WorldState::new(&empty_scenario(), 0);
        let rest = w.advance_robot(&path(&[(0.0, 0.0), (10.0, 0.0)]));
        assert_eq!(w.robot, Point2::new(1.0, 0.0));
        assert_eq!(rest.points(), &[Point2::new(1.0, 0.0), Point2::new(10.0, 0.0)]);
    }

    #[test]
    fn advance_turns_corner_with_residual_budget() {
        let mut w = WorldState::new(&empty_scenario(), 0);
        let rest = w.advance_robot(&path(&[(0.0, 0.0), (0.5, 0.0), (0.5, 1.0)]));
        assert_eq!(w.robot, Point2::new(0.5, 0.5));
        assert_eq!(rest.len(), 2);
    }

    #[test]
    fn advance_clamps_at_goal() {
        let mut w = WorldState::new(&empty_scenario(), 0);
        w.robot = Point2::new(9.5, 0.0);
        let rest = w.advance_robot(&path(&[(9.5, 0.0), (10.0, 0.0)]));
        assert_eq!(w.robot, Point2::new(10.0, 0.0));
        assert_eq!(rest.points(), &[Point2::new(10.0, 0.0), Point2::new(10.0, 0.0)]);
    }

    #[test]
    fn robot_collision_semantics() {
        let mut s = empty_scenario();
        s.robot_half_extent = 0.5;
        let mut w = WorldState::new(&s, 0);
        assert!(!w.robot_collides());
        w.obstacles = vec![mover(Rect::new(-1.0, -1.0, 1.0, 1.0), Point2::new(0.1, 0.0))];
        w.obstacles[0].inflated = w.obstacles[0].rect.inflate(0.5);
        assert!(w.robot_collides());
        w.robot = Point2::new(1.5, 0.0);
        assert!(w.robot_collides(), "inflated boundary is closed");
        w.robot = Point2::new(1.6, 0.0);
        assert!(!w.robot_collides());
    }

    #[test]
    fn first_contact_picks_nearest_rect() {
        let mut w = WorldState::new(&empty_scenario(), 0);
        w.inflated_walls = vec![Rect::new(6.0, -1.0, 7.0, 1.0), Rect::new(4.0, -1.0, 5.0, 1.0)];
        let s = Segment::new(Point2::new(0.0, 0.0), Point2::new(10.0, 0.0));
        let c = TrialCounters::new();
        assert_eq!(w.first_contact(&s, &c), Some(0.4));
        assert_eq!(c.collision_checks(), 2);
    }
}
