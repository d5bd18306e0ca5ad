//! Exact 2D primitives and the segment/rectangle collision kernel.
//!
//! The robot is a point; every rectangle handed to the collision kernel is
//! expected to be already inflated by the robot's half-extent. Rectangles are
//! closed: touching the boundary counts as a collision.
//!
//! [`segment_intersects_rect`] and [`segment_entry`] are the only counted
//! collision primitives. Each call bumps the trial's collision-check counter by
//! exactly one.

use serde::{Deserialize, Serialize};

use crate::counters::TrialCounters;

/// A position in the workspace, which is also the robot's configuration.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        distance(*self, *other)
    }

    /// Squared distance; used where only comparisons matter.
    #[inline]
    pub fn distance_sq(&self, other: &Point2) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    /// Point at parameter `t` along `self -> other`.
    #[inline]
    pub fn lerp(&self, other: &Point2, t: f64) -> Point2 {
        Point2::new(self.x + (other.x - self.x) * t, self.y + (other.y - self.y) * t)
    }

    pub fn midpoint(&self, other: &Point2) -> Point2 {
        Point2::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }

    pub fn offset(&self, dx: f64, dy: f64) -> Point2 {
        Point2::new(self.x + dx, self.y + dy)
    }
}

impl From<(f64, f64)> for Point2 {
    fn from((x, y): (f64, f64)) -> Self {
        Point2::new(x, y)
    }
}

/// Euclidean distance.
#[inline]
pub fn distance(p: Point2, q: Point2) -> f64 {
    (p.x - q.x).hypot(p.y - q.y)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Point2,
    pub b: Point2,
}

impl Segment {
    pub const fn new(a: Point2, b: Point2) -> Self {
        Self { a, b }
    }

    pub fn length(&self) -> f64 {
        distance(self.a, self.b)
    }

    pub fn reversed(&self) -> Segment {
        Segment::new(self.b, self.a)
    }

    pub fn bounding_box(&self) -> Rect {
        Rect::from_corners(self.a, self.b)
    }
}

/// Closed axis-aligned rectangle `[min.x, max.x] x [min.y, max.y]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Point2,
    pub max: Point2,
}

impl Rect {
    /// Builds a rectangle from explicit bounds. Callers must pass `min <= max`.
    pub fn new(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Self {
        debug_assert!(min_x <= max_x && min_y <= max_y, "inverted rect");
        Self {
            min: Point2::new(min_x, min_y),
            max: Point2::new(max_x, max_y),
        }
    }

    /// Smallest rectangle containing both corners, in any order.
    pub fn from_corners(p: Point2, q: Point2) -> Self {
        Self {
            min: Point2::new(p.x.min(q.x), p.y.min(q.y)),
            max: Point2::new(p.x.max(q.x), p.y.max(q.y)),
        }
    }

    pub fn is_valid(&self) -> bool {
        self.min.is_finite() && self.max.is_finite() && self.min.x <= self.max.x && self.min.y <= self.max.y
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn center(&self) -> Point2 {
        self.min.midpoint(&self.max)
    }

    pub fn contains(&self, p: Point2) -> bool {
        point_in_rect(p, self)
    }

    /// True when `other` lies entirely inside `self` (boundaries may touch).
    pub fn contains_rect(&self, other: &Rect) -> bool {
        other.min.x >= self.min.x && other.min.y >= self.min.y && other.max.x <= self.max.x && other.max.y <= self.max.y
    }

    /// Minkowski sum with a square of half-width `h`.
    pub fn inflate(&self, h: f64) -> Rect {
        Rect::new(self.min.x - h, self.min.y - h, self.max.x + h, self.max.y + h)
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Rect {
        Rect::new(self.min.x + dx, self.min.y + dy, self.max.x + dx, self.max.y + dy)
    }

    /// Overlap of the open interiors; rectangles that merely touch do not overlap.
    pub fn overlaps_interior(&self, other: &Rect) -> bool {
        self.min.x < other.max.x && other.min.x < self.max.x && self.min.y < other.max.y && other.min.y < self.max.y
    }

    /// Overlap of the closed rectangles.
    pub fn intersects(&self, other: &Rect) -> bool {
        self.min.x <= other.max.x && other.min.x <= self.max.x && self.min.y <= other.max.y && other.min.y <= self.max.y
    }

    /// Euclidean distance from `p` to the closed rectangle (0 inside).
    pub fn distance_to(&self, p: Point2) -> f64 {
        let dx = (self.min.x - p.x).max(0.0).max(p.x - self.max.x);
        let dy = (self.min.y - p.y).max(0.0).max(p.y - self.max.y);
        dx.hypot(dy)
    }

    /// `[min_x, min_y, max_x, max_y]`, the on-disk layout.
    pub fn to_array(&self) -> [f64; 4] {
        [self.min.x, self.min.y, self.max.x, self.max.y]
    }

    pub fn from_array(a: [f64; 4]) -> Rect {
        Rect {
            min: Point2::new(a[0], a[1]),
            max: Point2::new(a[2], a[3]),
        }
    }
}

/// Closed containment test.
#[inline]
pub fn point_in_rect(p: Point2, r: &Rect) -> bool {
    p.x >= r.min.x && p.x <= r.max.x && p.y >= r.min.y && p.y <= r.max.y
}

/// Liang–Barsky clip of `s` against the closed rectangle `r`.
///
/// Returns the parameter interval `[t0, t1] ⊆ [0, 1]` of the part of `s` lying
/// in `r`, or `None` when they are disjoint. Uncounted; the counted entry points
/// are [`segment_intersects_rect`] and [`segment_entry`].
pub fn clip_segment(s: &Segment, r: &Rect) -> Option<(f64, f64)> {
    let mut t0 = 0.0_f64;
    let mut t1 = 1.0_f64;
    let axes = [
        (s.a.x, s.b.x - s.a.x, r.min.x, r.max.x),
        (s.a.y, s.b.y - s.a.y, r.min.y, r.max.y),
    ];
    for (origin, delta, lo, hi) in axes {
        if delta == 0.0 {
            if origin < lo || origin > hi {
                return None;
            }
            continue;
        }
        let inv = 1.0 / delta;
        let (mut enter, mut exit) = ((lo - origin) * inv, (hi - origin) * inv);
        if enter > exit {
            std::mem::swap(&mut enter, &mut exit);
        }
        t0 = t0.max(enter);
        t1 = t1.min(exit);
        if t0 > t1 {
            return None;
        }
    }
    Some((t0, t1))
}

/// True iff some point of `s` lies in the closed rectangle `r`. Counted.
pub fn segment_intersects_rect(s: &Segment, r: &Rect, counters: &TrialCounters) -> bool {
    counters.record_collision_check();
    #[cfg(test)]
    shadow::bump();
    // Cheap reject on bounding boxes before clipping.
    if !s.bounding_box().intersects(r) {
        return false;
    }
    clip_segment(s, r).is_some()
}

/// Parameter at which `s` first touches `r`, if it does. Counted.
pub fn segment_entry(s: &Segment, r: &Rect, counters: &TrialCounters) -> Option<f64> {
    counters.record_collision_check();
    #[cfg(test)]
    shadow::bump();
    if !s.bounding_box().intersects(r) {
        return None;
    }
    clip_segment(s, r).map(|(t0, _)| t0)
}

/// Test-only shadow of the collision counter, incremented independently of
/// [`TrialCounters`] so tests can confirm the counter plumbing is complete.
#[cfg(test)]
pub(crate) mod shadow {
    use std::cell::Cell;

    thread_local! {
        static CALLS: Cell<u64> = const { Cell::new(0) };
    }

    pub(crate) fn bump() {
        CALLS.with(|c| c.set(c.get() + 1));
    }

    pub(crate) fn reset() {
        CALLS.with(|c| c.set(0));
    }

    pub(crate) fn get() -> u64 {
        CALLS.with(|c| c.get())
    }
}
