//! Planar geometry shared by every module, plus the transforms between the
//! robot's world frame and the operator display plane.
//!
//! The robot frame is the usual ROS convention: `x` forward/east, `y`
//! left/north, angles counter-clockwise from `+x`. The display plane is the
//! horizontal XZ plane of a Y-up scene. A world point `(a, b)` shows up at
//! display `(-b, a)`.

use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use crate::math::{self, PI, TAU};

/// Segments shorter than this are rejected as degenerate.
pub const MIN_SEGMENT_LENGTH: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeometryError {
    DegenerateSegment,
    NonFinite,
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryError::DegenerateSegment => f.write_str("segment endpoints coincide"),
            GeometryError::NonFinite => f.write_str("coordinate is not finite"),
        }
    }
}

/// A point (or free vector) in the world frame, meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    #[inline]
    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    #[inline]
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    #[inline]
    pub fn norm(self) -> f64 {
        math::hypot(self.x, self.y)
    }

    #[inline]
    pub fn distance(self, other: Point) -> f64 {
        (self - other).norm()
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Unit vector at `angle` radians from `+x`.
    #[inline]
    pub fn from_angle(angle: f64) -> Point {
        Point::new(math::cos(angle), math::sin(angle))
    }

    #[inline]
    pub fn angle(self) -> f64 {
        math::atan2(self.y, self.x)
    }

    #[inline]
    pub fn lerp(self, other: Point, t: f64) -> Point {
        self + (other - self) * t
    }

    #[inline]
    pub fn midpoint(self, other: Point) -> Point {
        Point::new((self.x + other.x) / 2.0, (self.y + other.y) / 2.0)
    }

    /// Counter-clockwise rotation about the origin.
    #[inline]
    pub fn rotate(self, angle: f64) -> Point {
        let (s, c) = (math::sin(angle), math::cos(angle));
        Point::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

impl Add for Point {
    type Output = Point;
    #[inline]
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    #[inline]
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    #[inline]
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Point {
    type Output = Point;
    #[inline]
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// Wraps an angle into `(-π, π]`.
pub fn normalize_angle(angle: f64) -> f64 {
    let wrapped = math::rem_euclid(angle + PI, TAU) - PI;
    // rem_euclid lands on [-π, π); fold the lower bound onto +π
    if wrapped <= -PI {
        wrapped + TAU
    } else {
        wrapped
    }
}

/// Robot position and heading in the world frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pose2D {
    pub x: f64,
    pub y: f64,
    /// Radians in `(-π, π]`, counter-clockwise from `+x`.
    pub theta: f64,
}

impl Pose2D {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Pose2D { x, y, theta: normalize_angle(theta) }
    }

    #[inline]
    pub fn position(&self) -> Point {
        Point::new(self.x, self.y)
    }

    #[inline]
    pub fn heading(&self) -> Point {
        Point::from_angle(self.theta)
    }

    /// Expresses a world point in this pose's body frame (forward = +x, left = +y).
    pub fn to_local(&self, p: Point) -> Point {
        (p - self.position()).rotate(-self.theta)
    }

    pub fn to_world(&self, local: Point) -> Point {
        local.rotate(self.theta) + self.position()
    }
}

/// A wall or map line segment in the world frame.
///
/// Endpoint order carries no meaning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment2D {
    p1: Point,
    p2: Point,
}

impl Segment2D {
    pub fn new(p1: Point, p2: Point) -> Result<Self, GeometryError> {
        if !p1.is_finite() || !p2.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        if p1.distance(p2) <= MIN_SEGMENT_LENGTH {
            return Err(GeometryError::DegenerateSegment);
        }
        Ok(Segment2D { p1, p2 })
    }

    /// Builds a segment from raw endpoint coordinates `(a1, b1)`–`(a2, b2)`.
    pub fn from_coords(a1: f64, b1: f64, a2: f64, b2: f64) -> Result<Self, GeometryError> {
        Segment2D::new(Point::new(a1, b1), Point::new(a2, b2))
    }

    #[inline]
    pub fn p1(&self) -> Point {
        self.p1
    }

    #[inline]
    pub fn p2(&self) -> Point {
        self.p2
    }

    #[inline]
    pub fn length(&self) -> f64 {
        self.p1.distance(self.p2)
    }

    #[inline]
    pub fn midpoint(&self) -> Point {
        self.p1.midpoint(self.p2)
    }

    /// Unit direction from `p1` to `p2`.
    #[inline]
    pub fn direction(&self) -> Point {
        let d = self.p2 - self.p1;
        d * (1.0 / d.norm())
    }

    /// Undirected orientation in `[0, π)`.
    pub fn orientation(&self) -> f64 {
        let a = math::rem_euclid(self.direction().angle(), PI);
        if a >= PI {
            0.0
        } else {
            a
        }
    }

    pub fn reversed(&self) -> Segment2D {
        Segment2D { p1: self.p2, p2: self.p1 }
    }

    /// Closest point of the segment to `p`.
    pub fn closest_point(&self, p: Point) -> Point {
        let d = self.p2 - self.p1;
        let t = ((p - self.p1).dot(d) / d.dot(d)).clamp(0.0, 1.0);
        self.p1 + d * t
    }

    pub fn distance_to_point(&self, p: Point) -> f64 {
        self.closest_point(p).distance(p)
    }

    /// Perpendicular distance from `p` to the infinite carrier line.
    pub fn line_distance(&self, p: Point) -> f64 {
        self.direction().cross(p - self.p1).abs()
    }

    /// Parameter `t` along the carrier line such that `p1 + t·dir` is the
    /// projection of `p` (meters from `p1`).
    pub fn project(&self, p: Point) -> f64 {
        (p - self.p1).dot(self.direction())
    }

    /// Distance along the ray `origin + s·dir` (`dir` unit) to this segment,
    /// if the ray hits it.
    pub fn ray_intersection(&self, origin: Point, dir: Point) -> Option<f64> {
        let e = self.p2 - self.p1;
        let denom = dir.cross(e);
        if denom.abs() < 1e-15 {
            return None;
        }
        let w = self.p1 - origin;
        let s = w.cross(e) / denom;
        let u = w.cross(dir) / denom;
        if s >= 0.0 && (-1e-12..=1.0 + 1e-12).contains(&u) {
            Some(s)
        } else {
            None
        }
    }

    /// Whether the two closed segments share at least one point.
    pub fn intersects(&self, other: &Segment2D) -> bool {
        segments_intersect(self.p1, self.p2, other.p1, other.p2)
    }

    /// Minimum distance between two segments.
    pub fn distance_to_segment(&self, other: &Segment2D) -> f64 {
        segment_distance(self.p1, self.p2, other.p1, other.p2)
    }
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed-segment intersection test; endpoints may be equal (zero-length).
pub fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let d = b - a;
    let len2 = d.dot(d);
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(d) / len2).clamp(0.0, 1.0);
    p.distance(a + d * t)
}

/// Minimum distance between segments `ab` and `cd` (either may be a point).
pub fn segment_distance(a: Point, b: Point, c: Point, d: Point) -> f64 {
    if segments_intersect(a, b, c, d) {
        return 0.0;
    }
    point_segment_distance(a, c, d)
        .min(point_segment_distance(b, c, d))
        .min(point_segment_distance(c, a, b))
        .min(point_segment_distance(d, a, b))
}

/// A point on the operator display plane (Y-up scene, so the floor is XZ).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DisplayPoint {
    pub x: f64,
    pub z: f64,
}

impl DisplayPoint {
    pub const fn new(x: f64, z: f64) -> Self {
        DisplayPoint { x, z }
    }
}

/// A wall rendered as a cuboid lying on the display floor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisplayBox {
    pub center: DisplayPoint,
    pub length: f64,
    /// Rotation about the vertical axis, radians in `[-π/2, π/2]`.
    pub yaw: f64,
}

/// World `(a, b)` ↦ display `(-b, a)`.
#[inline]
pub fn ros_to_display(p: Point) -> DisplayPoint {
    DisplayPoint::new(-p.y, p.x)
}

/// Display `(x, z)` ↦ world `(z, -x)`; exact inverse of [`ros_to_display`].
#[inline]
pub fn display_to_ros(p: DisplayPoint) -> Point {
    Point::new(p.z, -p.x)
}

/// Sign with `sgn(0) = 1`.
#[inline]
fn sgn(v: f64) -> f64 {
    if v < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Places a world segment on the display floor as a box: length and midpoint
/// of the transformed endpoints, yaw `-asin(u.z)·sgn(u.x)` of their unit
/// difference `u`.
pub fn segment_to_box(s: &Segment2D) -> DisplayBox {
    let q1 = ros_to_display(s.p1());
    let q2 = ros_to_display(s.p2());
    let (dx, dz) = (q2.x - q1.x, q2.z - q1.z);
    let length = math::hypot(dx, dz);
    let (ux, uz) = (dx / length, dz / length);
    let yaw = -math::asin(uz.clamp(-1.0, 1.0)) * sgn(ux);
    DisplayBox {
        center: DisplayPoint::new((q1.x + q2.x) / 2.0, (q1.z + q2.z) / 2.0),
        length,
        yaw,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = 1e-12;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < EPS
    }

    #[test]
    fn ros_to_display_examples() {
        assert_eq!(ros_to_display(Point::new(0.0, 0.0)), DisplayPoint::new(0.0, 0.0));
        assert_eq!(ros_to_display(Point::new(1.0, 0.0)), DisplayPoint::new(0.0, 1.0));
        assert_eq!(ros_to_display(Point::new(2.0, -3.0)), DisplayPoint::new(3.0, 2.0));
    }

    #[test]
    fn display_to_ros_examples() {
        assert_eq!(display_to_ros(DisplayPoint::new(0.0, 0.0)), Point::new(0.0, 0.0));
        assert_eq!(display_to_ros(DisplayPoint::new(0.0, 1.0)), Point::new(1.0, 0.0));
    }

    #[test]
    fn box_along_world_y() {
        let b = segment_to_box(&Segment2D::from_coords(0.0, 0.0, 0.0, 2.0).unwrap());
        assert!(close(b.length, 2.0));
        assert!(close(b.center.x, -1.0) && close(b.center.z, 0.0));
        assert!(close(b.yaw, 0.0));
    }

    #[test]
    fn box_vertical_in_display_uses_positive_sign_at_zero() {
        let b = segment_to_box(&Segment2D::from_coords(0.0, 0.0, 2.0, 0.0).unwrap());
        assert!(close(b.length, 2.0));
        assert!(close(b.yaw, -PI / 2.0));
    }

    #[test]
    fn box_diagonal() {
        let b = segment_to_box(&Segment2D::from_coords(0.0, 0.0, 1.0, 1.0).unwrap());
        assert!(close(b.length, core::f64::consts::SQRT_2));
        assert!(close(b.yaw, PI / 4.0));
    }

    #[test]
    fn swapped_endpoints_keep_box_except_at_vertical() {
        let s = Segment2D::from_coords(0.3, -1.0, 2.0, 0.5).unwrap();
        let a = segment_to_box(&s);
        let b = segment_to_box(&s.reversed());
        assert!(close(a.yaw, b.yaw));
        assert!(close(a.center.x, b.center.x) && close(a.center.z, b.center.z));
    }

    #[test]
    fn degenerate_segment_rejected() {
        assert_eq!(
            Segment2D::from_coords(1.0, 1.0, 1.0, 1.0),
            Err(GeometryError::DegenerateSegment)
        );
        assert_eq!(
            Segment2D::from_coords(f64::NAN, 1.0, 1.0, 1.0),
            Err(GeometryError::NonFinite)
        );
    }

    #[test]
    fn angle_normalization_range() {
        assert!(close(normalize_angle(PI), PI));
        assert!(close(normalize_angle(-PI), PI));
        assert!(close(normalize_angle(3.0 * PI / 2.0), -PI / 2.0));
        assert!(close(normalize_angle(0.0), 0.0));
        assert!(close(normalize_angle(TAU + 0.5), 0.5));
    }

    #[test]
    fn ray_hits_wall() {
        let wall = Segment2D::from_coords(2.0, -2.0, 2.0, 2.0).unwrap();
        let d = wall.ray_intersection(Point::ORIGIN, Point::new(1.0, 0.0)).unwrap();
        assert!(close(d, 2.0));
        assert!(wall.ray_intersection(Point::ORIGIN, Point::new(-1.0, 0.0)).is_none());
    }

    #[test]
    fn segment_distances() {
        let a = Segment2D::from_coords(0.0, 0.0, 1.0, 0.0).unwrap();
        let b = Segment2D::from_coords(0.5, 1.0, 0.5, 2.0).unwrap();
        assert!(close(a.distance_to_segment(&b), 1.0));
        let c = Segment2D::from_coords(0.5, -1.0, 0.5, 1.0).unwrap();
        assert!(a.intersects(&c));
        assert_eq!(a.distance_to_segment(&c), 0.0);
    }

    #[test]
    fn local_frame_round_trip() {
        let pose = Pose2D::new(1.0, 2.0, PI / 2.0);
        let local = pose.to_local(Point::new(1.0, 3.0));
        assert!(close(local.x, 1.0) && close(local.y, 0.0));
        let back = pose.to_world(local);
        assert!(close(back.x, 1.0) && close(back.y, 3.0));
    }
}
