//! Grid planning and motion: rasterize the wall map into an inflated
//! occupancy grid, plan 8-connected A* paths, track them, and lay out patrol
//! polygons.

use alloc::collections::{BinaryHeap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::geometry::{normalize_angle, Point, Pose2D, Segment2D};
use crate::math::{self, TAU};
use crate::world::{check, Bounds, ConfigError};

#[derive(Debug, Clone, PartialEq)]
pub struct NavConfig {
    /// Meters per grid cell.
    pub resolution: f64,
    /// A goal counts as reached within this distance.
    pub goal_tol: f64,
    /// Waypoints closer than this are passed over while tracking.
    pub lookahead: f64,
    /// Extra clearance on top of the robot radius when inflating walls.
    pub inflation_margin: f64,
    /// Occupied go-to targets are moved to the nearest free cell within this radius.
    pub goal_snap_radius: f64,
    /// The follower keeps closing in until this close to the final point.
    pub settle_tol: f64,
    /// Heading error above which the robot turns in place.
    pub turn_in_place: f64,
    pub heading_gain: f64,
    pub approach_gain: f64,
    /// Ticks without progress before a goal is considered stuck.
    pub stall_ticks: u64,
}

impl Default for NavConfig {
    fn default() -> Self {
        NavConfig {
            resolution: 0.05,
            goal_tol: 0.1,
            lookahead: 0.3,
            inflation_margin: 0.05,
            goal_snap_radius: 0.5,
            settle_tol: 0.02,
            turn_in_place: math::to_radians(45.0),
            heading_gain: 3.0,
            approach_gain: 1.0,
            stall_ticks: 200,
        }
    }
}

impl NavConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        check("resolution", self.resolution, self.resolution > 0.0)?;
        check("goal_tol", self.goal_tol, self.goal_tol > 0.0)?;
        check("lookahead", self.lookahead, self.lookahead > 0.0)?;
        check("inflation_margin", self.inflation_margin, self.inflation_margin >= 0.0)?;
        check("goal_snap_radius", self.goal_snap_radius, self.goal_snap_radius >= 0.0)?;
        check(
            "settle_tol",
            self.settle_tol,
            self.settle_tol > 0.0 && self.settle_tol <= self.goal_tol,
        )?;
        check(
            "turn_in_place",
            self.turn_in_place,
            self.turn_in_place > 0.0 && self.turn_in_place <= math::PI,
        )?;
        check("heading_gain", self.heading_gain, self.heading_gain > 0.0)?;
        check("approach_gain", self.approach_gain, self.approach_gain > 0.0)?;
        check("stall_ticks", self.stall_ticks as f64, self.stall_ticks > 0)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellState {
    Free,
    Occupied,
    /// Reserved for frontier-aware planning; never produced by [`rasterize`].
    Unknown,
}

pub type Cell = (usize, usize);

#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    resolution: f64,
    origin: Point,
    width: usize,
    height: usize,
    cells: Vec<CellState>,
}

impl OccupancyGrid {
    /// An all-free grid covering `bounds`.
    pub fn new(bounds: &Bounds, resolution: f64) -> Self {
        let width = (math::floor(bounds.width() / resolution - 1e-9) as usize) + 1;
        let height = (math::floor(bounds.height() / resolution - 1e-9) as usize) + 1;
        OccupancyGrid {
            resolution,
            origin: bounds.min,
            width,
            height,
            cells: vec![CellState::Free; width * height],
        }
    }

    /// Builds a grid from explicit cell states, row-major with `x` fastest.
    pub fn from_cells(origin: Point, resolution: f64, width: usize, height: usize, cells: Vec<CellState>) -> Self {
        assert_eq!(cells.len(), width * height, "cell count does not match dimensions");
        OccupancyGrid { resolution, origin, width, height, cells }
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn origin(&self) -> Point {
        self.origin
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    fn index(&self, c: Cell) -> usize {
        c.1 * self.width + c.0
    }

    pub fn get(&self, c: Cell) -> CellState {
        self.cells[self.index(c)]
    }

    pub fn set(&mut self, c: Cell, state: CellState) {
        let i = self.index(c);
        self.cells[i] = state;
    }

    pub fn is_free(&self, c: Cell) -> bool {
        self.get(c) == CellState::Free
    }

    pub fn cell_of(&self, p: Point) -> Option<Cell> {
        let fx = (p.x - self.origin.x) / self.resolution;
        let fy = (p.y - self.origin.y) / self.resolution;
        if !(fx >= 0.0 && fy >= 0.0) {
            return None;
        }
        let (i, j) = (math::floor(fx) as usize, math::floor(fy) as usize);
        (i < self.width && j < self.height).then_some((i, j))
    }

    pub fn center(&self, c: Cell) -> Point {
        Point::new(
            self.origin.x + (c.0 as f64 + 0.5) * self.resolution,
            self.origin.y + (c.1 as f64 + 0.5) * self.resolution,
        )
    }

    pub fn occupied_count(&self) -> usize {
        self.cells.iter().filter(|c| **c == CellState::Occupied).count()
    }

    fn neighbors(&self, c: Cell) -> impl Iterator<Item = (Cell, bool)> + '_ {
        const STEPS: [(i64, i64); 8] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)];
        STEPS.iter().filter_map(move |&(dx, dy)| {
            let nx = c.0 as i64 + dx;
            let ny = c.1 as i64 + dy;
            if nx < 0 || ny < 0 || nx >= self.width as i64 || ny >= self.height as i64 {
                return None;
            }
            let n = (nx as usize, ny as usize);
            if !self.is_free(n) {
                return None;
            }
            let diagonal = dx != 0 && dy != 0;
            // no squeezing between two blocked orthogonal neighbours
            if diagonal && !(self.is_free((n.0, c.1)) && self.is_free((c.0, n.1))) {
                return None;
            }
            Some((n, diagonal))
        })
    }

    /// Free cells 8-connected to `start` (start included when free).
    pub fn reachable(&self, start: Cell) -> Vec<bool> {
        let mut seen = vec![false; self.cells.len()];
        if !self.is_free(start) {
            return seen;
        }
        let mut queue = VecDeque::new();
        seen[self.index(start)] = true;
        queue.push_back(start);
        while let Some(c) = queue.pop_front() {
            for (n, _) in self.neighbors(c) {
                let i = self.index(n);
                if !seen[i] {
                    seen[i] = true;
                    queue.push_back(n);
                }
            }
        }
        seen
    }

    /// The free cell nearest to `p` whose center lies within `radius`,
    /// optionally restricted by a reachability mask. Ties go to the lower
    /// row, then column.
    pub fn nearest_free(&self, p: Point, radius: f64, mask: Option<&[bool]>) -> Option<Cell> {
        let r = (radius / self.resolution) as i64 + 1;
        let centre = self.cell_of(p).map(|(i, j)| (i as i64, j as i64)).unwrap_or_else(|| {
            (
                math::floor((p.x - self.origin.x) / self.resolution) as i64,
                math::floor((p.y - self.origin.y) / self.resolution) as i64,
            )
        });
        let mut best: Option<(f64, Cell)> = None;
        for j in (centre.1 - r)..=(centre.1 + r) {
            for i in (centre.0 - r)..=(centre.0 + r) {
                if i < 0 || j < 0 || i >= self.width as i64 || j >= self.height as i64 {
                    continue;
                }
                let c = (i as usize, j as usize);
                if !self.is_free(c) || mask.is_some_and(|m| !m[self.index(c)]) {
                    continue;
                }
                let d = self.center(c).distance(p);
                if d <= radius && best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, c));
                }
            }
        }
        best.map(|(_, c)| c)
    }
}

/// Marks every cell whose center lies within `radius` of a segment.
pub fn rasterize(segments: &[Segment2D], radius: f64, bounds: &Bounds, resolution: f64) -> OccupancyGrid {
    let mut grid = OccupancyGrid::new(bounds, resolution);
    for s in segments {
        let lo = Point::new(s.p1().x.min(s.p2().x) - radius, s.p1().y.min(s.p2().y) - radius);
        let hi = Point::new(s.p1().x.max(s.p2().x) + radius, s.p1().y.max(s.p2().y) + radius);
        let to_idx = |v: f64, o: f64, n: usize| -> i64 {
            (math::floor((v - o) / resolution) as i64).clamp(-1, n as i64)
        };
        let (i0, i1) = (to_idx(lo.x, grid.origin.x, grid.width), to_idx(hi.x, grid.origin.x, grid.width));
        let (j0, j1) = (to_idx(lo.y, grid.origin.y, grid.height), to_idx(hi.y, grid.origin.y, grid.height));
        for j in j0.max(0)..=j1.min(grid.height as i64 - 1) {
            for i in i0.max(0)..=i1.min(grid.width as i64 - 1) {
                let c = (i as usize, j as usize);
                if s.distance_to_point(grid.center(c)) <= radius {
                    grid.set(c, CellState::Occupied);
                }
            }
        }
    }
    grid
}

#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub waypoints: Vec<Point>,
    pub cells: Vec<Cell>,
}

impl Path {
    /// Sum of waypoint-to-waypoint distances.
    pub fn length(&self) -> f64 {
        self.waypoints.windows(2).map(|w| w[0].distance(w[1])).sum()
    }

    /// Number of (straight, diagonal) moves.
    pub fn move_counts(&self) -> (usize, usize) {
        let mut counts = (0, 0);
        for w in self.cells.windows(2) {
            if w[0].0 != w[1].0 && w[0].1 != w[1].1 {
                counts.1 += 1;
            } else {
                counts.0 += 1;
            }
        }
        counts
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoPath {
    StartOutsideGrid,
    StartBlocked,
    GoalOutsideGrid,
    GoalBlocked,
    Disconnected,
}

impl fmt::Display for NoPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NoPath::StartOutsideGrid => "start lies outside the grid",
            NoPath::StartBlocked => "start cell is occupied",
            NoPath::GoalOutsideGrid => "goal lies outside the grid",
            NoPath::GoalBlocked => "goal cell is occupied",
            NoPath::Disconnected => "goal is not connected to start",
        })
    }
}

impl core::error::Error for NoPath {}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Open {
    f: f64,
    h: f64,
    idx: usize,
}

impl Eq for Open {}

impl Ord for Open {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on f, then h, then index
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.h.total_cmp(&self.h))
            .then_with(|| other.idx.cmp(&self.idx))
    }
}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortest 8-connected path between two cells (A*, Euclidean heuristic,
/// diagonal cost √2, ties broken toward the smaller heuristic).
pub fn plan_cells(grid: &OccupancyGrid, start: Cell, goal: Cell) -> Result<Path, NoPath> {
    if !grid.is_free(start) {
        return Err(NoPath::StartBlocked);
    }
    if !grid.is_free(goal) {
        return Err(NoPath::GoalBlocked);
    }
    let n = grid.cells.len();
    let heuristic = |c: Cell| {
        let dx = c.0 as f64 - goal.0 as f64;
        let dy = c.1 as f64 - goal.1 as f64;
        math::sqrt(dx * dx + dy * dy)
    };
    let mut g = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut open = BinaryHeap::new();
    let s = grid.index(start);
    g[s] = 0.0;
    let h0 = heuristic(start);
    open.push(Open { f: h0, h: h0, idx: s });
    let goal_idx = grid.index(goal);
    while let Some(Open { idx, .. }) = open.pop() {
        if closed[idx] {
            continue;
        }
        closed[idx] = true;
        if idx == goal_idx {
            break;
        }
        let c = (idx % grid.width, idx / grid.width);
        for (nb, diagonal) in grid.neighbors(c) {
            let ni = grid.index(nb);
            if closed[ni] {
                continue;
            }
            let cost = g[idx] + if diagonal { core::f64::consts::SQRT_2 } else { 1.0 };
            if cost < g[ni] {
                g[ni] = cost;
                parent[ni] = idx;
                let h = heuristic(nb);
                open.push(Open { f: cost + h, h, idx: ni });
            }
        }
    }
    if !closed[goal_idx] {
        return Err(NoPath::Disconnected);
    }
    let mut cells = Vec::new();
    let mut cur = goal_idx;
    loop {
        cells.push((cur % grid.width, cur / grid.width));
        if cur == s {
            break;
        }
        cur = parent[cur];
    }
    cells.reverse();
    let waypoints = cells.iter().map(|c| grid.center(*c)).collect();
    Ok(Path { waypoints, cells })
}

/// Plans between two world points; waypoints are the centers of the cells
/// along the way.
pub fn plan(grid: &OccupancyGrid, start: Point, goal: Point) -> Result<Path, NoPath> {
    let s = grid.cell_of(start).ok_or(NoPath::StartOutsideGrid)?;
    let g = grid.cell_of(goal).ok_or(NoPath::GoalOutsideGrid)?;
    plan_cells(grid, s, g)
}

/// Whether any not-yet-passed waypoint now falls on an occupied cell.
pub fn path_blocked(grid: &OccupancyGrid, path: &[Point]) -> bool {
    path.iter().any(|p| grid.cell_of(*p).is_none_or(|c| !grid.is_free(c)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Follow {
    Drive { v: f64, omega: f64 },
    Arrived,
}

/// Waypoint tracker: heads for the first waypoint at least `lookahead`
/// away, turns in place on large heading errors, and slows down on final
/// approach.
#[derive(Debug, Clone, PartialEq)]
pub struct PathFollower {
    points: Vec<Point>,
    next: usize,
    best_goal_distance: f64,
    ticks_in_tolerance: u64,
}

impl PathFollower {
    pub fn new(points: Vec<Point>) -> Self {
        assert!(!points.is_empty(), "cannot follow an empty path");
        PathFollower { points, next: 0, best_goal_distance: f64::INFINITY, ticks_in_tolerance: 0 }
    }

    pub fn goal(&self) -> Point {
        self.points[self.points.len() - 1]
    }

    /// Waypoints not yet passed.
    pub fn remaining(&self) -> &[Point] {
        &self.points[self.next..]
    }

    pub fn follow(&mut self, pose: &Pose2D, config: &NavConfig, v_max: f64, omega_max: f64) -> Follow {
        let pos = pose.position();
        let last = self.points.len() - 1;
        while self.next < last && self.points[self.next].distance(pos) < config.lookahead {
            self.next += 1;
        }
        let goal_dist = self.goal().distance(pos);
        if goal_dist <= config.settle_tol {
            return Follow::Arrived;
        }
        // inside goal_tol but no longer closing in: accept
        if goal_dist <= config.goal_tol {
            self.ticks_in_tolerance += 1;
            if goal_dist < self.best_goal_distance - 1e-4 {
                self.ticks_in_tolerance = 0;
            }
            if self.ticks_in_tolerance > 100 {
                return Follow::Arrived;
            }
        }
        self.best_goal_distance = self.best_goal_distance.min(goal_dist);

        let target = self.points[self.next];
        let err = normalize_angle((target - pos).angle() - pose.theta);
        let omega = (config.heading_gain * err).clamp(-omega_max, omega_max);
        if err.abs() > config.turn_in_place {
            return Follow::Drive { v: 0.0, omega };
        }
        let mut v = v_max * math::cos(err);
        if self.next == last {
            v = v.min((config.approach_gain * goal_dist).max(0.02));
        }
        Follow::Drive { v, omega }
    }
}

/// Vertices of concentric regular polygons around `origin`, innermost ring
/// first. Ring `k` has radius `radius + k·increment`; vertex `j` sits at
/// `origin.theta + 2πj/sides`.
pub fn patrol_waypoints(sides: u32, radius: f64, increment: f64, origin: &Pose2D, rings: usize) -> Vec<Point> {
    let mut out = Vec::with_capacity(sides as usize * rings);
    for k in 0..rings {
        out.extend(patrol_ring(sides, radius + k as f64 * increment, origin));
    }
    out
}

pub fn patrol_ring(sides: u32, radius: f64, origin: &Pose2D) -> Vec<Point> {
    (0..sides)
        .map(|j| {
            let a = origin.theta + TAU * j as f64 / sides as f64;
            origin.position() + Point::from_angle(a) * radius
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bounds(w: f64) -> Bounds {
        Bounds::new(-w, -w, w, w)
    }

    #[test]
    fn empty_map_is_free() {
        let g = rasterize(&[], 0.15, &bounds(2.0), 0.05);
        assert_eq!(g.occupied_count(), 0);
        assert_eq!((g.width(), g.height()), (80, 80));
    }

    #[test]
    fn wall_band_width() {
        let wall = Segment2D::from_coords(-1.0, 0.0, 1.0, 0.0).unwrap();
        let g = rasterize(&[wall], 0.15, &bounds(2.0), 0.05);
        // brute force: count occupied cells in the column through x = 0
        let col = g.cell_of(Point::new(0.01, 0.0)).unwrap().0;
        let band = (0..g.height()).filter(|&j| !g.is_free((col, j))).count() as f64 * 0.05;
        assert!((band - 0.3).abs() <= 0.05 + 1e-9, "band {band}");
        for j in 0..g.height() {
            for i in 0..g.width() {
                let d = wall.distance_to_point(g.center((i, j)));
                assert_eq!(!g.is_free((i, j)), d <= 0.15);
            }
        }
    }

    #[test]
    fn start_equals_goal() {
        let g = rasterize(&[], 0.15, &bounds(2.0), 0.05);
        let p = plan(&g, Point::new(0.01, 0.01), Point::new(0.02, 0.02)).unwrap();
        assert_eq!(p.waypoints.len(), 1);
    }

    #[test]
    fn straight_line_plan() {
        let g = rasterize(&[], 0.15, &bounds(2.0), 0.05);
        let p = plan(&g, Point::new(0.0, 0.0), Point::new(1.0, 0.0)).unwrap();
        assert!((p.length() - 1.0).abs() <= 0.05 + 1e-9, "{}", p.length());
    }

    fn sealed_box() -> Vec<Segment2D> {
        vec![
            Segment2D::from_coords(0.5, 0.5, 1.5, 0.5).unwrap(),
            Segment2D::from_coords(1.5, 0.5, 1.5, 1.5).unwrap(),
            Segment2D::from_coords(1.5, 1.5, 0.5, 1.5).unwrap(),
            Segment2D::from_coords(0.5, 1.5, 0.5, 0.5).unwrap(),
        ]
    }

    #[test]
    fn goal_in_sealed_box_has_no_path() {
        let g = rasterize(&sealed_box(), 0.15, &bounds(2.0), 0.05);
        assert_eq!(plan(&g, Point::new(-1.0, -1.0), Point::new(1.0, 1.0)), Err(NoPath::Disconnected));
        assert_eq!(plan(&g, Point::new(-1.0, -1.0), Point::new(0.5, 1.0)), Err(NoPath::GoalBlocked));
        assert_eq!(plan(&g, Point::new(-1.0, -1.0), Point::new(9.0, 1.0)), Err(NoPath::GoalOutsideGrid));
    }

    #[test]
    fn plan_avoids_occupied_cells() {
        let wall = Segment2D::from_coords(0.0, -1.5, 0.0, 1.0).unwrap();
        let g = rasterize(&[wall], 0.15, &bounds(2.0), 0.05);
        let p = plan(&g, Point::new(-1.0, 0.0), Point::new(1.0, 0.0)).unwrap();
        assert!(p.cells.iter().all(|c| g.is_free(*c)));
        for w in p.cells.windows(2) {
            let dx = (w[0].0 as i64 - w[1].0 as i64).abs();
            let dy = (w[0].1 as i64 - w[1].1 as i64).abs();
            assert!(dx <= 1 && dy <= 1 && dx + dy > 0);
        }
        assert!(p.length() > 2.0);
    }

    #[test]
    fn plan_is_deterministic() {
        let wall = Segment2D::from_coords(0.0, -1.0, 0.0, 1.0).unwrap();
        let g = rasterize(&[wall], 0.15, &bounds(2.0), 0.05);
        let a = plan(&g, Point::new(-1.0, 0.1), Point::new(1.0, -0.3));
        let b = plan(&g, Point::new(-1.0, 0.1), Point::new(1.0, -0.3));
        assert_eq!(a, b);
    }

    #[test]
    fn nearest_free_respects_radius_and_mask() {
        let g = rasterize(&sealed_box(), 0.15, &bounds(2.0), 0.05);
        let target = Point::new(0.5, 1.0);
        let c = g.nearest_free(target, 0.5, None).unwrap();
        assert!(g.center(c).distance(target) <= 0.5);
        let start = g.cell_of(Point::new(-1.0, -1.0)).unwrap();
        let mask = g.reachable(start);
        let outside = g.nearest_free(target, 0.5, Some(&mask)).unwrap();
        assert!(g.center(outside).x < 0.5);
        assert!(g.nearest_free(Point::new(1.0, 1.0), 0.2, Some(&mask)).is_none());
    }

    #[test]
    fn follower_aligned_drives_straight() {
        let mut f = PathFollower::new(vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(2.0, 0.0)]);
        match f.follow(&Pose2D::default(), &NavConfig::default(), 0.22, 2.84) {
            Follow::Drive { v, omega } => {
                assert!(v > 0.0);
                assert!(omega.abs() < 1e-12);
            }
            Follow::Arrived => panic!("arrived too early"),
        }
    }

    #[test]
    fn follower_arrives_on_goal() {
        let mut f = PathFollower::new(vec![Point::new(1.0, 0.0)]);
        assert_eq!(
            f.follow(&Pose2D::new(0.99, 0.0, 0.0), &NavConfig::default(), 0.22, 2.84),
            Follow::Arrived
        );
    }

    #[test]
    fn follower_turns_in_place_for_goal_behind() {
        let mut f = PathFollower::new(vec![Point::new(-1.0, 0.0)]);
        match f.follow(&Pose2D::default(), &NavConfig::default(), 0.22, 2.84) {
            Follow::Drive { v, omega } => {
                assert_eq!(v, 0.0);
                assert!(omega.abs() > 0.0);
            }
            Follow::Arrived => panic!(),
        }
    }

    #[test]
    fn patrol_square() {
        let w = patrol_waypoints(4, 1.0, 1.0, &Pose2D::default(), 1);
        let expected = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)];
        assert_eq!(w.len(), 4);
        for (p, e) in w.iter().zip(expected) {
            assert!(p.distance(Point::new(e.0, e.1)) < 1e-12);
        }
    }

    #[test]
    fn patrol_triangle_two_rings() {
        let origin = Pose2D::new(1.0, -1.0, 0.3);
        let w = patrol_waypoints(3, 2.0, 0.5, &origin, 2);
        assert_eq!(w.len(), 6);
        for p in &w[..3] {
            assert!((p.distance(origin.position()) - 2.0).abs() < 1e-9);
        }
        for p in &w[3..] {
            assert!((p.distance(origin.position()) - 2.5).abs() < 1e-9);
        }
    }

    #[test]
    fn patrol_default_radii() {
        let w = patrol_waypoints(16, 1.5, 1.0, &Pose2D::default(), 3);
        for (k, r) in [1.5, 2.5, 3.5].iter().enumerate() {
            for p in &w[k * 16..(k + 1) * 16] {
                assert!((p.norm() - r).abs() < 1e-12);
            }
        }
        assert!(w[0].distance(Point::new(1.5, 0.0)) < 1e-12);
    }
}
