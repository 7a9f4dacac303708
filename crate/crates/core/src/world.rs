//! Ground-truth world and the simulated differential-drive robot: unicycle
//! kinematics with stop-at-contact collisions, a raycast LIDAR and a
//! field-of-view fiducial camera.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::fmt;

use rand_core::RngCore;
use rand_distr::{Distribution, Normal};

use crate::geometry::{normalize_angle, Point, Pose2D, Segment2D};
use crate::math;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub lidar_beams: usize,
    pub lidar_max_range: f64,
    /// Standard deviation of additive range noise, meters. Zero disables noise.
    pub lidar_noise_sigma: f64,
    pub camera_half_angle: f64,
    pub camera_range: f64,
    pub robot_radius: f64,
    pub v_max: f64,
    pub omega_max: f64,
    /// Seconds per simulation tick.
    pub dt: f64,
    /// Sensors are sampled every this many ticks.
    pub sensor_period: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            lidar_beams: 360,
            lidar_max_range: 3.5,
            lidar_noise_sigma: 0.0,
            camera_half_angle: math::to_radians(31.0),
            camera_range: 2.5,
            robot_radius: 0.15,
            v_max: 0.22,
            omega_max: 2.84,
            dt: 0.05,
            sensor_period: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    OutOfRange { field: &'static str, value: f64 },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::OutOfRange { field, value } => {
                write!(f, "{field} = {value} is out of range")
            }
        }
    }
}

impl core::error::Error for ConfigError {}

pub(crate) fn check(field: &'static str, value: f64, ok: bool) -> Result<(), ConfigError> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::OutOfRange { field, value })
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        check("lidar_beams", self.lidar_beams as f64, self.lidar_beams >= 4)?;
        check("lidar_max_range", self.lidar_max_range, self.lidar_max_range > 0.0)?;
        check("lidar_noise_sigma", self.lidar_noise_sigma, self.lidar_noise_sigma >= 0.0)?;
        check(
            "camera_half_angle",
            self.camera_half_angle,
            self.camera_half_angle > 0.0 && self.camera_half_angle <= math::PI,
        )?;
        check("camera_range", self.camera_range, self.camera_range > 0.0)?;
        check("robot_radius", self.robot_radius, self.robot_radius > 0.0)?;
        check("v_max", self.v_max, self.v_max > 0.0)?;
        check("omega_max", self.omega_max, self.omega_max > 0.0)?;
        check("dt", self.dt, self.dt > 0.0)?;
        check("sensor_period", self.sensor_period as f64, self.sensor_period >= 1)?;
        Ok(())
    }

    /// Angular spacing between LIDAR beams.
    pub fn beam_spacing(&self) -> f64 {
        math::TAU / self.lidar_beams as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub min: Point,
    pub max: Point,
}

impl Bounds {
    pub fn new(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Self {
        Bounds { min: Point::new(min_x, min_y), max: Point::new(max_x, max_y) }
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fiducial {
    pub id: u32,
    pub pose: Pose2D,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldSpec {
    pub walls: Vec<Segment2D>,
    pub fiducials: Vec<Fiducial>,
    pub robot_start: Pose2D,
    pub bounds: Bounds,
}

#[derive(Debug, Clone, PartialEq)]
pub enum WorldError {
    DuplicateFiducial(u32),
    StartOutOfBounds,
    StartInsideWall,
    EmptyBounds,
}

impl fmt::Display for WorldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WorldError::DuplicateFiducial(id) => write!(f, "fiducial id {id} appears twice"),
            WorldError::StartOutOfBounds => f.write_str("robot start lies outside the bounds"),
            WorldError::StartInsideWall => f.write_str("robot start overlaps a wall"),
            WorldError::EmptyBounds => f.write_str("bounds have no area"),
        }
    }
}

impl core::error::Error for WorldError {}

impl WorldSpec {
    pub fn validate(&self, robot_radius: f64) -> Result<(), WorldError> {
        if !(self.bounds.width() > 0.0 && self.bounds.height() > 0.0) {
            return Err(WorldError::EmptyBounds);
        }
        let mut ids = BTreeSet::new();
        for f in &self.fiducials {
            if !ids.insert(f.id) {
                return Err(WorldError::DuplicateFiducial(f.id));
            }
        }
        let start = self.robot_start.position();
        if !self.bounds.contains(start) {
            return Err(WorldError::StartOutOfBounds);
        }
        if self.walls.iter().any(|w| w.distance_to_point(start) < robot_radius) {
            return Err(WorldError::StartInsideWall);
        }
        Ok(())
    }

    /// Smallest distance from `p` to any wall.
    pub fn clearance(&self, p: Point) -> f64 {
        self.walls.iter().map(|w| w.distance_to_point(p)).fold(f64::INFINITY, f64::min)
    }

    /// Smallest distance from the straight move `a → b` to any wall.
    fn sweep_clearance(&self, a: Point, b: Point) -> f64 {
        self.walls
            .iter()
            .map(|w| crate::geometry::segment_distance(a, b, w.p1(), w.p2()))
            .fold(f64::INFINITY, f64::min)
    }

    /// First wall hit along a ray, if within `max_range`.
    pub fn raycast(&self, origin: Point, dir: Point, max_range: f64) -> Option<f64> {
        self.walls
            .iter()
            .filter_map(|w| w.ray_intersection(origin, dir))
            .filter(|d| *d <= max_range)
            .fold(None, |best, d| match best {
                Some(b) if b <= d => Some(b),
                _ => Some(d),
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobotState {
    pub pose: Pose2D,
    pub v: f64,
    pub omega: f64,
    pub seen_fiducials: BTreeSet<u32>,
    /// Set by [`step`] when the last commanded motion was cut short by a wall.
    pub collided: bool,
}

impl RobotState {
    pub fn at(pose: Pose2D) -> Self {
        RobotState { pose, v: 0.0, omega: 0.0, seen_fiducials: BTreeSet::new(), collided: false }
    }
}

/// Advances the robot one step under the unicycle model.
///
/// Commands are clamped to the configured limits. If the swept disc would
/// touch a wall the robot stops at the last clear position along the move,
/// `v` is zeroed and `collided` is raised; rotation still applies.
pub fn step(
    world: &WorldSpec,
    state: &RobotState,
    commanded: (f64, f64),
    dt: f64,
    config: &SimConfig,
) -> RobotState {
    let v = commanded.0.clamp(-config.v_max, config.v_max);
    let omega = commanded.1.clamp(-config.omega_max, config.omega_max);
    let pose = state.pose;
    let start = pose.position();
    let target = start + pose.heading() * (v * dt);
    let theta = normalize_angle(pose.theta + omega * dt);

    let mut next = state.clone();
    next.omega = omega;
    next.collided = false;

    if v == 0.0 || world.sweep_clearance(start, target) >= config.robot_radius {
        next.pose = Pose2D { x: target.x, y: target.y, theta };
        next.v = v;
        return next;
    }

    // Largest clear fraction of the move; clearance of the swept prefix is
    // non-increasing in the fraction so bisection is exact up to precision.
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    if world.sweep_clearance(start, start) < config.robot_radius {
        hi = 0.0;
    }
    for _ in 0..48 {
        if hi - lo < 1e-12 {
            break;
        }
        let mid = (lo + hi) / 2.0;
        if world.sweep_clearance(start, start.lerp(target, mid)) >= config.robot_radius {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let stop = start.lerp(target, lo);
    next.pose = Pose2D { x: stop.x, y: stop.y, theta };
    next.v = 0.0;
    next.collided = true;
    next
}

/// One LIDAR sweep; `ranges[i]` is `None` when beam `i` has no return.
#[derive(Debug, Clone, PartialEq)]
pub struct LidarScan {
    pub ranges: Vec<Option<f64>>,
    pub max_range: f64,
    /// Beam `i` points at `angle_increment · i` counter-clockwise from the heading.
    pub angle_increment: f64,
    pub timestamp: u64,
}

impl LidarScan {
    /// World-frame hit points paired with their beam index.
    pub fn points(&self, pose: &Pose2D) -> Vec<(usize, Point)> {
        self.ranges
            .iter()
            .enumerate()
            .filter_map(|(i, r)| {
                r.map(|r| {
                    let dir = Point::from_angle(pose.theta + self.angle_increment * i as f64);
                    (i, pose.position() + dir * r)
                })
            })
            .collect()
    }
}

/// Casts every beam against the ground-truth walls.
///
/// With a positive noise sigma each return gets zero-mean Gaussian noise and
/// is clamped back into `(0, max_range]`.
pub fn scan<R: RngCore + ?Sized>(
    world: &WorldSpec,
    pose: &Pose2D,
    config: &SimConfig,
    timestamp: u64,
    rng: &mut R,
) -> LidarScan {
    let inc = config.beam_spacing();
    let noise = if config.lidar_noise_sigma > 0.0 {
        Normal::new(0.0, config.lidar_noise_sigma).ok()
    } else {
        None
    };
    let origin = pose.position();
    let ranges = (0..config.lidar_beams)
        .map(|i| {
            let dir = Point::from_angle(pose.theta + inc * i as f64);
            world.raycast(origin, dir, config.lidar_max_range).map(|r| match &noise {
                Some(n) => (r + n.sample(rng)).clamp(1e-6, config.lidar_max_range),
                None => r,
            })
        })
        .collect();
    LidarScan { ranges, max_range: config.lidar_max_range, angle_increment: inc, timestamp }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiducialObservation {
    pub id: u32,
    pub pose: Pose2D,
}

/// Markers mounted on a wall sit on the wall itself; hits this close to the
/// marker do not count as occlusion.
const OCCLUSION_MARGIN: f64 = 0.05;

/// Whether the camera at `pose` can see the marker at `target`.
pub fn fiducial_visible(world: &WorldSpec, pose: &Pose2D, target: Point, config: &SimConfig) -> bool {
    let offset = target - pose.position();
    let dist = offset.norm();
    if dist > config.camera_range {
        return false;
    }
    if dist > 1e-9 {
        let bearing = normalize_angle(offset.angle() - pose.theta);
        if bearing.abs() > config.camera_half_angle {
            return false;
        }
        let dir = offset * (1.0 / dist);
        if let Some(hit) = world.raycast(pose.position(), dir, dist) {
            if hit < dist - OCCLUSION_MARGIN {
                return false;
            }
        }
    }
    true
}

/// Reports markers seen for the first time: in range, inside the camera's
/// half-angle, and unoccluded. Reported ids are added to `seen_fiducials`.
pub fn detect_fiducials(
    world: &WorldSpec,
    state: &mut RobotState,
    config: &SimConfig,
) -> Vec<FiducialObservation> {
    let pose = state.pose;
    let mut found = Vec::new();
    for f in &world.fiducials {
        if state.seen_fiducials.contains(&f.id) {
            continue;
        }
        if fiducial_visible(world, &pose, f.pose.position(), config) {
            found.push(FiducialObservation { id: f.id, pose: f.pose });
        }
    }
    for obs in &found {
        state.seen_fiducials.insert(obs.id);
    }
    found
}
