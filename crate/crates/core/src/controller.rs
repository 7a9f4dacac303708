//! The robot's control loop: one owner for the simulated robot, the map it
//! builds, the command queue, and the motion currently being executed.
//!
//! The loop is driven from outside. Callers feed bridge traffic in with
//! [`Controller::handle`], advance time with [`Controller::tick`], and
//! collect what should be published with [`Controller::drain_outbox`].

use alloc::string::String;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

use crate::command::{
    emit_feedback, Command, Feedback, FeedbackEvent, NotUnderstood, Phase, QueueState, UserChoice,
};
use crate::geometry::{DisplayPoint, Point, Pose2D};
use crate::language::{self, AbstractCommand, Grounded, GroundingContext, LanguageConfig, PointerEvent, View};
use crate::mapping::{self, MapConfig, PerceivedMap};
use crate::navigation::{self, Follow, NavConfig, NoPath, OccupancyGrid, PathFollower};
use crate::world::{self, ConfigError, FiducialObservation, RobotState, SimConfig, WorldError, WorldSpec};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ControllerConfig {
    pub sim: SimConfig,
    pub map: MapConfig,
    pub nav: NavConfig,
    pub language: LanguageConfig,
    /// Seeds the sensor noise generator.
    pub seed: u64,
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.sim.validate()?;
        self.map.validate()?;
        self.nav.validate()?;
        self.language.validate()
    }
}

/// Something that arrived on the command channel.
#[derive(Debug, Clone, PartialEq)]
pub enum Inbound {
    Command(Command),
    Utterance(String),
    Pointer { point: DisplayPoint, view: View },
    UserChoice(UserChoice),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Odometry {
    pub pose: Pose2D,
    pub v: f64,
    pub omega: f64,
}

/// Something to publish.
#[derive(Debug, Clone, PartialEq)]
pub enum Outbound {
    Odom(Odometry),
    /// The tidied map.
    Map(PerceivedMap),
    /// Every fiducial reported so far.
    Fiducials(Vec<FiducialObservation>),
    Feedback(Feedback),
}

/// Repeated stalls on one goal before it is treated as stuck.
const MAX_STALL_REPLANS: u32 = 3;
/// Progress smaller than this does not reset the stall counter.
const PROGRESS_EPS: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
struct Drive {
    follower: PathFollower,
    /// Ticks spent moving toward this goal.
    moved: u64,
    best: f64,
    since_best: u64,
    stall_replans: u32,
}

impl Drive {
    fn new(points: Vec<Point>) -> Self {
        Drive {
            follower: PathFollower::new(points),
            moved: 0,
            best: f64::INFINITY,
            since_best: 0,
            stall_replans: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Patrol {
    origin: Pose2D,
    sides: u32,
    radius: f64,
    increment: f64,
    ring: usize,
    /// `sides` is the leg that closes the ring on vertex 0.
    vertex: u32,
    unreachable: u32,
    leg: Option<(Point, Drive)>,
}

impl Patrol {
    fn vertex_point(&self) -> Point {
        let ring = navigation::patrol_ring(self.sides, self.radius + self.ring as f64 * self.increment, &self.origin);
        ring[(self.vertex % self.sides) as usize]
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Motion {
    Idle,
    Drive(Drive),
    /// Signed radians still to turn.
    Rotate(f64),
    Patrol(Patrol),
}

enum Step {
    Go(f64, f64),
    Done,
    Failed,
    Stranded,
}

pub struct Controller {
    config: ControllerConfig,
    world: WorldSpec,
    robot: RobotState,
    rng: ChaCha8Rng,
    tick: u64,
    raw_map: PerceivedMap,
    grid: Option<(u64, OccupancyGrid)>,
    fiducials: Vec<FiducialObservation>,
    queue: QueueState,
    motion: Motion,
    /// Queue id of the goal `motion` belongs to.
    active: Option<u64>,
    pointer: Option<PointerEvent>,
    outbox: Vec<Outbound>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ControllerError {
    Config(ConfigError),
    World(WorldError),
}

impl core::fmt::Display for ControllerError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ControllerError::Config(e) => write!(f, "invalid configuration: {e}"),
            ControllerError::World(e) => write!(f, "invalid world: {e}"),
        }
    }
}

impl core::error::Error for ControllerError {}

impl Controller {
    pub fn new(world: WorldSpec, config: ControllerConfig) -> Result<Self, ControllerError> {
        let start = RobotState::at(world.robot_start);
        Self::with_state(world, config, start, PerceivedMap::default(), Vec::new())
    }

    /// Picks up where an earlier robot process left off: its last pose, map
    /// and reported fiducials, as read back from the bridge.
    pub fn resume(
        world: WorldSpec,
        config: ControllerConfig,
        pose: Pose2D,
        map: PerceivedMap,
        fiducials: Vec<FiducialObservation>,
    ) -> Result<Self, ControllerError> {
        let mut robot = RobotState::at(pose);
        robot.seen_fiducials = fiducials.iter().map(|f| f.id).collect();
        Self::with_state(world, config, robot, map, fiducials)
    }

    fn with_state(
        world: WorldSpec,
        config: ControllerConfig,
        robot: RobotState,
        raw_map: PerceivedMap,
        fiducials: Vec<FiducialObservation>,
    ) -> Result<Self, ControllerError> {
        config.validate().map_err(ControllerError::Config)?;
        world.validate(config.sim.robot_radius).map_err(ControllerError::World)?;
        Ok(Controller {
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            config,
            world,
            robot,
            tick: 0,
            raw_map,
            grid: None,
            fiducials,
            queue: QueueState::new(),
            motion: Motion::Idle,
            active: None,
            pointer: None,
            outbox: Vec::new(),
        })
    }

    pub fn config(&self) -> &ControllerConfig {
        &self.config
    }

    pub fn world(&self) -> &WorldSpec {
        &self.world
    }

    /// Ground truth may change under the robot (a door closes, a box is
    /// dropped). The robot only learns of it through its sensors.
    pub fn world_mut(&mut self) -> &mut WorldSpec {
        &mut self.world
    }

    pub fn robot(&self) -> &RobotState {
        &self.robot
    }

    pub fn pose(&self) -> Pose2D {
        self.robot.pose
    }

    pub fn now(&self) -> u64 {
        self.tick
    }

    pub fn queue(&self) -> &QueueState {
        &self.queue
    }

    /// The merged map used for planning, before tidying.
    pub fn raw_map(&self) -> &PerceivedMap {
        &self.raw_map
    }

    pub fn published_map(&self) -> PerceivedMap {
        mapping::tidy(&self.raw_map, &self.config.map)
    }

    pub fn fiducials(&self) -> &[FiducialObservation] {
        &self.fiducials
    }

    pub fn drain_outbox(&mut self) -> Vec<Outbound> {
        core::mem::take(&mut self.outbox)
    }

    /// The initial look around: one scan, then the map, fiducials and odometry
    /// are published before any command is taken.
    pub fn startup(&mut self) {
        self.sense(true);
        self.emit(&[FeedbackEvent::Waiting]);
    }

    fn emit(&mut self, events: &[FeedbackEvent]) {
        for e in events {
            self.outbox.push(Outbound::Feedback(emit_feedback(e, self.tick)));
        }
    }

    fn odometry(&self) -> Odometry {
        Odometry { pose: self.robot.pose, v: self.robot.v, omega: self.robot.omega }
    }

    pub fn handle(&mut self, inbound: Inbound) {
        match inbound {
            Inbound::Command(c) => self.apply(c),
            Inbound::UserChoice(choice) => {
                let events = self.queue.resolve_user_choice(choice, self.robot.pose);
                self.emit(&events);
            }
            Inbound::Pointer { point, view } => {
                // most recent wins
                self.pointer = Some(PointerEvent { point, timestamp: self.tick, view });
            }
            Inbound::Utterance(text) => self.utterance(&text),
        }
    }

    fn deixis_ticks(&self) -> u64 {
        let ticks = self.config.language.deixis_window / self.config.sim.dt;
        crate::math::round(ticks) as u64
    }

    fn utterance(&mut self, text: &str) {
        let parsed = match language::parse(text) {
            Ok(p) => p,
            Err(_) => return self.emit(&[FeedbackEvent::NotUnderstood(NotUnderstood::Parse)]),
        };
        let awaiting = self.queue.current().is_some_and(|c| c.phase == Phase::AwaitingUser);
        // while the robot asks "keep going or go back", a spoken "go back"
        // is the answer to that question
        if awaiting && parsed == AbstractCommand::Command(Command::GoBack) {
            return self.handle(Inbound::UserChoice(UserChoice::GoBack));
        }
        let ctx = GroundingContext::new(
            self.robot.pose,
            self.fiducials.clone(),
            self.pointer,
            self.tick,
            self.deixis_ticks(),
        );
        match language::ground(&parsed, &ctx, &self.config.language) {
            Ok(Grounded::Command(c)) => self.apply(c),
            Ok(Grounded::Choice(choice)) => self.handle(Inbound::UserChoice(choice)),
            Err(reason) => self.emit(&[FeedbackEvent::NotUnderstood(reason)]),
        }
    }

    fn apply(&mut self, c: Command) {
        let pose = self.robot.pose;
        let result = if c.is_movement() { self.queue.enqueue(c, pose) } else { self.queue.apply_flow(c, pose) };
        match result {
            Ok(events) => self.emit(&events),
            Err(_) => self.emit(&[FeedbackEvent::NotUnderstood(NotUnderstood::Parse)]),
        }
    }

    fn grid(&mut self) -> &OccupancyGrid {
        let version = self.raw_map.version;
        if self.grid.as_ref().is_none_or(|(v, _)| *v != version) {
            let g = navigation::rasterize(
                &self.raw_map.segments,
                self.config.sim.robot_radius + self.config.nav.inflation_margin,
                &self.world.bounds,
                self.config.nav.resolution,
            );
            self.grid = Some((version, g));
        }
        &self.grid.as_ref().expect("grid just built").1
    }

    /// Plans from the robot to `target`. A blocked start or goal is moved to
    /// the nearest usable free cell within the snap radius.
    fn plan_to(&mut self, target: Point) -> Result<Vec<Point>, NoPath> {
        let pos = self.robot.pose.position();
        let snap = self.config.nav.goal_snap_radius;
        let grid = self.grid();
        let start = match grid.cell_of(pos) {
            Some(c) if grid.is_free(c) => c,
            _ => grid.nearest_free(pos, snap, None).ok_or(NoPath::StartBlocked)?,
        };
        let reachable = grid.reachable(start);
        let exact = grid.cell_of(target).filter(|c| reachable[c.1 * grid.width() + c.0]);
        let goal = match exact {
            Some(c) => c,
            None => grid.nearest_free(target, snap, Some(&reachable)).ok_or(NoPath::Disconnected)?,
        };
        let path = navigation::plan_cells(grid, start, goal)?;
        let mut points = path.waypoints;
        if exact.is_some() {
            *points.last_mut().expect("paths are never empty") = target;
        }
        Ok(points)
    }

    /// Makes `motion` match the queue's current goal, failing goals that
    /// cannot even be planned.
    fn sync(&mut self) {
        loop {
            let Some(cur) = self.queue.current().copied() else {
                self.motion = Motion::Idle;
                self.active = None;
                return;
            };
            if self.active == Some(cur.id) {
                return;
            }
            self.active = Some(cur.id);
            self.motion = match cur.command {
                Command::Forward { .. } | Command::GoTo { .. } => {
                    let target = cur.target.expect("go-to style goals have a target");
                    match self.plan_to(target) {
                        Ok(points) => Motion::Drive(Drive::new(points)),
                        Err(_) => {
                            let events = self.queue.fail_current(self.robot.pose);
                            self.emit(&events);
                            continue;
                        }
                    }
                }
                Command::Turn { direction, degrees } => Motion::Rotate(direction.sign() * crate::math::to_radians(degrees)),
                Command::Patrol { sides, radius, increment } => Motion::Patrol(Patrol {
                    origin: cur.start_pose,
                    sides,
                    radius,
                    increment,
                    ring: 0,
                    vertex: 0,
                    unreachable: 0,
                    leg: None,
                }),
                _ => Motion::Idle,
            };
            return;
        }
    }

    fn drive_step(&mut self, drive: &mut Drive) -> Step {
        let nav = self.config.nav.clone();
        let pose = self.robot.pose;
        let remaining = drive.follower.goal().distance(pose.position());
        if remaining < drive.best - PROGRESS_EPS {
            drive.best = remaining;
            drive.since_best = 0;
        } else {
            drive.since_best += 1;
        }
        if drive.since_best >= nav.stall_ticks {
            drive.stall_replans += 1;
            if drive.stall_replans > MAX_STALL_REPLANS {
                return if drive.moved > 0 { Step::Stranded } else { Step::Failed };
            }
            let goal = drive.follower.goal();
            match self.plan_to(goal) {
                Ok(points) => {
                    drive.follower = PathFollower::new(points);
                    drive.best = remaining;
                    drive.since_best = 0;
                }
                Err(_) => return if drive.moved > 0 { Step::Stranded } else { Step::Failed },
            }
        }
        match drive.follower.follow(&pose, &nav, self.config.sim.v_max, self.config.sim.omega_max) {
            Follow::Arrived => Step::Done,
            Follow::Drive { v, omega } => {
                drive.moved += 1;
                Step::Go(v, omega)
            }
        }
    }

    /// Next leg of a patrol; `None` once the patrol is over.
    fn patrol_step(&mut self, patrol: &mut Patrol) -> Option<(f64, f64)> {
        loop {
            if patrol.vertex > patrol.sides {
                if patrol.unreachable >= patrol.sides {
                    return None;
                }
                patrol.ring += 1;
                patrol.vertex = 0;
                patrol.unreachable = 0;
            }
            let Some((target, mut leg)) = patrol.leg.take() else {
                let target = patrol.vertex_point();
                self.emit(&[FeedbackEvent::LookingForPath(target)]);
                match self.plan_to(target) {
                    Ok(points) => patrol.leg = Some((target, Drive::new(points))),
                    Err(_) => {
                        self.emit(&[FeedbackEvent::Unable(Some(target))]);
                        if patrol.vertex < patrol.sides {
                            patrol.unreachable += 1;
                        }
                        patrol.vertex += 1;
                    }
                }
                continue;
            };
            match self.drive_step(&mut leg) {
                Step::Go(v, w) => {
                    patrol.leg = Some((target, leg));
                    return Some((v, w));
                }
                Step::Done => {
                    self.emit(&[FeedbackEvent::Navigated(target)]);
                    patrol.vertex += 1;
                }
                Step::Failed | Step::Stranded => {
                    // a patrol skips vertices it cannot get to
                    self.emit(&[FeedbackEvent::Unable(Some(target))]);
                    if patrol.vertex < patrol.sides {
                        patrol.unreachable += 1;
                    }
                    patrol.vertex += 1;
                }
            }
        }
    }

    fn finish(&mut self, step: Step) {
        let pose = self.robot.pose;
        let events = match step {
            Step::Done => self.queue.complete_current(pose),
            Step::Failed => self.queue.fail_current(pose),
            Step::Stranded => {
                self.motion = Motion::Idle;
                self.queue.strand_current()
            }
            Step::Go(..) => return,
        };
        self.emit(&events);
    }

    /// Velocity for this tick from the current motion.
    fn command_velocity(&mut self) -> (f64, f64) {
        let executing = self.queue.current().is_some_and(|c| c.phase == Phase::Executing);
        if !executing {
            return (0.0, 0.0);
        }
        let mut motion = core::mem::replace(&mut self.motion, Motion::Idle);
        let step = match &mut motion {
            Motion::Idle => Step::Go(0.0, 0.0),
            Motion::Drive(drive) => self.drive_step(drive),
            Motion::Rotate(remaining) => {
                if remaining.abs() < 1e-9 {
                    Step::Done
                } else {
                    let dt = self.config.sim.dt;
                    let w = (*remaining / dt).clamp(-self.config.sim.omega_max, self.config.sim.omega_max);
                    *remaining -= w * dt;
                    Step::Go(0.0, w)
                }
            }
            Motion::Patrol(patrol) => match self.patrol_step(patrol) {
                Some((v, w)) => Step::Go(v, w),
                None => Step::Done,
            },
        };
        self.motion = motion;
        match step {
            Step::Go(v, w) => (v, w),
            other => {
                self.finish(other);
                (0.0, 0.0)
            }
        }
    }

    /// Advances the simulation by one tick.
    pub fn tick(&mut self) {
        self.sync();
        let (v, w) = self.command_velocity();
        // a finished goal may have promoted the next one
        self.sync();
        let was_moving = self.robot.v != 0.0 || self.robot.omega != 0.0;
        self.robot = world::step(&self.world, &self.robot, (v, w), self.config.sim.dt, &self.config.sim);
        self.tick += 1;
        if self.tick.is_multiple_of(self.config.sim.sensor_period) {
            self.sense(false);
            self.check_path();
        } else if was_moving && self.robot.v == 0.0 && self.robot.omega == 0.0 {
            // the resting pose is always on the bridge, whatever the sensor phase
            self.outbox.push(Outbound::Odom(self.odometry()));
        }
    }

    /// Scan, map, look for fiducials, report odometry.
    fn sense(&mut self, initial: bool) {
        let pose = self.robot.pose;
        let scan = world::scan(&self.world, &pose, &self.config.sim, self.tick, &mut self.rng);
        let segments = mapping::extract_segments(&scan, &pose, &self.config.map);
        let merged = mapping::merge_into_map(&self.raw_map, &segments, &self.config.map);
        let changed = merged.version != self.raw_map.version;
        self.raw_map = merged;
        if changed || initial {
            self.outbox.push(Outbound::Map(self.published_map()));
        }
        let found = world::detect_fiducials(&self.world, &mut self.robot, &self.config.sim);
        if !found.is_empty() || initial {
            self.fiducials.extend(found);
            self.outbox.push(Outbound::Fiducials(self.fiducials.clone()));
        }
        self.outbox.push(Outbound::Odom(self.odometry()));
    }

    /// Replans when the map now blocks what is left of the current path.
    fn check_path(&mut self) {
        let mut motion = core::mem::replace(&mut self.motion, Motion::Idle);
        let outcome = match &mut motion {
            Motion::Drive(drive) => self.revise(drive),
            Motion::Patrol(patrol) => {
                if let Some((target, leg)) = patrol.leg.as_mut() {
                    let target = *target;
                    if self.revise(leg).is_some() {
                        patrol.leg = None;
                        self.emit(&[FeedbackEvent::Unable(Some(target))]);
                        if patrol.vertex < patrol.sides {
                            patrol.unreachable += 1;
                        }
                        patrol.vertex += 1;
                    }
                }
                None
            }
            _ => None,
        };
        self.motion = motion;
        if let Some(step) = outcome {
            self.finish(step);
        }
    }

    fn revise(&mut self, drive: &mut Drive) -> Option<Step> {
        let blocked = {
            let grid = self.grid();
            navigation::path_blocked(grid, drive.follower.remaining())
        };
        if !blocked {
            return None;
        }
        let goal = drive.follower.goal();
        match self.plan_to(goal) {
            Ok(points) => {
                drive.follower = PathFollower::new(points);
                None
            }
            Err(_) if drive.moved > 0 => Some(Step::Stranded),
            Err(_) => Some(Step::Failed),
        }
    }
}
