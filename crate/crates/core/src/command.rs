//! The robot's command vocabulary, its FIFO execution queue with flow
//! control, and the operator-facing feedback catalog.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::geometry::{Point, Pose2D};
use crate::math;

pub const DEFAULT_FORWARD: f64 = 1.0;
pub const DEFAULT_TURN_DEGREES: f64 = 90.0;
pub const DEFAULT_PATROL_SIDES: u32 = 16;
pub const DEFAULT_PATROL_RADIUS: f64 = 1.5;
pub const DEFAULT_PATROL_INCREMENT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TurnDirection {
    /// Counter-clockwise.
    Left,
    /// Clockwise.
    Right,
}

impl TurnDirection {
    pub fn as_str(self) -> &'static str {
        match self {
            TurnDirection::Left => "left",
            TurnDirection::Right => "right",
        }
    }

    /// +1 for counter-clockwise.
    pub fn sign(self) -> f64 {
        match self {
            TurnDirection::Left => 1.0,
            TurnDirection::Right => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Command {
    Forward { distance: f64 },
    GoTo { x: f64, y: f64 },
    Turn { direction: TurnDirection, degrees: f64 },
    Patrol { sides: u32, radius: f64, increment: f64 },
    Stop,
    Continue,
    Cancel,
    CancelAll,
    GoBack,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CommandError {
    NonPositiveDistance(f64),
    TurnOutOfRange(f64),
    TooFewSides(u32),
    NonPositiveRadius(f64),
    NonPositiveIncrement(f64),
    NonFinite,
    NotAMovement,
    NotFlowControl,
}

impl fmt::Display for CommandError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CommandError::NonPositiveDistance(d) => write!(f, "forward distance {d} must be positive"),
            CommandError::TurnOutOfRange(d) => write!(f, "turn of {d} degrees is outside (0, 360]"),
            CommandError::TooFewSides(s) => write!(f, "patrol needs at least 3 sides, got {s}"),
            CommandError::NonPositiveRadius(r) => write!(f, "patrol radius {r} must be positive"),
            CommandError::NonPositiveIncrement(i) => write!(f, "patrol increment {i} must be positive"),
            CommandError::NonFinite => f.write_str("command argument is not finite"),
            CommandError::NotAMovement => f.write_str("not a movement command"),
            CommandError::NotFlowControl => f.write_str("not a flow-control command"),
        }
    }
}

impl core::error::Error for CommandError {}

impl Command {
    pub fn forward() -> Self {
        Command::Forward { distance: DEFAULT_FORWARD }
    }

    pub fn turn(direction: TurnDirection) -> Self {
        Command::Turn { direction, degrees: DEFAULT_TURN_DEGREES }
    }

    pub fn patrol() -> Self {
        Command::Patrol {
            sides: DEFAULT_PATROL_SIDES,
            radius: DEFAULT_PATROL_RADIUS,
            increment: DEFAULT_PATROL_INCREMENT,
        }
    }

    pub fn is_movement(&self) -> bool {
        matches!(
            self,
            Command::Forward { .. } | Command::GoTo { .. } | Command::Turn { .. } | Command::Patrol { .. }
        )
    }

    pub fn validate(&self) -> Result<(), CommandError> {
        match *self {
            Command::Forward { distance } => {
                if !distance.is_finite() {
                    Err(CommandError::NonFinite)
                } else if distance <= 0.0 {
                    Err(CommandError::NonPositiveDistance(distance))
                } else {
                    Ok(())
                }
            }
            Command::GoTo { x, y } => {
                if x.is_finite() && y.is_finite() {
                    Ok(())
                } else {
                    Err(CommandError::NonFinite)
                }
            }
            Command::Turn { degrees, .. } => {
                if !degrees.is_finite() {
                    Err(CommandError::NonFinite)
                } else if degrees <= 0.0 || degrees > 360.0 {
                    Err(CommandError::TurnOutOfRange(degrees))
                } else {
                    Ok(())
                }
            }
            Command::Patrol { sides, radius, increment } => {
                if !radius.is_finite() || !increment.is_finite() {
                    Err(CommandError::NonFinite)
                } else if sides < 3 {
                    Err(CommandError::TooFewSides(sides))
                } else if radius <= 0.0 {
                    Err(CommandError::NonPositiveRadius(radius))
                } else if increment <= 0.0 {
                    Err(CommandError::NonPositiveIncrement(increment))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Executing,
    Paused,
    AwaitingUser,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UserChoice {
    KeepGoing,
    GoBack,
}

impl UserChoice {
    pub fn as_str(self) -> &'static str {
        match self {
            UserChoice::KeepGoing => "keep_going",
            UserChoice::GoBack => "go_back",
        }
    }
}

/// Where the current movement came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    /// The n-th movement accepted by [`QueueState::enqueue`], counting from 0.
    Queued(u64),
    /// A return trip created by "go back".
    Return,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Current {
    /// Changes on every promotion, so executors can tell goals apart.
    pub id: u64,
    pub origin: Origin,
    pub command: Command,
    pub phase: Phase,
    pub start_pose: Pose2D,
    /// Destination for go-to style movements, fixed at promotion.
    pub target: Option<Point>,
}

/// Why a command was not understood.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NotUnderstood {
    Parse,
    NoPointer,
    OrdinalOutOfRange,
    NoFiducialNearPointer,
    NoBearing,
}

impl NotUnderstood {
    pub fn code(self) -> FeedbackCode {
        match self {
            NotUnderstood::Parse => FeedbackCode::NotUnderstood,
            NotUnderstood::NoPointer => FeedbackCode::NoPointer,
            NotUnderstood::OrdinalOutOfRange => FeedbackCode::OrdinalOutOfRange,
            NotUnderstood::NoFiducialNearPointer => FeedbackCode::NoFiducialNearPointer,
            NotUnderstood::NoBearing => FeedbackCode::NoBearing,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FeedbackEvent {
    LookingForPath(Point),
    Navigated(Point),
    Unable(Option<Point>),
    Paused,
    Canceled,
    CanceledAll,
    Restarting,
    Waiting,
    Stranded,
    UserInputRequired,
    NotUnderstood(NotUnderstood),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum FeedbackCode {
    LookingForPath,
    Navigated,
    Unable,
    Paused,
    Canceled,
    CanceledAll,
    Restarting,
    Waiting,
    Stranded,
    UserInputRequired,
    NotUnderstood,
    NoPointer,
    OrdinalOutOfRange,
    NoFiducialNearPointer,
    NoBearing,
}

impl FeedbackCode {
    pub const ALL: [FeedbackCode; 15] = [
        FeedbackCode::LookingForPath,
        FeedbackCode::Navigated,
        FeedbackCode::Unable,
        FeedbackCode::Paused,
        FeedbackCode::Canceled,
        FeedbackCode::CanceledAll,
        FeedbackCode::Restarting,
        FeedbackCode::Waiting,
        FeedbackCode::Stranded,
        FeedbackCode::UserInputRequired,
        FeedbackCode::NotUnderstood,
        FeedbackCode::NoPointer,
        FeedbackCode::OrdinalOutOfRange,
        FeedbackCode::NoFiducialNearPointer,
        FeedbackCode::NoBearing,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FeedbackCode::LookingForPath => "looking_for_path",
            FeedbackCode::Navigated => "navigated",
            FeedbackCode::Unable => "unable",
            FeedbackCode::Paused => "paused",
            FeedbackCode::Canceled => "canceled",
            FeedbackCode::CanceledAll => "canceled_all",
            FeedbackCode::Restarting => "restarting",
            FeedbackCode::Waiting => "waiting",
            FeedbackCode::Stranded => "stranded",
            FeedbackCode::UserInputRequired => "user_input_required",
            FeedbackCode::NotUnderstood => "not_understood",
            FeedbackCode::NoPointer => "no_pointer",
            FeedbackCode::OrdinalOutOfRange => "ordinal_out_of_range",
            FeedbackCode::NoFiducialNearPointer => "no_fiducial_near_pointer",
            FeedbackCode::NoBearing => "no_bearing",
        }
    }

    pub fn parse(s: &str) -> Option<FeedbackCode> {
        FeedbackCode::ALL.into_iter().find(|c| c.as_str() == s)
    }
}

pub const MSG_PAUSED: &str = "paused current goal";
pub const MSG_CANCELED: &str = "canceled goal";
pub const MSG_CANCELED_ALL: &str = "canceled all goals";
pub const MSG_RESTARTING: &str = "restarting current goal";
pub const MSG_WAITING: &str = "waiting for commands";
pub const MSG_UNABLE: &str = "unable to complete goal";
pub const MSG_STRANDED: &str = "moved from expected path and failed to reach goal";
pub const MSG_USER_INPUT: &str = "user input is required: keep going OR go back";
pub const MSG_NOT_UNDERSTOOD: &str = "I didn't understand";

/// Whether `message` is one of the strings the robot may ever publish.
pub fn is_catalog_message(message: &str) -> bool {
    const FIXED: [&str; 9] = [
        MSG_PAUSED,
        MSG_CANCELED,
        MSG_CANCELED_ALL,
        MSG_RESTARTING,
        MSG_WAITING,
        MSG_UNABLE,
        MSG_STRANDED,
        MSG_USER_INPUT,
        MSG_NOT_UNDERSTOOD,
    ];
    if FIXED.contains(&message) {
        return true;
    }
    ["looking for path to ", "successfully navigated to "].iter().any(|prefix| {
        message.strip_prefix(prefix).is_some_and(is_coordinate_pair)
    })
}

/// Matches `(x, y)` with one-decimal numbers.
fn is_coordinate_pair(s: &str) -> bool {
    let Some(inner) = s.strip_prefix('(').and_then(|r| r.strip_suffix(')')) else {
        return false;
    };
    let Some((a, b)) = inner.split_once(", ") else {
        return false;
    };
    let one_decimal = |n: &str| {
        let n = n.strip_prefix('-').unwrap_or(n);
        match n.split_once('.') {
            Some((int, frac)) => {
                !int.is_empty()
                    && int.bytes().all(|c| c.is_ascii_digit())
                    && frac.len() == 1
                    && frac.bytes().all(|c| c.is_ascii_digit())
            }
            None => false,
        }
    };
    one_decimal(a) && one_decimal(b)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Feedback {
    pub code: FeedbackCode,
    pub message: String,
    pub params: Option<Point>,
    /// Simulation tick.
    pub timestamp: u64,
}

fn format_coord(v: f64) -> String {
    // avoid "-0.0" for values that round to zero
    let r = math::round(v * 10.0) / 10.0;
    let r = if r == 0.0 { 0.0 } else { r };
    format!("{r:.1}")
}

fn format_pair(p: Point) -> String {
    format!("({}, {})", format_coord(p.x), format_coord(p.y))
}

/// Renders an event as its catalog message.
pub fn emit_feedback(event: &FeedbackEvent, timestamp: u64) -> Feedback {
    let (code, message, params) = match *event {
        FeedbackEvent::LookingForPath(p) => {
            (FeedbackCode::LookingForPath, format!("looking for path to {}", format_pair(p)), Some(p))
        }
        FeedbackEvent::Navigated(p) => {
            (FeedbackCode::Navigated, format!("successfully navigated to {}", format_pair(p)), Some(p))
        }
        FeedbackEvent::Unable(p) => (FeedbackCode::Unable, String::from(MSG_UNABLE), p),
        FeedbackEvent::Paused => (FeedbackCode::Paused, String::from(MSG_PAUSED), None),
        FeedbackEvent::Canceled => (FeedbackCode::Canceled, String::from(MSG_CANCELED), None),
        FeedbackEvent::CanceledAll => (FeedbackCode::CanceledAll, String::from(MSG_CANCELED_ALL), None),
        FeedbackEvent::Restarting => (FeedbackCode::Restarting, String::from(MSG_RESTARTING), None),
        FeedbackEvent::Waiting => (FeedbackCode::Waiting, String::from(MSG_WAITING), None),
        FeedbackEvent::Stranded => (FeedbackCode::Stranded, String::from(MSG_STRANDED), None),
        FeedbackEvent::UserInputRequired => {
            (FeedbackCode::UserInputRequired, String::from(MSG_USER_INPUT), None)
        }
        FeedbackEvent::NotUnderstood(reason) => (reason.code(), String::from(MSG_NOT_UNDERSTOOD), None),
    };
    Feedback { code, message, params, timestamp }
}

/// FIFO of pending movements plus the one being executed.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QueueState {
    queue: VecDeque<(u64, Command)>,
    current: Option<Current>,
    /// Start pose of the most recently promoted movement.
    history: Option<Pose2D>,
    next_queued: u64,
    next_id: u64,
}

impl QueueState {
    pub fn new() -> Self {
        QueueState::default()
    }

    pub fn current(&self) -> Option<&Current> {
        self.current.as_ref()
    }

    pub fn pending(&self) -> impl Iterator<Item = &Command> {
        self.queue.iter().map(|(_, c)| c)
    }

    pub fn pending_len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_idle(&self) -> bool {
        self.current.is_none() && self.queue.is_empty()
    }

    pub fn history(&self) -> Option<Pose2D> {
        self.history
    }

    fn target_for(command: &Command, pose: &Pose2D) -> Option<Point> {
        match *command {
            Command::GoTo { x, y } => Some(Point::new(x, y)),
            Command::Forward { distance } => Some(pose.position() + pose.heading() * distance),
            _ => None,
        }
    }

    fn install(&mut self, origin: Origin, command: Command, pose: Pose2D, events: &mut Vec<FeedbackEvent>) {
        let target = Self::target_for(&command, &pose);
        self.next_id += 1;
        self.current = Some(Current {
            id: self.next_id,
            origin,
            command,
            phase: Phase::Executing,
            start_pose: pose,
            target,
        });
        self.history = Some(pose);
        if let Some(t) = target {
            events.push(FeedbackEvent::LookingForPath(t));
        }
    }

    /// Promotes the next queued movement, or announces idleness.
    fn advance(&mut self, pose: Pose2D, events: &mut Vec<FeedbackEvent>) {
        self.current = None;
        match self.queue.pop_front() {
            Some((n, c)) => self.install(Origin::Queued(n), c, pose, events),
            None => events.push(FeedbackEvent::Waiting),
        }
    }

    /// Appends a movement; starts it right away if nothing is running.
    /// A movement arriving while the robot waits for a keep-going/go-back
    /// answer counts as "keep going".
    pub fn enqueue(&mut self, command: Command, pose: Pose2D) -> Result<Vec<FeedbackEvent>, CommandError> {
        if !command.is_movement() {
            return Err(CommandError::NotAMovement);
        }
        command.validate()?;
        let n = self.next_queued;
        self.next_queued += 1;
        self.queue.push_back((n, command));
        let mut events = Vec::new();
        match self.current.map(|c| c.phase) {
            None => self.advance(pose, &mut events),
            Some(Phase::AwaitingUser) => self.advance(pose, &mut events),
            Some(_) => {}
        }
        Ok(events)
    }

    /// Stop, continue, cancel, cancel all, go back.
    pub fn apply_flow(&mut self, command: Command, pose: Pose2D) -> Result<Vec<FeedbackEvent>, CommandError> {
        let mut events = Vec::new();
        match command {
            Command::Stop => {
                if let Some(c) = self.current.as_mut().filter(|c| c.phase == Phase::Executing) {
                    c.phase = Phase::Paused;
                    events.push(FeedbackEvent::Paused);
                }
            }
            Command::Continue => {
                if let Some(c) = self.current.as_mut().filter(|c| c.phase == Phase::Paused) {
                    c.phase = Phase::Executing;
                    events.push(FeedbackEvent::Restarting);
                }
            }
            Command::Cancel => {
                if self.current.is_some() {
                    events.push(FeedbackEvent::Canceled);
                    self.advance(pose, &mut events);
                }
            }
            Command::CancelAll => {
                self.queue.clear();
                self.current = None;
                events.push(FeedbackEvent::CanceledAll);
                events.push(FeedbackEvent::Waiting);
            }
            Command::GoBack => {
                let back_to = self.current.map(|c| c.start_pose).or(self.history);
                if let Some(p) = back_to {
                    self.queue.clear();
                    let go = Command::GoTo { x: p.x, y: p.y };
                    self.install(Origin::Return, go, pose, &mut events);
                }
            }
            _ => return Err(CommandError::NotFlowControl),
        }
        Ok(events)
    }

    /// Answers a pending keep-going/go-back question; ignored otherwise.
    pub fn resolve_user_choice(&mut self, choice: UserChoice, pose: Pose2D) -> Vec<FeedbackEvent> {
        let mut events = Vec::new();
        let Some(cur) = self.current.filter(|c| c.phase == Phase::AwaitingUser) else {
            return events;
        };
        match choice {
            UserChoice::KeepGoing => self.advance(pose, &mut events),
            UserChoice::GoBack => {
                let go = Command::GoTo { x: cur.start_pose.x, y: cur.start_pose.y };
                self.install(Origin::Return, go, pose, &mut events);
            }
        }
        events
    }

    /// The current movement finished.
    pub fn complete_current(&mut self, pose: Pose2D) -> Vec<FeedbackEvent> {
        let mut events = Vec::new();
        if let Some(c) = self.current {
            events.push(FeedbackEvent::Navigated(c.target.unwrap_or(pose.position())));
            self.advance(pose, &mut events);
        }
        events
    }

    /// The current movement could not even start.
    pub fn fail_current(&mut self, pose: Pose2D) -> Vec<FeedbackEvent> {
        let mut events = Vec::new();
        if let Some(c) = self.current {
            events.push(FeedbackEvent::Unable(c.target));
            self.advance(pose, &mut events);
        }
        events
    }

    /// The current movement got stuck after it began; ask the operator.
    pub fn strand_current(&mut self) -> Vec<FeedbackEvent> {
        let mut events = Vec::new();
        if let Some(c) = self.current.as_mut().filter(|c| c.phase != Phase::AwaitingUser) {
            c.phase = Phase::AwaitingUser;
            events.push(FeedbackEvent::Stranded);
            events.push(FeedbackEvent::UserInputRequired);
        }
        events
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn origin() -> Pose2D {
        Pose2D::default()
    }

    fn messages(events: &[FeedbackEvent]) -> Vec<String> {
        events.iter().map(|e| emit_feedback(e, 0).message).collect()
    }

    #[test]
    fn enqueue_on_empty_starts_immediately() {
        let mut q = QueueState::new();
        let ev = q.enqueue(Command::GoTo { x: 2.0, y: 0.0 }, origin()).unwrap();
        assert_eq!(messages(&ev), vec!["looking for path to (2.0, 0.0)"]);
        let cur = q.current().unwrap();
        assert_eq!(cur.command, Command::GoTo { x: 2.0, y: 0.0 });
        assert_eq!(cur.phase, Phase::Executing);
    }

    #[test]
    fn enqueue_while_busy_appends() {
        let mut q = QueueState::new();
        q.enqueue(Command::GoTo { x: 2.0, y: 0.0 }, origin()).unwrap();
        let ev = q.enqueue(Command::forward(), origin()).unwrap();
        assert!(ev.is_empty());
        assert_eq!(q.pending_len(), 1);
        assert_eq!(q.current().unwrap().command, Command::GoTo { x: 2.0, y: 0.0 });
    }

    #[test]
    fn fifo_promotion_order() {
        let mut q = QueueState::new();
        let mut seen = Vec::new();
        for k in 1..=3 {
            seen.extend(q.enqueue(Command::GoTo { x: k as f64, y: 0.0 }, origin()).unwrap());
        }
        for _ in 0..3 {
            seen.extend(q.complete_current(origin()));
        }
        let looking: Vec<String> =
            messages(&seen).into_iter().filter(|m| m.starts_with("looking")).collect();
        assert_eq!(
            looking,
            vec!["looking for path to (1.0, 0.0)", "looking for path to (2.0, 0.0)", "looking for path to (3.0, 0.0)"]
        );
        assert_eq!(messages(&seen).last().unwrap(), MSG_WAITING);
    }

    #[test]
    fn cancel_promotes_next() {
        let mut q = QueueState::new();
        q.enqueue(Command::GoTo { x: 1.0, y: 0.0 }, origin()).unwrap();
        q.enqueue(Command::GoTo { x: 5.0, y: 0.0 }, origin()).unwrap();
        let ev = q.apply_flow(Command::Cancel, origin()).unwrap();
        assert_eq!(messages(&ev), vec!["canceled goal", "looking for path to (5.0, 0.0)"]);
        assert_eq!(q.current().unwrap().command, Command::GoTo { x: 5.0, y: 0.0 });
    }

    #[test]
    fn stop_and_continue() {
        let mut q = QueueState::new();
        q.enqueue(Command::forward(), origin()).unwrap();
        assert_eq!(messages(&q.apply_flow(Command::Stop, origin()).unwrap()), vec![MSG_PAUSED]);
        assert_eq!(q.current().unwrap().phase, Phase::Paused);
        // second stop is silent
        assert!(q.apply_flow(Command::Stop, origin()).unwrap().is_empty());
        assert_eq!(messages(&q.apply_flow(Command::Continue, origin()).unwrap()), vec![MSG_RESTARTING]);
        assert!(q.apply_flow(Command::Continue, origin()).unwrap().is_empty());
    }

    #[test]
    fn invalid_flow_is_silent() {
        let mut q = QueueState::new();
        assert!(q.apply_flow(Command::Continue, origin()).unwrap().is_empty());
        assert!(q.apply_flow(Command::Cancel, origin()).unwrap().is_empty());
        assert!(q.apply_flow(Command::GoBack, origin()).unwrap().is_empty());
        assert!(q.is_idle());
    }

    #[test]
    fn cancel_all_announces_waiting() {
        let mut q = QueueState::new();
        q.enqueue(Command::forward(), origin()).unwrap();
        q.enqueue(Command::patrol(), origin()).unwrap();
        let ev = q.apply_flow(Command::CancelAll, origin()).unwrap();
        assert_eq!(messages(&ev), vec![MSG_CANCELED_ALL, MSG_WAITING]);
        assert!(q.is_idle());
    }

    #[test]
    fn go_back_returns_to_movement_start() {
        let mut q = QueueState::new();
        let start = Pose2D::new(1.0, 2.0, 0.0);
        q.enqueue(Command::GoTo { x: 5.0, y: 5.0 }, start).unwrap();
        q.enqueue(Command::forward(), start).unwrap();
        let now = Pose2D::new(3.0, 3.0, 0.5);
        let ev = q.apply_flow(Command::GoBack, now).unwrap();
        assert_eq!(messages(&ev), vec!["looking for path to (1.0, 2.0)"]);
        assert_eq!(q.pending_len(), 0);
        let cur = q.current().unwrap();
        assert_eq!(cur.origin, Origin::Return);
        assert_eq!(cur.target, Some(Point::new(1.0, 2.0)));
        assert_eq!(cur.start_pose, now);
    }

    #[test]
    fn stranded_then_choices() {
        let mut q = QueueState::new();
        let start = Pose2D::new(0.5, 0.0, 0.0);
        q.enqueue(Command::GoTo { x: 4.0, y: 0.0 }, start).unwrap();
        q.enqueue(Command::turn(TurnDirection::Left), start).unwrap();
        let ev = q.strand_current();
        assert_eq!(messages(&ev), vec![MSG_STRANDED, MSG_USER_INPUT]);
        assert_eq!(q.current().unwrap().phase, Phase::AwaitingUser);

        let mut keep = q.clone();
        keep.resolve_user_choice(UserChoice::KeepGoing, Pose2D::new(2.0, 0.0, 0.0));
        assert_eq!(keep.current().unwrap().command, Command::turn(TurnDirection::Left));

        let ev = q.resolve_user_choice(UserChoice::GoBack, Pose2D::new(2.0, 0.0, 0.0));
        assert_eq!(messages(&ev), vec!["looking for path to (0.5, 0.0)"]);
        assert_eq!(q.pending_len(), 1);
    }

    #[test]
    fn choice_without_question_is_ignored() {
        let mut q = QueueState::new();
        q.enqueue(Command::forward(), origin()).unwrap();
        let before = q.clone();
        assert!(q.resolve_user_choice(UserChoice::KeepGoing, origin()).is_empty());
        assert_eq!(q, before);
    }

    #[test]
    fn movement_while_awaiting_user_keeps_going() {
        let mut q = QueueState::new();
        q.enqueue(Command::GoTo { x: 4.0, y: 0.0 }, origin()).unwrap();
        q.strand_current();
        let ev = q.enqueue(Command::GoTo { x: 1.0, y: 1.0 }, origin()).unwrap();
        assert_eq!(messages(&ev), vec!["looking for path to (1.0, 1.0)"]);
    }

    #[test]
    fn feedback_strings() {
        let f = emit_feedback(&FeedbackEvent::Navigated(Point::new(2.0, 1.0)), 7);
        assert_eq!(f.message, "successfully navigated to (2.0, 1.0)");
        assert_eq!(f.timestamp, 7);
        assert_eq!(emit_feedback(&FeedbackEvent::Unable(None), 0).message, "unable to complete goal");
        assert_eq!(
            emit_feedback(&FeedbackEvent::LookingForPath(Point::new(-0.04, 1.26)), 0).message,
            "looking for path to (0.0, 1.3)"
        );
        for e in [
            FeedbackEvent::Paused,
            FeedbackEvent::Canceled,
            FeedbackEvent::CanceledAll,
            FeedbackEvent::Restarting,
            FeedbackEvent::Waiting,
            FeedbackEvent::Stranded,
            FeedbackEvent::UserInputRequired,
            FeedbackEvent::NotUnderstood(NotUnderstood::NoPointer),
            FeedbackEvent::LookingForPath(Point::new(-12.25, 3.0)),
        ] {
            assert!(is_catalog_message(&emit_feedback(&e, 0).message), "{e:?}");
        }
        assert!(!is_catalog_message("looking for path to (1, 2)"));
        assert!(!is_catalog_message("hello"));
    }

    #[test]
    fn validation() {
        assert!(Command::Forward { distance: 0.0 }.validate().is_err());
        assert!(Command::Turn { direction: TurnDirection::Left, degrees: 360.0 }.validate().is_ok());
        assert!(Command::Turn { direction: TurnDirection::Left, degrees: 361.0 }.validate().is_err());
        assert!(Command::Patrol { sides: 2, radius: 1.0, increment: 1.0 }.validate().is_err());
        assert!(Command::GoTo { x: f64::NAN, y: 0.0 }.validate().is_err());
        let mut q = QueueState::new();
        assert_eq!(q.enqueue(Command::Stop, origin()), Err(CommandError::NotAMovement));
        assert_eq!(q.apply_flow(Command::forward(), origin()), Err(CommandError::NotFlowControl));
    }

    #[test]
    fn feedback_codes_round_trip() {
        for c in FeedbackCode::ALL {
            assert_eq!(FeedbackCode::parse(c.as_str()), Some(c));
        }
    }
}
