//! Typed English commands: a small case-insensitive grammar, and grounding
//! of pointing ("there", "that one", "this way") and ordinal references
//! ("the second one on the left") against what the robot has seen.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::command::{Command, NotUnderstood, TurnDirection, UserChoice};
use crate::geometry::{display_to_ros, DisplayPoint, Point, Pose2D};
use crate::math;
use crate::world::{check, ConfigError, FiducialObservation};

#[derive(Debug, Clone, PartialEq)]
pub struct LanguageConfig {
    /// How long a pointer event stays bindable, seconds.
    pub deixis_window: f64,
    /// Distance of "a little further", meters.
    pub further_distance: f64,
    /// "That one" must point within this distance of a fiducial.
    pub that_one_radius: f64,
    /// Fiducials this close to the robot's heading line are neither left nor right.
    pub lateral_deadband: f64,
}

impl Default for LanguageConfig {
    fn default() -> Self {
        LanguageConfig { deixis_window: 5.0, further_distance: 0.25, that_one_radius: 0.5, lateral_deadband: 0.05 }
    }
}

impl LanguageConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        check("deixis_window", self.deixis_window, self.deixis_window >= 0.0)?;
        check("further_distance", self.further_distance, self.further_distance > 0.0)?;
        check("that_one_radius", self.that_one_radius, self.that_one_radius >= 0.0)?;
        check("lateral_deadband", self.lateral_deadband, self.lateral_deadband >= 0.0)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum View {
    Omniscient,
    Perspective,
}

impl View {
    pub fn as_str(self) -> &'static str {
        match self {
            View::Omniscient => "omniscient",
            View::Perspective => "perspective",
        }
    }

    pub fn parse(s: &str) -> Option<View> {
        match s {
            "omniscient" => Some(View::Omniscient),
            "perspective" => Some(View::Perspective),
            _ => None,
        }
    }
}

/// A click on the operator display.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointerEvent {
    pub point: DisplayPoint,
    pub timestamp: u64,
    pub view: View,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// A parsed utterance, possibly still referring to pointing or to fiducials
/// by position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AbstractCommand {
    Command(Command),
    Choice(UserChoice),
    GoThere,
    GoToThatOne,
    TurnThisWay,
    LittleFurther,
    GoToOrdinal { rank: usize, side: Side },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Grounded {
    Command(Command),
    Choice(UserChoice),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParseFailure;

impl core::fmt::Display for ParseFailure {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str("utterance does not match the command grammar")
    }
}

impl core::error::Error for ParseFailure {}

fn tokenize(text: &str) -> Vec<String> {
    let lowered = text.to_lowercase();
    let cleaned: String = lowered
        .chars()
        .map(|c| if matches!(c, ',' | '(' | ')' | '!' | '?' | ';' | ':' | '"') { ' ' } else { c })
        .collect();
    let mut tokens = Vec::new();
    for raw in cleaned.split_whitespace() {
        let t = raw.trim_end_matches('.');
        if t.is_empty() {
            continue;
        }
        // "forty-five" → "forty" "five"; leave "-1.5" alone
        if t.contains('-') && t.split('-').all(|p| !p.is_empty() && p.chars().all(|c| c.is_alphabetic())) {
            tokens.extend(t.split('-').map(String::from));
        } else {
            tokens.push(String::from(t));
        }
    }
    tokens
}

fn unit_word(s: &str) -> Option<u32> {
    const WORDS: [&str; 20] = [
        "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "eleven",
        "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen",
    ];
    WORDS.iter().position(|w| *w == s).map(|p| p as u32)
}

fn tens_word(s: &str) -> Option<u32> {
    const TENS: [&str; 8] = ["twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety"];
    TENS.iter().position(|w| *w == s).map(|p| 20 + 10 * p as u32)
}

/// Reads one number starting at `tokens[i]`; returns it and the tokens used.
fn number_at(tokens: &[String], i: usize) -> Option<(f64, usize)> {
    let t = tokens.get(i)?;
    if let Ok(v) = t.parse::<f64>() {
        if v.is_finite() && t.chars().any(|c| c.is_ascii_digit()) {
            return Some((v, 1));
        }
        return None;
    }
    if let Some(v) = unit_word(t) {
        return Some((v as f64, 1));
    }
    if let Some(tens) = tens_word(t) {
        if let Some(u) = tokens.get(i + 1).and_then(|n| unit_word(n)).filter(|u| (1..=9).contains(u)) {
            return Some(((tens + u) as f64, 2));
        }
        return Some((tens as f64, 1));
    }
    if t == "hundred" {
        return Some((100.0, 1));
    }
    None
}

/// A distance with an optional unit, possibly glued ("2m").
fn distance_at(tokens: &[String], i: usize) -> Option<(f64, usize)> {
    if let Some((v, n)) = number_at(tokens, i) {
        let unit = tokens
            .get(i + n)
            .is_some_and(|u| matches!(u.as_str(), "m" | "meter" | "meters" | "metre" | "metres"));
        return Some((v, n + unit as usize));
    }
    let t = tokens.get(i)?;
    let v = t.strip_suffix('m')?.parse::<f64>().ok().filter(|v| v.is_finite())?;
    Some((v, 1))
}

fn angle_at(tokens: &[String], i: usize) -> Option<(f64, usize)> {
    let (v, n) = number_at(tokens, i)?;
    let unit = tokens.get(i + n).is_some_and(|u| matches!(u.as_str(), "degree" | "degrees" | "deg"));
    Some((v, n + unit as usize))
}

fn ordinal(t: &str) -> Option<usize> {
    const WORDS: [&str; 10] =
        ["first", "second", "third", "fourth", "fifth", "sixth", "seventh", "eighth", "ninth", "tenth"];
    if let Some(p) = WORDS.iter().position(|w| *w == t) {
        return Some(p + 1);
    }
    let digits = t.strip_suffix("st").or(t.strip_suffix("nd")).or(t.strip_suffix("rd")).or(t.strip_suffix("th"))?;
    let n: usize = digits.parse().ok()?;
    (n >= 1).then_some(n)
}

fn side(t: &str) -> Option<Side> {
    match t {
        "left" => Some(Side::Left),
        "right" => Some(Side::Right),
        _ => None,
    }
}

fn words(tokens: &[String]) -> Vec<&str> {
    tokens.iter().map(String::as_str).collect()
}

fn valid(c: Command) -> Result<AbstractCommand, ParseFailure> {
    c.validate().map_err(|_| ParseFailure)?;
    Ok(AbstractCommand::Command(c))
}

fn parse_go(tokens: &[String]) -> Result<AbstractCommand, ParseFailure> {
    let w = words(tokens);
    match w.as_slice() {
        ["go", "forward", ..] => {
            if tokens.len() == 2 {
                return Ok(AbstractCommand::Command(Command::forward()));
            }
            match distance_at(tokens, 2) {
                Some((d, n)) if 2 + n == tokens.len() => valid(Command::Forward { distance: d }),
                _ => Err(ParseFailure),
            }
        }
        ["go", "back"] => Ok(AbstractCommand::Command(Command::GoBack)),
        ["go", "there"] => Ok(AbstractCommand::GoThere),
        ["go", "to", "that", "one"] => Ok(AbstractCommand::GoToThatOne),
        ["go", "to", rest @ ..] => {
            if let Some((x, n)) = number_at(tokens, 2) {
                return match number_at(tokens, 2 + n) {
                    Some((y, m)) if 2 + n + m == tokens.len() => valid(Command::GoTo { x, y }),
                    _ => Err(ParseFailure),
                };
            }
            let mut rest: &[&str] = rest;
            if rest.first() == Some(&"the") {
                rest = &rest[1..];
            }
            let (rank, rest) = rest.split_first().ok_or(ParseFailure)?;
            let rank = ordinal(rank).ok_or(ParseFailure)?;
            let (noun, mut rest) = rest.split_first().ok_or(ParseFailure)?;
            if !matches!(*noun, "one" | "fiducial" | "marker") {
                return Err(ParseFailure);
            }
            if rest.first() == Some(&"on") {
                rest = &rest[1..];
            }
            if rest.first() == Some(&"the") {
                rest = &rest[1..];
            }
            match rest {
                [s] => Ok(AbstractCommand::GoToOrdinal { rank, side: side(s).ok_or(ParseFailure)? }),
                _ => Err(ParseFailure),
            }
        }
        _ => Err(ParseFailure),
    }
}

/// Parses one utterance. Matching is case-insensitive and ignores
/// punctuation; anything outside the grammar is a [`ParseFailure`].
pub fn parse(text: &str) -> Result<AbstractCommand, ParseFailure> {
    let tokens = tokenize(text);
    let w = words(&tokens);
    match w.as_slice() {
        [] => Err(ParseFailure),
        ["stop"] => Ok(AbstractCommand::Command(Command::Stop)),
        ["continue"] => Ok(AbstractCommand::Command(Command::Continue)),
        ["cancel"] => Ok(AbstractCommand::Command(Command::Cancel)),
        ["cancel", "all"] => Ok(AbstractCommand::Command(Command::CancelAll)),
        ["keep", "going"] => Ok(AbstractCommand::Choice(UserChoice::KeepGoing)),
        ["a", "little", "further" | "farther"] => Ok(AbstractCommand::LittleFurther),
        ["turn", "this", "way"] => Ok(AbstractCommand::TurnThisWay),
        ["turn", dir, ..] => {
            let direction = match *dir {
                "left" => TurnDirection::Left,
                "right" => TurnDirection::Right,
                _ => return Err(ParseFailure),
            };
            if tokens.len() == 2 {
                return Ok(AbstractCommand::Command(Command::turn(direction)));
            }
            match angle_at(&tokens, 2) {
                Some((d, n)) if 2 + n == tokens.len() => valid(Command::Turn { direction, degrees: d }),
                _ => Err(ParseFailure),
            }
        }
        ["patrol", ..] => {
            let mut nums = Vec::new();
            let mut i = 1;
            while i < tokens.len() {
                let (v, n) = number_at(&tokens, i).ok_or(ParseFailure)?;
                nums.push(v);
                i += n;
            }
            if nums.len() > 3 {
                return Err(ParseFailure);
            }
            let Command::Patrol { sides, radius, increment } = Command::patrol() else {
                unreachable!()
            };
            let sides = match nums.first() {
                Some(&s) if s >= 0.0 && s <= u32::MAX as f64 && math::floor(s) == s => s as u32,
                Some(_) => return Err(ParseFailure),
                None => sides,
            };
            valid(Command::Patrol {
                sides,
                radius: nums.get(1).copied().unwrap_or(radius),
                increment: nums.get(2).copied().unwrap_or(increment),
            })
        }
        ["go", ..] => parse_go(&tokens),
        _ => Err(ParseFailure),
    }
}

/// Canonical surface form; `parse(&render(c))` gives back `c`.
pub fn render(command: &Command) -> String {
    match *command {
        Command::Forward { distance } => format!("go forward {distance}"),
        Command::GoTo { x, y } => format!("go to {x} {y}"),
        Command::Turn { direction, degrees } => format!("turn {} {degrees}", direction.as_str()),
        Command::Patrol { sides, radius, increment } => format!("patrol {sides} {radius} {increment}"),
        Command::Stop => String::from("stop"),
        Command::Continue => String::from("continue"),
        Command::Cancel => String::from("cancel"),
        Command::CancelAll => String::from("cancel all"),
        Command::GoBack => String::from("go back"),
    }
}

/// What grounding may consult: where the robot is, which fiducials it has
/// reported, and the latest pointer event if it is still fresh.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundingContext {
    pub robot_pose: Pose2D,
    pub fiducials: Vec<FiducialObservation>,
    pub recent_pointer: Option<PointerEvent>,
}

impl GroundingContext {
    /// Drops `pointer` when it is more than `max_age` ticks older than `now`.
    pub fn new(
        robot_pose: Pose2D,
        fiducials: Vec<FiducialObservation>,
        pointer: Option<PointerEvent>,
        now: u64,
        max_age: u64,
    ) -> Self {
        let recent_pointer = pointer.filter(|p| now.saturating_sub(p.timestamp) <= max_age);
        GroundingContext { robot_pose, fiducials, recent_pointer }
    }
}

/// Fiducials on one side of the robot, ordered by distance ahead.
pub fn fiducials_on_side(ctx: &GroundingContext, side: Side, deadband: f64) -> Vec<&FiducialObservation> {
    let mut candidates: Vec<(f64, &FiducialObservation)> = ctx
        .fiducials
        .iter()
        .filter_map(|f| {
            let local = ctx.robot_pose.to_local(f.pose.position());
            let on_side = match side {
                Side::Right => local.y < -deadband,
                Side::Left => local.y > deadband,
            };
            (on_side && local.x > 0.0).then_some((local.x, f))
        })
        .collect();
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.id.cmp(&b.1.id)));
    candidates.into_iter().map(|(_, f)| f).collect()
}

fn pointer_point(ctx: &GroundingContext) -> Result<Point, NotUnderstood> {
    ctx.recent_pointer.map(|p| display_to_ros(p.point)).ok_or(NotUnderstood::NoPointer)
}

/// Resolves pointing and ordinal references into a concrete command.
pub fn ground(
    command: &AbstractCommand,
    ctx: &GroundingContext,
    config: &LanguageConfig,
) -> Result<Grounded, NotUnderstood> {
    let cmd = match *command {
        AbstractCommand::Command(c) => c,
        AbstractCommand::Choice(c) => return Ok(Grounded::Choice(c)),
        AbstractCommand::LittleFurther => Command::Forward { distance: config.further_distance },
        AbstractCommand::GoThere => {
            let p = pointer_point(ctx)?;
            Command::GoTo { x: p.x, y: p.y }
        }
        AbstractCommand::GoToThatOne => {
            let p = pointer_point(ctx)?;
            let nearest = ctx
                .fiducials
                .iter()
                .map(|f| (f.pose.position().distance(p), f))
                .filter(|(d, _)| *d <= config.that_one_radius)
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.id.cmp(&b.1.id)));
            let (_, f) = nearest.ok_or(NotUnderstood::NoFiducialNearPointer)?;
            Command::GoTo { x: f.pose.x, y: f.pose.y }
        }
        AbstractCommand::TurnThisWay => {
            let p = pointer_point(ctx)?;
            let local = ctx.robot_pose.to_local(p);
            let bearing = math::to_degrees(local.angle());
            if bearing.abs() < 1e-6 || local.norm() < 1e-9 {
                return Err(NotUnderstood::NoBearing);
            }
            let direction = if bearing > 0.0 { TurnDirection::Left } else { TurnDirection::Right };
            Command::Turn { direction, degrees: bearing.abs() }
        }
        AbstractCommand::GoToOrdinal { rank, side } => {
            let ranked = fiducials_on_side(ctx, side, config.lateral_deadband);
            let f = ranked.get(rank.wrapping_sub(1)).ok_or(NotUnderstood::OrdinalOutOfRange)?;
            Command::GoTo { x: f.pose.x, y: f.pose.y }
        }
    };
    Ok(Grounded::Command(cmd))
}
