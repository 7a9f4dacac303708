//! Scripted runs: a world, a robot and a bridge in one process, driven tick by
//! tick so that the same script always produces the same transcript.
//!
//! A script has one step per line. A step starts with its tick, either
//! absolute (`@120`) or relative to the previous step (`@+20`); without one it
//! runs right after the previous step.
//!
//! ```text
//! timeout 2000                    # ticks an expect may wait, default 2000
//! @10 utter "patrol"
//! @+0 point 1.5 -2.0 omniscient   # display x z, view optional
//! @+0 send {"cmd":"stop"}         # raw Kirby payload
//! expect "looking for path"       # waits for a feedback message with this prefix
//! seen 5                          # waits until 5 fiducials have been reported
//! @+40 wall 1 -1 1 1              # a wall appears in the world
//! choose go_back
//! near 0 0 0.1                    # robot within 0.1 m of (0, 0)
//! @+100 wait
//! ```
//!
//! An expect only matches feedback published after the previous match and
//! after the most recent input step (`utter`, `point`, `send`, `choose`).
//! The run stops at the first step that fails.

use std::fmt;
use std::sync::Arc;

use pointnav_core::command::UserChoice;
use pointnav_core::language::View;
use pointnav_core::{ControllerConfig, DisplayPoint, Inbound, Pose2D, Segment2D, WorldSpec};
use serde_json::Value;

use crate::bridge::{Bridge, Event};
use crate::robot::{LocalPort, RobotNode};
use crate::schema::{self, ChannelKey, FeedbackPayload};
use crate::world_file::{numbers, WorldFileError};

pub const DEFAULT_TIMEOUT: u64 = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum At {
    Tick(u64),
    After(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    Utter(String),
    Point { point: DisplayPoint, view: View },
    Send(Value),
    Choose(UserChoice),
    Expect(String),
    Seen(usize),
    Wall(Segment2D),
    Near { x: f64, y: f64, tol: f64 },
    Wait,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub line: usize,
    pub at: At,
    pub action: Action,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Script {
    pub timeout: u64,
    pub steps: Vec<Step>,
}

fn err(line: usize, message: impl Into<String>) -> WorldFileError {
    WorldFileError { line, message: message.into() }
}

/// Drops a trailing `#` comment that is not inside double quotes.
fn strip_comment(raw: &str) -> &str {
    let mut quoted = false;
    for (i, c) in raw.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '#' if !quoted => return &raw[..i],
            _ => {}
        }
    }
    raw
}

fn quoted(line: usize, rest: &str) -> Result<String, WorldFileError> {
    let rest = rest.trim();
    rest.strip_prefix('"')
        .and_then(|r| r.strip_suffix('"'))
        .filter(|r| !r.contains('"'))
        .map(str::to_owned)
        .ok_or_else(|| err(line, format!("expected one double-quoted string, found {rest:?}")))
}

fn parse_at(line: usize, tok: &str) -> Result<At, WorldFileError> {
    let bad = || err(line, format!("bad tick {tok:?}"));
    let body = tok.strip_prefix('@').ok_or_else(bad)?;
    match body.strip_prefix('+') {
        Some(n) => n.parse().map(At::After).map_err(|_| bad()),
        None => body.parse().map(At::Tick).map_err(|_| bad()),
    }
}

pub fn parse(text: &str) -> Result<Script, WorldFileError> {
    let mut script = Script { timeout: DEFAULT_TIMEOUT, steps: Vec::new() };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let mut rest = strip_comment(raw).trim();
        if rest.is_empty() {
            continue;
        }
        let mut at = At::After(0);
        if rest.starts_with('@') {
            let (tok, tail) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
            at = parse_at(line, tok)?;
            rest = tail.trim();
        }
        let (word, args) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
        let toks: Vec<&str> = args.split_whitespace().collect();
        let action = match word {
            "timeout" => {
                let [n] = numbers(line, "timeout", &toks)?;
                if n < 1.0 || n.fract() != 0.0 {
                    return Err(err(line, "timeout must be a positive whole number of ticks"));
                }
                script.timeout = n as u64;
                continue;
            }
            "utter" => Action::Utter(quoted(line, args)?),
            "expect" => Action::Expect(quoted(line, args)?),
            "point" => {
                let (nums, view) = match toks.len() {
                    3 => {
                        let view = View::parse(toks[2]).ok_or_else(|| err(line, format!("unknown view {:?}", toks[2])))?;
                        (&toks[..2], view)
                    }
                    _ => (&toks[..], View::Omniscient),
                };
                let [x, z] = numbers(line, "point", nums)?;
                Action::Point { point: DisplayPoint { x, z }, view }
            }
            "send" => Action::Send(serde_json::from_str(args).map_err(|e| err(line, format!("send needs JSON: {e}")))?),
            "choose" => match args.trim() {
                "keep_going" => Action::Choose(UserChoice::KeepGoing),
                "go_back" => Action::Choose(UserChoice::GoBack),
                other => return Err(err(line, format!("choice must be keep_going or go_back, found {other:?}"))),
            },
            "seen" => {
                let [n] = numbers(line, "seen", &toks)?;
                if n < 0.0 || n.fract() != 0.0 {
                    return Err(err(line, "seen takes a whole number of fiducials"));
                }
                Action::Seen(n as usize)
            }
            "wall" => {
                let [a1, b1, a2, b2] = numbers(line, "wall", &toks)?;
                Action::Wall(Segment2D::from_coords(a1, b1, a2, b2).map_err(|e| err(line, format!("bad wall: {e}")))?)
            }
            "near" => {
                let [x, y, tol] = numbers(line, "near", &toks)?;
                Action::Near { x, y, tol }
            }
            "wait" if toks.is_empty() => Action::Wait,
            other => return Err(err(line, format!("unknown step {other:?}"))),
        };
        script.steps.push(Step { line, at, action });
    }
    Ok(script)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub line: usize,
    pub tick: u64,
    pub message: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {} at tick {}: {}", self.line, self.tick, self.message)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub failure: Option<Failure>,
    /// Every bridge event in order, one per line.
    pub transcript: Vec<String>,
    pub feedback: Vec<FeedbackPayload>,
    /// Line and tick of each expect or seen step that was satisfied.
    pub matched: Vec<(usize, u64)>,
    pub ticks: u64,
    pub final_pose: Pose2D,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

struct Tap {
    sub: crate::bridge::Subscription,
    transcript: Vec<String>,
    feedback: Vec<FeedbackPayload>,
}

impl Tap {
    fn collect(&mut self, tick: u64) {
        for event in self.sub.drain() {
            match event {
                Event::Update(u) => {
                    if u.key == ChannelKey::KirbyFeedback {
                        let fb = serde_json::from_str(&u.payload).expect("the bridge only stores valid feedback");
                        self.feedback.push(fb);
                    }
                    self.transcript.push(format!("@{tick} {} #{} {}", u.key, u.seq, u.payload));
                }
                Event::Reset(_) => self.transcript.push(format!("@{tick} reset")),
            }
        }
    }
}

pub fn run(world: WorldSpec, config: ControllerConfig, script: &Script) -> anyhow::Result<Report> {
    let bridge = Arc::new(Bridge::default());
    let mut tap = Tap { sub: bridge.subscribe(&ChannelKey::ALL), transcript: Vec::new(), feedback: Vec::new() };
    let mut node = RobotNode::start(LocalPort::new(bridge.clone()), world, config)?;
    tap.collect(0);

    let mut matched = Vec::new();
    let mut failure = None;
    let mut cursor = 0;
    let mut anchor = 0;
    let mut next = 0;
    'run: while next < script.steps.len() {
        let tick = node.controller().now();
        while let Some(step) = script.steps.get(next) {
            let due = match step.at {
                At::Tick(t) => t,
                At::After(d) => anchor + d,
            };
            if tick < due {
                break;
            }
            let fail = |message: String| Failure { line: step.line, tick, message };
            let send = |inbound: &Inbound| bridge.set_value(ChannelKey::Kirby, &schema::encode_kirby(inbound));
            let sent = match &step.action {
                Action::Utter(text) => Some(send(&Inbound::Utterance(text.clone()))),
                Action::Point { point, view } => Some(send(&Inbound::Pointer { point: *point, view: *view })),
                Action::Choose(c) => Some(send(&Inbound::UserChoice(*c))),
                Action::Send(v) => Some(bridge.set_value(ChannelKey::Kirby, v)),
                Action::Expect(text) => {
                    if let Some(i) = tap.feedback[cursor..].iter().position(|f| f.message.starts_with(text.as_str())) {
                        cursor += i + 1;
                        matched.push((step.line, tick));
                    } else if tick - due >= script.timeout {
                        failure = Some(fail(format!("no feedback starting with {text:?} within {} ticks", script.timeout)));
                        break 'run;
                    } else {
                        break;
                    }
                    None
                }
                Action::Seen(n) => {
                    if node.controller().fiducials().len() >= *n {
                        matched.push((step.line, tick));
                    } else if tick - due >= script.timeout {
                        let have = node.controller().fiducials().len();
                        failure = Some(fail(format!("{have} of {n} fiducials seen after {} ticks", script.timeout)));
                        break 'run;
                    } else {
                        break;
                    }
                    None
                }
                Action::Wall(w) => {
                    node.controller_mut().world_mut().walls.push(*w);
                    None
                }
                Action::Near { x, y, tol } => {
                    let p = node.controller().pose();
                    let d = (p.x - x).hypot(p.y - y);
                    if d > *tol {
                        failure = Some(fail(format!("robot at ({:.3}, {:.3}) is {d:.3} m from ({x}, {y})", p.x, p.y)));
                        break 'run;
                    }
                    None
                }
                Action::Wait => None,
            };
            if let Some(result) = sent {
                if let Err(e) = result {
                    failure = Some(fail(format!("bridge rejected input: {e}")));
                    break 'run;
                }
                tap.collect(tick);
                cursor = tap.feedback.len();
            }
            anchor = tick;
            next += 1;
        }
        if next == script.steps.len() {
            break;
        }
        node.step()?;
        tap.collect(node.controller().now());
    }
    tap.collect(node.controller().now());
    Ok(Report {
        failure,
        transcript: tap.transcript,
        feedback: tap.feedback,
        matched,
        ticks: node.controller().now(),
        final_pose: node.controller().pose(),
    })
}
