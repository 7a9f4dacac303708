//! Channel keys and the JSON payload schema of each key.

use std::fmt;

use pointnav_core::command::{is_catalog_message, Command, Feedback, FeedbackCode, TurnDirection, UserChoice};
use pointnav_core::controller::{Inbound, Odometry, Outbound};
use pointnav_core::geometry::{DisplayPoint, Pose2D, Segment2D};
use pointnav_core::language::View;
use pointnav_core::mapping::PerceivedMap;
use pointnav_core::world::FiducialObservation;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map as JsonMap, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ChannelKey {
    Map,
    Odom,
    Kirby,
    Fiducials,
    KirbyFeedback,
    BridgeReset,
}

impl ChannelKey {
    pub const ALL: [ChannelKey; 6] = [
        ChannelKey::Map,
        ChannelKey::Odom,
        ChannelKey::Kirby,
        ChannelKey::Fiducials,
        ChannelKey::KirbyFeedback,
        ChannelKey::BridgeReset,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ChannelKey::Map => "Map",
            ChannelKey::Odom => "Odom",
            ChannelKey::Kirby => "Kirby",
            ChannelKey::Fiducials => "Fiducials",
            ChannelKey::KirbyFeedback => "Kirby_Feedback",
            ChannelKey::BridgeReset => "Bridge_Reset",
        }
    }

    pub fn parse(s: &str) -> Option<ChannelKey> {
        ChannelKey::ALL.into_iter().find(|k| k.as_str() == s)
    }

    /// Stream keys keep a log of recent events; value keys keep only the latest write.
    pub fn is_stream(self) -> bool {
        matches!(self, ChannelKey::Kirby | ChannelKey::KirbyFeedback | ChannelKey::BridgeReset)
    }
}

impl fmt::Display for ChannelKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid {key} payload: {reason}")]
pub struct SchemaError {
    pub key: ChannelKey,
    pub reason: String,
}

fn reject(key: ChannelKey, reason: impl fmt::Display) -> SchemaError {
    SchemaError { key, reason: reason.to_string() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentDto {
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapPayload {
    pub segments: Vec<SegmentDto>,
    pub version: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdomPayload {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub v: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiducialDto {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiducialsPayload {
    pub fiducials: Vec<FiducialDto>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeedbackPayload {
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
    pub ts: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResetPayload {
    pub scope: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct KirbyEnvelope {
    cmd: String,
    #[serde(default)]
    args: JsonMap<String, Value>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NoArgs {}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ForwardArgs {
    x: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GoToArgs {
    x: f64,
    y: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TurnArgs {
    direction: String,
    d: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PatrolArgs {
    s: Option<u32>,
    r: Option<f64>,
    i: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct UtteranceArgs {
    text: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PointerArgs {
    x: f64,
    z: f64,
    view: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ChoiceArgs {
    choice: String,
}

fn finite(key: ChannelKey, name: &str, v: f64) -> Result<(), SchemaError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(reject(key, format_args!("{name} is not finite")))
    }
}

fn typed<T: DeserializeOwned>(key: ChannelKey, value: Value) -> Result<T, SchemaError> {
    serde_json::from_value(value).map_err(|e| reject(key, e))
}

/// Decodes a Kirby write into what the robot should act on.
pub fn decode_kirby(value: &Value) -> Result<Inbound, SchemaError> {
    let k = ChannelKey::Kirby;
    let env: KirbyEnvelope = typed(k, value.clone())?;
    let args = Value::Object(env.args);
    let inbound = match env.cmd.as_str() {
        "forward" => {
            let a: ForwardArgs = typed(k, args)?;
            Inbound::Command(a.x.map_or_else(Command::forward, |x| Command::Forward { distance: x }))
        }
        "go_to" => {
            let a: GoToArgs = typed(k, args)?;
            Inbound::Command(Command::GoTo { x: a.x, y: a.y })
        }
        "turn" => {
            let a: TurnArgs = typed(k, args)?;
            let direction = match a.direction.as_str() {
                "left" => TurnDirection::Left,
                "right" => TurnDirection::Right,
                other => return Err(reject(k, format_args!("unknown turn direction {other:?}"))),
            };
            Inbound::Command(a.d.map_or(Command::turn(direction), |d| Command::Turn { direction, degrees: d }))
        }
        "patrol" => {
            let a: PatrolArgs = typed(k, args)?;
            let Command::Patrol { sides, radius, increment } = Command::patrol() else { unreachable!() };
            Inbound::Command(Command::Patrol {
                sides: a.s.unwrap_or(sides),
                radius: a.r.unwrap_or(radius),
                increment: a.i.unwrap_or(increment),
            })
        }
        "stop" | "continue" | "cancel" | "cancel_all" | "go_back" => {
            let _: NoArgs = typed(k, args)?;
            Inbound::Command(match env.cmd.as_str() {
                "stop" => Command::Stop,
                "continue" => Command::Continue,
                "cancel" => Command::Cancel,
                "cancel_all" => Command::CancelAll,
                _ => Command::GoBack,
            })
        }
        "utterance" => {
            let a: UtteranceArgs = typed(k, args)?;
            if a.text.trim().is_empty() {
                return Err(reject(k, "utterance text is empty"));
            }
            Inbound::Utterance(a.text)
        }
        "pointer" => {
            let a: PointerArgs = typed(k, args)?;
            finite(k, "x", a.x)?;
            finite(k, "z", a.z)?;
            let view = match a.view.as_deref() {
                None => View::Omniscient,
                Some(v) => View::parse(v).ok_or_else(|| reject(k, format_args!("unknown view {v:?}")))?,
            };
            Inbound::Pointer { point: DisplayPoint::new(a.x, a.z), view }
        }
        "user_choice" => {
            let a: ChoiceArgs = typed(k, args)?;
            Inbound::UserChoice(match a.choice.as_str() {
                "keep_going" => UserChoice::KeepGoing,
                "go_back" => UserChoice::GoBack,
                other => return Err(reject(k, format_args!("unknown choice {other:?}"))),
            })
        }
        other => return Err(reject(k, format_args!("unknown cmd {other:?}"))),
    };
    if let Inbound::Command(c) = &inbound {
        c.validate().map_err(|e| reject(k, e))?;
    }
    Ok(inbound)
}

/// The Kirby write that carries `inbound`.
pub fn encode_kirby(inbound: &Inbound) -> Value {
    match inbound {
        Inbound::Command(c) => match *c {
            Command::Forward { distance } => json!({"cmd": "forward", "args": {"x": distance}}),
            Command::GoTo { x, y } => json!({"cmd": "go_to", "args": {"x": x, "y": y}}),
            Command::Turn { direction, degrees } => {
                json!({"cmd": "turn", "args": {"direction": direction.as_str(), "d": degrees}})
            }
            Command::Patrol { sides, radius, increment } => {
                json!({"cmd": "patrol", "args": {"s": sides, "r": radius, "i": increment}})
            }
            Command::Stop => json!({"cmd": "stop", "args": {}}),
            Command::Continue => json!({"cmd": "continue", "args": {}}),
            Command::Cancel => json!({"cmd": "cancel", "args": {}}),
            Command::CancelAll => json!({"cmd": "cancel_all", "args": {}}),
            Command::GoBack => json!({"cmd": "go_back", "args": {}}),
        },
        Inbound::Utterance(text) => json!({"cmd": "utterance", "args": {"text": text}}),
        Inbound::Pointer { point, view } => {
            json!({"cmd": "pointer", "args": {"x": point.x, "z": point.z, "view": view.as_str()}})
        }
        Inbound::UserChoice(c) => json!({"cmd": "user_choice", "args": {"choice": c.as_str()}}),
    }
}

/// Checks `value` against the schema of `key`.
pub fn validate(key: ChannelKey, value: &Value) -> Result<(), SchemaError> {
    match key {
        ChannelKey::Map => {
            let m: MapPayload = typed(key, value.clone())?;
            for s in &m.segments {
                for (n, v) in [("a1", s.a1), ("b1", s.b1), ("a2", s.a2), ("b2", s.b2)] {
                    finite(key, n, v)?;
                }
            }
        }
        ChannelKey::Odom => {
            let o: OdomPayload = typed(key, value.clone())?;
            for (n, v) in [("x", o.x), ("y", o.y), ("theta", o.theta), ("v", o.v), ("omega", o.omega)] {
                finite(key, n, v)?;
            }
        }
        ChannelKey::Fiducials => {
            let f: FiducialsPayload = typed(key, value.clone())?;
            for d in &f.fiducials {
                for (n, v) in [("x", d.x), ("y", d.y), ("theta", d.theta)] {
                    finite(key, n, v)?;
                }
            }
        }
        ChannelKey::Kirby => {
            decode_kirby(value)?;
        }
        ChannelKey::KirbyFeedback => {
            let f: FeedbackPayload = typed(key, value.clone())?;
            if FeedbackCode::parse(&f.code).is_none() {
                return Err(reject(key, format_args!("unknown feedback code {:?}", f.code)));
            }
            if !is_catalog_message(&f.message) {
                return Err(reject(key, format_args!("message {:?} is not in the catalog", f.message)));
            }
            if f.x.is_some() != f.y.is_some() {
                return Err(reject(key, "x and y must appear together"));
            }
            for v in f.x.iter().chain(f.y.iter()) {
                finite(key, "coordinate", *v)?;
            }
        }
        ChannelKey::BridgeReset => {
            let r: ResetPayload = typed(key, value.clone())?;
            if r.scope != "all" {
                return Err(reject(key, format_args!("unsupported reset scope {:?}", r.scope)));
            }
        }
    }
    Ok(())
}

pub fn map_payload(map: &PerceivedMap) -> MapPayload {
    MapPayload {
        segments: map
            .segments
            .iter()
            .map(|s| SegmentDto { a1: s.p1().x, b1: s.p1().y, a2: s.p2().x, b2: s.p2().y })
            .collect(),
        version: map.version,
    }
}

/// Degenerate segments are dropped.
pub fn map_from_payload(p: &MapPayload) -> PerceivedMap {
    PerceivedMap {
        segments: p.segments.iter().filter_map(|s| Segment2D::from_coords(s.a1, s.b1, s.a2, s.b2).ok()).collect(),
        version: p.version,
    }
}

pub fn odom_payload(o: &Odometry) -> OdomPayload {
    OdomPayload { x: o.pose.x, y: o.pose.y, theta: o.pose.theta, v: o.v, omega: o.omega }
}

pub fn fiducials_payload(list: &[FiducialObservation]) -> FiducialsPayload {
    FiducialsPayload {
        fiducials: list
            .iter()
            .map(|f| FiducialDto { id: f.id, x: f.pose.x, y: f.pose.y, theta: f.pose.theta })
            .collect(),
    }
}

pub fn fiducials_from_payload(p: &FiducialsPayload) -> Vec<FiducialObservation> {
    p.fiducials.iter().map(|f| FiducialObservation { id: f.id, pose: Pose2D::new(f.x, f.y, f.theta) }).collect()
}

pub fn feedback_payload(f: &Feedback) -> FeedbackPayload {
    FeedbackPayload {
        code: f.code.as_str().to_owned(),
        message: f.message.clone(),
        x: f.params.map(|p| p.x),
        y: f.params.map(|p| p.y),
        ts: f.timestamp,
    }
}

pub fn reset_payload() -> Value {
    json!({"scope": "all"})
}

/// Key and JSON document for one controller output.
pub fn encode_outbound(out: &Outbound) -> (ChannelKey, Value) {
    let to = |v: Result<Value, serde_json::Error>| v.expect("payload types always serialize");
    match out {
        Outbound::Odom(o) => (ChannelKey::Odom, to(serde_json::to_value(odom_payload(o)))),
        Outbound::Map(m) => (ChannelKey::Map, to(serde_json::to_value(map_payload(m)))),
        Outbound::Fiducials(f) => (ChannelKey::Fiducials, to(serde_json::to_value(fiducials_payload(f)))),
        Outbound::Feedback(f) => (ChannelKey::KirbyFeedback, to(serde_json::to_value(feedback_payload(f)))),
    }
}
