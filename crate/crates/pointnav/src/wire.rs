//! Bridge wire protocol. Every message is one UTF-8 JSON document; over TCP
//! each is preceded by its byte length as a 4-byte big-endian integer.
//!
//! Requests: `{op: "set"|"get"|"subscribe"|"reset", key?, payload?, count?}`.
//! Replies: `{ok, seq?, payload?, error?}`, one per request, in order.
//! Pushes: `{event: "update", key, seq, payload}`, `{event: "reset"}`, and
//! `{event: "error", key, error}` when a subscription is dropped.

use std::io::{self, Read, Write};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::Sender;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::bridge::{Bridge, Event, Snapshot, Subscription};
use crate::schema::ChannelKey;

/// Frames above this size are refused.
pub const MAX_FRAME: usize = 16 * 1024 * 1024;

pub fn write_frame<W: Write>(w: &mut W, body: &[u8]) -> io::Result<()> {
    let len = u32::try_from(body.len()).map_err(|_| io::Error::new(io::ErrorKind::InvalidInput, "frame too large"))?;
    w.write_all(&len.to_be_bytes())?;
    w.write_all(body)?;
    w.flush()
}

/// `Ok(None)` on a clean end of stream between frames.
pub fn read_frame<R: Read>(r: &mut R) -> io::Result<Option<Vec<u8>>> {
    let mut len = [0u8; 4];
    match r.read_exact(&mut len) {
        Ok(()) => {}
        Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => return Ok(None),
        Err(e) => return Err(e),
    }
    let len = u32::from_be_bytes(len) as usize;
    if len > MAX_FRAME {
        return Err(io::Error::new(io::ErrorKind::InvalidData, format!("frame of {len} bytes exceeds limit")));
    }
    let mut body = vec![0u8; len];
    r.read_exact(&mut body)?;
    Ok(Some(body))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Request {
    pub op: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub key: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload: Option<Box<RawValue>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Response {
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seq: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload: Option<Box<RawValue>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Response {
    fn ok(seq: Option<u64>, payload: Option<Box<RawValue>>) -> Self {
        Response { ok: true, seq, payload, error: None }
    }

    fn err(error: impl ToString) -> Self {
        Response { ok: false, seq: None, payload: None, error: Some(error.to_string()) }
    }
}

fn raw(text: &str) -> Box<RawValue> {
    RawValue::from_string(text.to_owned()).expect("stored payloads are valid JSON")
}

/// Push message text for a bridge event.
pub fn push_text(event: &Event) -> String {
    match event {
        Event::Update(u) => format!(
            r#"{{"event":"update","key":"{}","seq":{},"payload":{}}}"#,
            u.key.as_str(),
            u.seq,
            u.payload
        ),
        Event::Reset(_) => r#"{"event":"reset"}"#.to_owned(),
    }
}

fn overflow_text(key: ChannelKey) -> String {
    serde_json::json!({
        "event": "error",
        "key": key.as_str(),
        "error": "subscriber fell too far behind and was unsubscribed; subscribe and get again to resync",
    })
    .to_string()
}

/// One client connection: turns requests into replies and runs a forwarder
/// per subscription. All outgoing text goes through `out`.
pub struct Session {
    bridge: Arc<Bridge>,
    out: Sender<String>,
    closed: Arc<AtomicBool>,
    /// Last reset epoch pushed; each subscription hears every reset, the
    /// client only once. Held while pushing so nothing overtakes the notice.
    last_reset: Arc<Mutex<u64>>,
}

impl Session {
    pub fn new(bridge: Arc<Bridge>, out: Sender<String>) -> Self {
        Session { bridge, out, closed: Arc::new(AtomicBool::new(false)), last_reset: Arc::new(Mutex::new(0)) }
    }

    /// Handles one request; the reply is queued before any push that the
    /// request causes.
    pub fn handle(&self, text: &str) {
        let mut started = None;
        let reply = match serde_json::from_str::<Request>(text) {
            Ok(req) => self.dispatch(req, &mut started),
            Err(e) => Response::err(format!("malformed request: {e}")),
        };
        let _ = self.out.send(serde_json::to_string(&reply).expect("replies serialize"));
        if let Some((key, sub)) = started {
            self.forward(key, sub);
        }
    }

    fn key(req: &Request) -> Result<ChannelKey, Response> {
        let name = req.key.as_deref().ok_or_else(|| Response::err("missing key"))?;
        ChannelKey::parse(name).ok_or_else(|| Response::err(format!("unknown key {name:?}")))
    }

    fn dispatch(&self, req: Request, started: &mut Option<(ChannelKey, Subscription)>) -> Response {
        match req.op.as_str() {
            "set" => {
                let key = match Self::key(&req) {
                    Ok(k) => k,
                    Err(r) => return r,
                };
                let Some(payload) = req.payload.as_ref() else {
                    return Response::err("set needs a payload");
                };
                match self.bridge.set(key, payload.get()) {
                    Ok(seq) => Response::ok(Some(seq), None),
                    Err(e) => Response::err(e),
                }
            }
            "get" => {
                let key = match Self::key(&req) {
                    Ok(k) => k,
                    Err(r) => return r,
                };
                match self.bridge.get(key, req.count) {
                    Snapshot::Value { seq, payload } => Response::ok(Some(seq), payload.map(|p| raw(&p))),
                    Snapshot::Stream { seq, events } => {
                        let list: Vec<&str> = events.iter().map(|(_, p)| &**p).collect();
                        Response::ok(Some(seq), Some(raw(&format!("[{}]", list.join(",")))))
                    }
                }
            }
            "subscribe" => {
                let key = match Self::key(&req) {
                    Ok(k) => k,
                    Err(r) => return r,
                };
                // subscribed now, so nothing written after this reply is missed
                *started = Some((key, self.bridge.subscribe(&[key])));
                Response::ok(None, None)
            }
            "reset" => {
                if let Some(p) = req.payload.as_ref() {
                    let value = serde_json::from_str(p.get()).unwrap_or_default();
                    if let Err(e) = crate::schema::validate(ChannelKey::BridgeReset, &value) {
                        return Response::err(e);
                    }
                }
                Response::ok(Some(self.bridge.reset()), None)
            }
            other => Response::err(format!("unknown op {other:?}")),
        }
    }

    fn forward(&self, key: ChannelKey, sub: Subscription) {
        let out = self.out.clone();
        let closed = self.closed.clone();
        let last_reset = self.last_reset.clone();
        thread::spawn(move || {
            while !closed.load(Ordering::SeqCst) {
                match sub.recv_timeout(Duration::from_millis(50)) {
                    Ok(Some(event)) => {
                        let mut last = last_reset.lock().unwrap_or_else(|e| e.into_inner());
                        if let Event::Reset(epoch) = event {
                            if *last >= epoch {
                                continue;
                            }
                            *last = epoch;
                        }
                        if out.send(push_text(&event)).is_err() {
                            return;
                        }
                    }
                    Ok(None) => {}
                    Err(()) => {
                        if sub.overflowed() {
                            let _ = out.send(overflow_text(key));
                        }
                        return;
                    }
                }
            }
        });
    }
}

impl Drop for Session {
    fn drop(&mut self) {
        self.closed.store(true, Ordering::SeqCst);
    }
}
