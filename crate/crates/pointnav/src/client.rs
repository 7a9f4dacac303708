//! Blocking TCP client for the bridge protocol.

use std::io;
use std::net::TcpStream;
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use serde::Deserialize;
use serde_json::value::RawValue;
use serde_json::Value;

use crate::schema::ChannelKey;
use crate::wire::{read_frame, write_frame, Request};

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error("bridge connection failed: {0}")]
    Io(#[from] io::Error),
    #[error("bridge rejected request: {0}")]
    Rejected(String),
    #[error("bridge sent something unexpected: {0}")]
    Protocol(String),
    #[error("no reply from bridge within {0:?}")]
    Timeout(Duration),
    #[error("bridge connection closed")]
    Closed,
}

/// A subscription push.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Push {
    Update { key: ChannelKey, seq: u64, payload: String },
    Reset,
    /// The bridge dropped a subscription.
    Error { key: Option<ChannelKey>, error: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reply {
    pub seq: Option<u64>,
    /// Raw JSON text.
    pub payload: Option<String>,
}

#[derive(Deserialize)]
struct Incoming {
    event: Option<String>,
    key: Option<String>,
    seq: Option<u64>,
    payload: Option<Box<RawValue>>,
    ok: Option<bool>,
    error: Option<String>,
}

enum Inbox {
    Reply(Result<Reply, ClientError>),
}

pub struct BridgeClient {
    stream: TcpStream,
    replies: Receiver<Inbox>,
    pushes: Receiver<Push>,
    timeout: Duration,
}

impl BridgeClient {
    pub fn connect(addr: &str) -> Result<Self, ClientError> {
        let stream = TcpStream::connect(addr)?;
        stream.set_nodelay(true)?;
        let mut reader = stream.try_clone()?;
        let (reply_tx, replies) = mpsc::channel();
        let (push_tx, pushes) = mpsc::channel();
        thread::spawn(move || loop {
            let body = match read_frame(&mut reader) {
                Ok(Some(b)) => b,
                _ => return,
            };
            let msg: Incoming = match serde_json::from_slice(&body) {
                Ok(m) => m,
                Err(e) => {
                    let _ = reply_tx.send(Inbox::Reply(Err(ClientError::Protocol(e.to_string()))));
                    continue;
                }
            };
            let key = msg.key.as_deref().and_then(ChannelKey::parse);
            match msg.event.as_deref() {
                Some("update") => {
                    let (Some(key), Some(seq), Some(payload)) = (key, msg.seq, msg.payload) else {
                        continue;
                    };
                    if push_tx.send(Push::Update { key, seq, payload: payload.get().to_owned() }).is_err() {
                        return;
                    }
                }
                Some("reset") => {
                    let _ = push_tx.send(Push::Reset);
                }
                Some(_) => {
                    let _ = push_tx.send(Push::Error { key, error: msg.error.unwrap_or_default() });
                }
                None => {
                    let reply = if msg.ok == Some(true) {
                        Ok(Reply { seq: msg.seq, payload: msg.payload.map(|p| p.get().to_owned()) })
                    } else {
                        Err(ClientError::Rejected(msg.error.unwrap_or_else(|| "no reason given".into())))
                    };
                    if reply_tx.send(Inbox::Reply(reply)).is_err() {
                        return;
                    }
                }
            }
        });
        Ok(BridgeClient { stream, replies, pushes, timeout: Duration::from_secs(5) })
    }

    /// Tries to connect up to `attempts` times, `delay` apart.
    pub fn connect_with_retry(addr: &str, attempts: u32, delay: Duration) -> Result<Self, ClientError> {
        let mut last = None;
        for attempt in 0..attempts.max(1) {
            match Self::connect(addr) {
                Ok(c) => return Ok(c),
                Err(e) => {
                    log::debug!("connect attempt {} to {addr} failed: {e}", attempt + 1);
                    last = Some(e);
                    thread::sleep(delay);
                }
            }
        }
        Err(last.expect("at least one attempt"))
    }

    pub fn set_timeout(&mut self, timeout: Duration) {
        self.timeout = timeout;
    }

    fn request(&mut self, req: &Request) -> Result<Reply, ClientError> {
        let text = serde_json::to_string(req).expect("requests serialize");
        write_frame(&mut self.stream, text.as_bytes())?;
        match self.replies.recv_timeout(self.timeout) {
            Ok(Inbox::Reply(r)) => r,
            Err(RecvTimeoutError::Timeout) => Err(ClientError::Timeout(self.timeout)),
            Err(RecvTimeoutError::Disconnected) => Err(ClientError::Closed),
        }
    }

    fn keyed(op: &str, key: ChannelKey) -> Request {
        Request { op: op.into(), key: Some(key.as_str().into()), payload: None, count: None }
    }

    /// Writes raw JSON text; returns the assigned seq.
    pub fn set_raw(&mut self, key: ChannelKey, payload: &str) -> Result<u64, ClientError> {
        let raw = RawValue::from_string(payload.to_owned())
            .map_err(|e| ClientError::Rejected(format!("payload is not JSON: {e}")))?;
        let mut req = Self::keyed("set", key);
        req.payload = Some(raw);
        let reply = self.request(&req)?;
        reply.seq.ok_or_else(|| ClientError::Protocol("set reply without seq".into()))
    }

    pub fn set(&mut self, key: ChannelKey, payload: &Value) -> Result<u64, ClientError> {
        self.set_raw(key, &payload.to_string())
    }

    /// Latest value (value keys) or a JSON array of the last `count` events (stream keys).
    pub fn get(&mut self, key: ChannelKey, count: Option<usize>) -> Result<Reply, ClientError> {
        let mut req = Self::keyed("get", key);
        req.count = count;
        self.request(&req)
    }

    pub fn subscribe(&mut self, key: ChannelKey) -> Result<(), ClientError> {
        self.request(&Self::keyed("subscribe", key)).map(|_| ())
    }

    pub fn reset(&mut self) -> Result<u64, ClientError> {
        let reply = self.request(&Request { op: "reset".into(), key: None, payload: None, count: None })?;
        reply.seq.ok_or_else(|| ClientError::Protocol("reset reply without seq".into()))
    }

    pub fn next_push(&self, timeout: Duration) -> Option<Push> {
        self.pushes.recv_timeout(timeout).ok()
    }

    pub fn try_push(&self) -> Option<Push> {
        self.pushes.try_recv().ok()
    }
}

impl Drop for BridgeClient {
    fn drop(&mut self) {
        let _ = self.stream.shutdown(std::net::Shutdown::Both);
    }
}
