//! The shared key-value store behind the bridge: validated writes, per-key
//! sequence numbers, bounded subscriber queues, and whole-store reset.

use std::collections::VecDeque;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, SyncSender, TrySendError};
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::Duration;

use serde_json::Value;

use crate::schema::{self, ChannelKey, SchemaError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BridgeConfig {
    /// Events kept per stream key.
    pub retention: usize,
    /// Undelivered events a subscriber may hold before it is cut off.
    pub subscriber_depth: usize,
}

impl Default for BridgeConfig {
    fn default() -> Self {
        BridgeConfig { retention: 1024, subscriber_depth: 4096 }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BridgeError {
    #[error("payload is not JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Schema(#[from] SchemaError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Update {
    pub key: ChannelKey,
    pub seq: u64,
    /// The payload exactly as it was written.
    pub payload: Arc<str>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Event {
    Update(Update),
    /// The store was cleared; state must be fetched again. Counts resets
    /// since the bridge started, so a client watching through several
    /// subscriptions can tell one reset from the next.
    Reset(u64),
}

/// What a read returns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Snapshot {
    /// Latest write to a value key, if any, and the key's current seq.
    Value { seq: u64, payload: Option<Arc<str>> },
    /// Most recent retained events of a stream key, oldest first.
    Stream { seq: u64, events: Vec<(u64, Arc<str>)> },
}

struct Subscriber {
    id: u64,
    tx: SyncSender<Event>,
    overflowed: Arc<AtomicBool>,
}

#[derive(Default)]
struct KeyState {
    seq: u64,
    latest: Option<Arc<str>>,
    log: VecDeque<(u64, Arc<str>)>,
    subscribers: Vec<Subscriber>,
}

/// Delivers `event` to every subscriber; drops the ones that are gone or full.
fn fan_out(subscribers: &mut Vec<Subscriber>, event: &Event) {
    subscribers.retain(|s| match s.tx.try_send(event.clone()) {
        Ok(()) => true,
        Err(TrySendError::Full(_)) => {
            s.overflowed.store(true, Ordering::SeqCst);
            false
        }
        Err(TrySendError::Disconnected(_)) => false,
    });
}

pub struct Bridge {
    config: BridgeConfig,
    keys: [Mutex<KeyState>; 6],
    next_subscriber: AtomicU64,
    resets: AtomicU64,
}

/// A live feed of updates for one or more keys.
pub struct Subscription {
    rx: Receiver<Event>,
    overflowed: Arc<AtomicBool>,
}

impl Subscription {
    pub fn try_recv(&self) -> Option<Event> {
        self.rx.try_recv().ok()
    }

    /// `Ok(None)` on timeout, `Err(())` once the feed is closed.
    #[allow(clippy::result_unit_err)]
    pub fn recv_timeout(&self, timeout: Duration) -> Result<Option<Event>, ()> {
        match self.rx.recv_timeout(timeout) {
            Ok(e) => Ok(Some(e)),
            Err(RecvTimeoutError::Timeout) => Ok(None),
            Err(RecvTimeoutError::Disconnected) => Err(()),
        }
    }

    /// Everything delivered so far.
    pub fn drain(&self) -> Vec<Event> {
        self.rx.try_iter().collect()
    }

    /// Set when the bridge cut this subscriber off for falling behind.
    pub fn overflowed(&self) -> bool {
        self.overflowed.load(Ordering::SeqCst)
    }
}

impl Default for Bridge {
    fn default() -> Self {
        Bridge::new(BridgeConfig::default())
    }
}

impl Bridge {
    pub fn new(config: BridgeConfig) -> Self {
        Bridge {
            config,
            keys: Default::default(),
            next_subscriber: AtomicU64::new(0),
            resets: AtomicU64::new(0),
        }
    }

    pub fn config(&self) -> &BridgeConfig {
        &self.config
    }

    fn slot(key: ChannelKey) -> usize {
        ChannelKey::ALL.iter().position(|k| *k == key).expect("every key is in ALL")
    }

    fn lock(&self, key: ChannelKey) -> MutexGuard<'_, KeyState> {
        // a panic while holding a key lock leaves plain data behind; keep serving
        self.keys[Self::slot(key)].lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Validates and stores `payload`, returning its seq. A write to
    /// `Bridge_Reset` resets the whole store.
    pub fn set(&self, key: ChannelKey, payload: &str) -> Result<u64, BridgeError> {
        let value: Value = serde_json::from_str(payload).map_err(|e| BridgeError::Json(e.to_string()))?;
        schema::validate(key, &value)?;
        if key == ChannelKey::BridgeReset {
            return Ok(self.reset());
        }
        Ok(self.store(&mut self.lock(key), key, Arc::from(payload)))
    }

    pub fn set_value(&self, key: ChannelKey, payload: &Value) -> Result<u64, BridgeError> {
        self.set(key, &payload.to_string())
    }

    fn store(&self, state: &mut KeyState, key: ChannelKey, payload: Arc<str>) -> u64 {
        state.seq += 1;
        let seq = state.seq;
        if key.is_stream() {
            state.log.push_back((seq, payload.clone()));
            while state.log.len() > self.config.retention {
                state.log.pop_front();
            }
        }
        state.latest = Some(payload.clone());
        fan_out(&mut state.subscribers, &Event::Update(Update { key, seq, payload }));
        seq
    }

    /// Latest value, or for stream keys the last `count` events (default 1).
    pub fn get(&self, key: ChannelKey, count: Option<usize>) -> Snapshot {
        let state = self.lock(key);
        if key.is_stream() {
            let n = count.unwrap_or(1).min(state.log.len());
            let events = state.log.iter().skip(state.log.len() - n).cloned().collect();
            Snapshot::Stream { seq: state.seq, events }
        } else {
            Snapshot::Value { seq: state.seq, payload: state.latest.clone() }
        }
    }

    /// Feed of every later update to any of `keys`, in per-key seq order.
    pub fn subscribe(&self, keys: &[ChannelKey]) -> Subscription {
        let (tx, rx) = mpsc::sync_channel(self.config.subscriber_depth);
        let overflowed = Arc::new(AtomicBool::new(false));
        let id = self.next_subscriber.fetch_add(1, Ordering::SeqCst);
        for &key in keys {
            self.lock(key).subscribers.push(Subscriber { id, tx: tx.clone(), overflowed: overflowed.clone() });
        }
        Subscription { rx, overflowed }
    }

    /// Clears every key and zeroes every seq. Subscribers hear about it
    /// before any later write; the reset itself is then logged as the first
    /// `Bridge_Reset` event. Returns that event's seq.
    pub fn reset(&self) -> u64 {
        let mut guards: Vec<MutexGuard<'_, KeyState>> = ChannelKey::ALL.iter().map(|k| self.lock(*k)).collect();
        let epoch = self.resets.fetch_add(1, Ordering::SeqCst) + 1;
        let mut notified = std::collections::BTreeSet::new();
        let mut dropped = std::collections::BTreeSet::new();
        for g in guards.iter_mut() {
            g.seq = 0;
            g.latest = None;
            g.log.clear();
            // one notice per subscription, however many keys it watches
            for s in &g.subscribers {
                if !notified.insert(s.id) {
                    continue;
                }
                match s.tx.try_send(Event::Reset(epoch)) {
                    Ok(()) => {}
                    Err(TrySendError::Full(_)) => {
                        s.overflowed.store(true, Ordering::SeqCst);
                        dropped.insert(s.id);
                    }
                    Err(TrySendError::Disconnected(_)) => {
                        dropped.insert(s.id);
                    }
                }
            }
        }
        for g in guards.iter_mut() {
            g.subscribers.retain(|s| !dropped.contains(&s.id));
        }
        let slot = Self::slot(ChannelKey::BridgeReset);
        let payload: Arc<str> = Arc::from(schema::reset_payload().to_string());
        self.store(&mut guards[slot], ChannelKey::BridgeReset, payload)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ODOM: &str = r#"{"x":0,"y":0,"theta":0,"v":0,"omega":0}"#;

    fn feedback(ts: u64) -> String {
        format!(r#"{{"code":"waiting","message":"waiting for commands","ts":{ts}}}"#)
    }

    #[test]
    fn first_write_is_seq_one() {
        let b = Bridge::default();
        let sub = b.subscribe(&[ChannelKey::Odom]);
        assert_eq!(b.set(ChannelKey::Odom, ODOM).unwrap(), 1);
        assert_eq!(
            sub.try_recv(),
            Some(Event::Update(Update { key: ChannelKey::Odom, seq: 1, payload: Arc::from(ODOM) }))
        );
    }

    #[test]
    fn value_keys_keep_last_write() {
        let b = Bridge::default();
        assert_eq!(b.get(ChannelKey::Map, None), Snapshot::Value { seq: 0, payload: None });
        b.set(ChannelKey::Odom, ODOM).unwrap();
        let second = r#"{"x":1,"y":0,"theta":0,"v":0,"omega":0}"#;
        b.set(ChannelKey::Odom, second).unwrap();
        assert_eq!(b.get(ChannelKey::Odom, None), Snapshot::Value { seq: 2, payload: Some(Arc::from(second)) });
    }

    #[test]
    fn stream_keys_return_recent_events() {
        let b = Bridge::default();
        for ts in 1..=3 {
            b.set(ChannelKey::KirbyFeedback, &feedback(ts)).unwrap();
        }
        let Snapshot::Stream { seq, events } = b.get(ChannelKey::KirbyFeedback, Some(2)) else { panic!() };
        assert_eq!(seq, 3);
        assert_eq!(events, vec![(2, Arc::from(feedback(2))), (3, Arc::from(feedback(3)))]);
    }

    #[test]
    fn retention_is_bounded() {
        let b = Bridge::new(BridgeConfig { retention: 2, subscriber_depth: 16 });
        for ts in 1..=5 {
            b.set(ChannelKey::KirbyFeedback, &feedback(ts)).unwrap();
        }
        let Snapshot::Stream { events, .. } = b.get(ChannelKey::KirbyFeedback, Some(10)) else { panic!() };
        assert_eq!(events.iter().map(|e| e.0).collect::<Vec<_>>(), vec![4, 5]);
    }

    #[test]
    fn invalid_writes_leave_no_trace() {
        let b = Bridge::default();
        let sub = b.subscribe(&[ChannelKey::Kirby]);
        assert!(b.set(ChannelKey::Kirby, r#"{"cmd":"fly"}"#).is_err());
        assert!(b.set(ChannelKey::Kirby, "not json").is_err());
        assert_eq!(b.get(ChannelKey::Kirby, Some(5)), Snapshot::Stream { seq: 0, events: vec![] });
        assert!(sub.try_recv().is_none());
    }

    #[test]
    fn subscription_starts_now() {
        let b = Bridge::default();
        for _ in 0..5 {
            b.set(ChannelKey::Odom, ODOM).unwrap();
        }
        let sub = b.subscribe(&[ChannelKey::Odom]);
        b.set(ChannelKey::Odom, ODOM).unwrap();
        assert!(matches!(sub.try_recv(), Some(Event::Update(Update { seq: 6, .. }))));
    }

    #[test]
    fn slow_subscriber_is_cut_off() {
        let b = Bridge::new(BridgeConfig { retention: 8, subscriber_depth: 3 });
        let sub = b.subscribe(&[ChannelKey::Odom]);
        for _ in 0..5 {
            b.set(ChannelKey::Odom, ODOM).unwrap();
        }
        assert!(sub.overflowed());
        assert_eq!(sub.drain().len(), 3);
        assert_eq!(sub.recv_timeout(Duration::from_millis(1)), Err(()));
    }

    #[test]
    fn reset_clears_and_notifies_first() {
        let b = Bridge::default();
        let sub = b.subscribe(&[ChannelKey::Odom, ChannelKey::BridgeReset]);
        b.set(ChannelKey::Odom, ODOM).unwrap();
        b.set(ChannelKey::Odom, ODOM).unwrap();
        assert_eq!(b.set(ChannelKey::BridgeReset, r#"{"scope":"all"}"#).unwrap(), 1);
        assert_eq!(b.get(ChannelKey::Odom, None), Snapshot::Value { seq: 0, payload: None });
        assert_eq!(b.set(ChannelKey::Odom, ODOM).unwrap(), 1);
        let seen = sub.drain();
        assert_eq!(seen.len(), 5);
        assert_eq!(seen[2], Event::Reset(1));
        assert!(matches!(&seen[3], Event::Update(u) if u.key == ChannelKey::BridgeReset && u.seq == 1));
        assert!(matches!(&seen[4], Event::Update(u) if u.key == ChannelKey::Odom && u.seq == 1));
    }
}
