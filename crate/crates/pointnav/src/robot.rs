//! The robot process: a [`Controller`] wired to a bridge through a [`Port`].
//!
//! On start the node reads back Odom, Map and Fiducials. If Odom is present a
//! previous robot process was running, and the controller resumes from that
//! pose, map and fiducial list instead of the world file's start pose. Pending
//! commands are not carried over. A bridge reset puts the robot back at its
//! start pose with an empty map.

use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use log::{debug, info, warn};
use pointnav_core::{Controller, ControllerConfig, WorldSpec};
use serde::de::DeserializeOwned;
use serde_json::Value;

use crate::bridge::{Bridge, Event, Snapshot, Subscription};
use crate::client::{BridgeClient, ClientError, Push};
use crate::schema::{self, ChannelKey, FiducialsPayload, MapPayload, OdomPayload};

#[derive(Debug, thiserror::Error)]
pub enum PortError {
    #[error(transparent)]
    Client(#[from] ClientError),
    #[error(transparent)]
    Bridge(#[from] crate::bridge::BridgeError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PortEvent {
    /// Raw JSON written to Kirby.
    Kirby(String),
    Reset,
}

/// How the robot reaches the bridge.
pub trait Port {
    fn publish(&mut self, key: ChannelKey, payload: &Value) -> Result<u64, PortError>;
    /// Latest value of a value key.
    fn fetch(&mut self, key: ChannelKey) -> Result<Option<String>, PortError>;
    /// Everything that arrived since the last poll; never blocks.
    fn poll(&mut self) -> Result<Vec<PortEvent>, PortError>;
}

const INBOUND: [ChannelKey; 2] = [ChannelKey::Kirby, ChannelKey::BridgeReset];

/// Talks to a bridge in the same process.
pub struct LocalPort {
    bridge: Arc<Bridge>,
    sub: Subscription,
}

impl LocalPort {
    pub fn new(bridge: Arc<Bridge>) -> Self {
        let sub = bridge.subscribe(&INBOUND);
        LocalPort { bridge, sub }
    }
}

fn to_port_event(e: Event) -> Option<PortEvent> {
    match e {
        Event::Update(u) if u.key == ChannelKey::Kirby => Some(PortEvent::Kirby(u.payload.to_string())),
        Event::Update(_) => None,
        Event::Reset(_) => Some(PortEvent::Reset),
    }
}

impl Port for LocalPort {
    fn publish(&mut self, key: ChannelKey, payload: &Value) -> Result<u64, PortError> {
        Ok(self.bridge.set_value(key, payload)?)
    }

    fn fetch(&mut self, key: ChannelKey) -> Result<Option<String>, PortError> {
        Ok(match self.bridge.get(key, None) {
            Snapshot::Value { payload, .. } => payload.map(|p| p.to_string()),
            Snapshot::Stream { .. } => None,
        })
    }

    fn poll(&mut self) -> Result<Vec<PortEvent>, PortError> {
        let events = self.sub.drain();
        if self.sub.overflowed() {
            warn!("robot fell behind the bridge; commands were lost");
            self.sub = self.bridge.subscribe(&INBOUND);
        }
        Ok(events.into_iter().filter_map(to_port_event).collect())
    }
}

/// Talks to a bridge over TCP.
pub struct TcpPort {
    client: BridgeClient,
}

impl TcpPort {
    pub fn connect(addr: &str, attempts: u32, delay: Duration) -> Result<Self, PortError> {
        let mut client = BridgeClient::connect_with_retry(addr, attempts, delay)?;
        for key in INBOUND {
            client.subscribe(key)?;
        }
        Ok(TcpPort { client })
    }
}

impl Port for TcpPort {
    fn publish(&mut self, key: ChannelKey, payload: &Value) -> Result<u64, PortError> {
        Ok(self.client.set(key, payload)?)
    }

    fn fetch(&mut self, key: ChannelKey) -> Result<Option<String>, PortError> {
        Ok(self.client.get(key, None)?.payload.filter(|p| p != "null"))
    }

    fn poll(&mut self) -> Result<Vec<PortEvent>, PortError> {
        let mut out = Vec::new();
        while let Some(push) = self.client.try_push() {
            match push {
                Push::Update { key: ChannelKey::Kirby, payload, .. } => out.push(PortEvent::Kirby(payload)),
                Push::Update { .. } => {}
                Push::Reset => out.push(PortEvent::Reset),
                Push::Error { key, error } => {
                    warn!("bridge dropped our subscription: {error}");
                    if let Some(key) = key {
                        self.client.subscribe(key)?;
                    }
                }
            }
        }
        Ok(out)
    }
}

fn read_back<T: DeserializeOwned>(port: &mut impl Port, key: ChannelKey) -> Result<Option<T>, PortError> {
    let Some(text) = port.fetch(key)? else { return Ok(None) };
    match serde_json::from_str(&text) {
        Ok(v) => Ok(Some(v)),
        Err(e) => {
            warn!("ignoring unreadable {key} on the bridge: {e}");
            Ok(None)
        }
    }
}

pub struct RobotNode<P: Port> {
    port: P,
    world: WorldSpec,
    controller: Controller,
    resumed: bool,
}

impl<P: Port> RobotNode<P> {
    pub fn start(mut port: P, world: WorldSpec, config: ControllerConfig) -> anyhow::Result<Self> {
        let odom: Option<OdomPayload> = read_back(&mut port, ChannelKey::Odom)?;
        let (controller, resumed) = match odom {
            Some(o) => {
                let map = read_back::<MapPayload>(&mut port, ChannelKey::Map)?
                    .map(|m| schema::map_from_payload(&m))
                    .unwrap_or_default();
                let fiducials = read_back::<FiducialsPayload>(&mut port, ChannelKey::Fiducials)?
                    .map(|f| schema::fiducials_from_payload(&f))
                    .unwrap_or_default();
                let pose = pointnav_core::Pose2D::new(o.x, o.y, o.theta);
                info!("resuming at ({:.3}, {:.3}) with {} segments, {} fiducials", pose.x, pose.y, map.segments.len(), fiducials.len());
                (Controller::resume(world.clone(), config, pose, map, fiducials)?, true)
            }
            None => (Controller::new(world.clone(), config)?, false),
        };
        let mut node = RobotNode { port, world, controller, resumed };
        node.controller.startup();
        node.flush()?;
        Ok(node)
    }

    pub fn controller(&self) -> &Controller {
        &self.controller
    }

    pub fn controller_mut(&mut self) -> &mut Controller {
        &mut self.controller
    }

    pub fn port_mut(&mut self) -> &mut P {
        &mut self.port
    }

    /// Whether this node picked up state left by an earlier one.
    pub fn resumed(&self) -> bool {
        self.resumed
    }

    fn flush(&mut self) -> Result<(), PortError> {
        for out in self.controller.drain_outbox() {
            let (key, value) = schema::encode_outbound(&out);
            self.port.publish(key, &value)?;
        }
        Ok(())
    }

    /// Takes in bridge traffic, then advances one tick and publishes.
    pub fn step(&mut self) -> anyhow::Result<()> {
        for event in self.port.poll()? {
            match event {
                PortEvent::Kirby(text) => {
                    let decoded = serde_json::from_str::<Value>(&text)
                        .map_err(|e| e.to_string())
                        .and_then(|v| schema::decode_kirby(&v).map_err(|e| e.to_string()));
                    match decoded {
                        Ok(inbound) => {
                            debug!("kirby {inbound:?}");
                            self.controller.handle(inbound);
                        }
                        // the bridge validates writes, so this is a version mismatch
                        Err(e) => warn!("dropping Kirby message: {e}"),
                    }
                }
                PortEvent::Reset => {
                    info!("bridge reset; back to the start pose");
                    let config = self.controller.config().clone();
                    self.controller = Controller::new(self.world.clone(), config)?;
                    self.resumed = false;
                    self.controller.startup();
                }
            }
        }
        self.controller.tick();
        self.flush()?;
        Ok(())
    }

    /// Steps once per `period` of wall-clock time until `until` returns true.
    pub fn run_every(&mut self, period: Duration, mut until: impl FnMut(&Self) -> bool) -> anyhow::Result<()> {
        let mut next = Instant::now();
        while !until(self) {
            self.step()?;
            next += period;
            let now = Instant::now();
            if next > now {
                thread::sleep(next - now);
            } else {
                next = now;
            }
        }
        Ok(())
    }
}
