use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use anyhow::Context;
use clap::{Parser, Subcommand};
use log::{error, info};
use pointnav::bridge::{Bridge, BridgeConfig};
use pointnav::client::BridgeClient;
use pointnav::config::Tuning;
use pointnav::robot::{RobotNode, TcpPort};
use pointnav::schema::ChannelKey;
use pointnav::server::BridgeServer;
use pointnav::{scenario, world_file};

const DEFAULT_TCP: &str = "127.0.0.1:7410";
const DEFAULT_WS: &str = "127.0.0.1:7411";

#[derive(Parser)]
#[command(name = "pointnav", version, about = "Simulated robot steered by speech and pointing")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Serve the shared key-value store.
    Bridge {
        /// Framed-JSON TCP listener.
        #[arg(long, default_value = DEFAULT_TCP)]
        tcp: String,
        /// WebSocket listener for the console.
        #[arg(long, default_value = DEFAULT_WS)]
        ws: String,
        #[arg(long)]
        no_ws: bool,
        /// Events kept per stream key.
        #[arg(long, default_value_t = BridgeConfig::default().retention)]
        retention: usize,
        /// Undelivered events a subscriber may hold before it is cut off.
        #[arg(long, default_value_t = BridgeConfig::default().subscriber_depth)]
        subscriber_depth: usize,
    },
    /// Run the simulated robot against a bridge.
    Robot {
        #[arg(long)]
        world: PathBuf,
        #[arg(long, default_value = DEFAULT_TCP)]
        bridge: String,
        /// Simulation ticks per wall-clock second; defaults to real time.
        #[arg(long)]
        tick_rate: Option<f64>,
        /// Stop after this many ticks.
        #[arg(long)]
        ticks: Option<u64>,
        #[arg(long, default_value_t = 20)]
        connect_attempts: u32,
        #[arg(long, default_value_t = 250)]
        connect_delay_ms: u64,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Run a script against a world without any network.
    Scenario {
        #[arg(long)]
        world: PathBuf,
        #[arg(long)]
        script: PathBuf,
        /// Write every channel event here.
        #[arg(long)]
        transcript: Option<PathBuf>,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Clear every key on a running bridge.
    Reset {
        #[arg(long, default_value = DEFAULT_TCP)]
        bridge: String,
    },
    /// Check that a bridge answers.
    Health {
        #[arg(long, default_value = DEFAULT_TCP)]
        bridge: String,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse().command) {
        Ok(code) => code,
        Err(e) => {
            error!("{e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cmd: Cmd) -> anyhow::Result<ExitCode> {
    match cmd {
        Cmd::Bridge { tcp, ws, no_ws, retention, subscriber_depth } => {
            if retention == 0 || subscriber_depth == 0 {
                anyhow::bail!("retention and subscriber depth must be positive");
            }
            let bridge = Arc::new(Bridge::new(BridgeConfig { retention, subscriber_depth }));
            let ws = (!no_ws).then_some(ws.as_str());
            let server = BridgeServer::start(bridge, &tcp, ws)
                .with_context(|| format!("cannot start bridge on {tcp}{}", ws.map(|w| format!(" / {w}")).unwrap_or_default()))?;
            server.wait();
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Robot { world, bridge, tick_rate, ticks, connect_attempts, connect_delay_ms, tuning } => {
            let config = tuning.resolve()?;
            let world = world_file::load(&world)?;
            world.validate(config.sim.robot_radius).context("world file")?;
            let port = TcpPort::connect(&bridge, connect_attempts, Duration::from_millis(connect_delay_ms))
                .with_context(|| format!("bridge at {bridge} unreachable after {connect_attempts} attempts"))?;
            let real_dt = match tick_rate {
                Some(r) if r > 0.0 && r.is_finite() => 1.0 / r,
                Some(r) => anyhow::bail!("tick rate {r} must be positive"),
                None => config.sim.dt,
            };
            let mut node = RobotNode::start(port, world, config)?;
            info!("robot up{}", if node.resumed() { ", resumed from bridge state" } else { "" });
            let start = node.controller().now();
            node.run_every(Duration::from_secs_f64(real_dt), |n| ticks.is_some_and(|t| n.controller().now() - start >= t))?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Scenario { world, script, transcript, tuning } => {
            let config = tuning.resolve()?;
            let world = world_file::load(&world)?;
            let text = std::fs::read_to_string(&script).with_context(|| format!("cannot read {}", script.display()))?;
            let parsed = scenario::parse(&text).map_err(|e| anyhow::anyhow!("{}: {e}", script.display()))?;
            let report = scenario::run(world, config, &parsed)?;
            if let Some(path) = transcript {
                let mut body = report.transcript.join("\n");
                body.push('\n');
                std::fs::write(&path, body).with_context(|| format!("cannot write {}", path.display()))?;
            }
            for f in &report.feedback {
                println!("@{} {}", f.ts, f.message);
            }
            let p = report.final_pose;
            println!("{} ticks, final pose ({:.3}, {:.3}, {:.3})", report.ticks, p.x, p.y, p.theta);
            match &report.failure {
                None => {
                    println!("PASS");
                    Ok(ExitCode::SUCCESS)
                }
                Some(f) => {
                    println!("FAIL {f}");
                    Ok(ExitCode::FAILURE)
                }
            }
        }
        Cmd::Reset { bridge } => {
            let seq = BridgeClient::connect(&bridge)?.reset()?;
            println!("reset, Bridge_Reset seq {seq}");
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Health { bridge } => {
            let mut client = BridgeClient::connect(&bridge).with_context(|| format!("no bridge at {bridge}"))?;
            client.set_timeout(Duration::from_secs(2));
            let odom = client.get(ChannelKey::Odom, None)?;
            println!("ok, Odom seq {}", odom.seq.unwrap_or(0));
            Ok(ExitCode::SUCCESS)
        }
    }
}
