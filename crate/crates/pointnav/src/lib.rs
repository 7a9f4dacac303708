//! Std-side runtime around `pointnav-core`: the key-value bridge and its
//! wire protocol, a robot process that talks to it, and a scripted scenario
//! runner.

pub mod bridge;
pub mod client;
pub mod schema;
pub mod server;
pub mod wire;
pub mod robot;
pub mod scenario;
pub mod world_file;
pub mod config;
