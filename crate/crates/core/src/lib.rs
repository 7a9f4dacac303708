//! Core algorithms for a simulated, language-steered navigation robot.
//!
//! Everything in this crate is pure computation over owned values: the
//! ground-truth world simulator, LIDAR line-segment mapping, the command queue
//! state machine, grid planning, the command parser and reference grounding,
//! and the controller loop that ties them together one tick at a time.
//! IO, wire formats and processes live in the `pointnav` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod command;
pub mod controller;
pub mod geometry;
pub mod language;
pub mod mapping;
mod math;
pub mod navigation;
pub mod world;

pub use command::{Command, Feedback, FeedbackCode, FeedbackEvent, QueueState, TurnDirection};
pub use controller::{Controller, ControllerConfig, Inbound, Outbound};
pub use geometry::{DisplayBox, DisplayPoint, Point, Pose2D, Segment2D};
pub use mapping::{MapConfig, PerceivedMap};
pub use navigation::{NavConfig, OccupancyGrid, Path};
pub use world::{FiducialObservation, LidarScan, RobotState, SimConfig, WorldSpec};
