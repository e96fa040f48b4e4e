//! A deterministic two-player line-wars environment for reinforcement
//! learning research.
//!
//! Two players share a 30×11 board. Each sends units that walk straight
//! across to the opponent's base and builds towers on its own half to shoot
//! incoming units down. Sending units raises income; leaking a unit into the
//! enemy base costs the enemy one health.
//!
//! The crate is organised around the data flow of a training loop:
//!
//! * [`game`] simulates the match tick by tick from a [`SimConfig`] and a seed.
//! * [`encoders`] turns a state into the network's view of it: a 5-channel
//!   tensor, RGB and grayscale heat-maps and an economy vector.
//! * [`rewards`] composes a scalar reward from weighted, named components.
//! * [`qlearning`] holds replay, the action-value network and tabular Q-learning.
//! * [`agents`] has baseline policies and the episode loop.
//! * [`server`] speaks a newline-delimited JSON protocol for external agents.
//! * [`experiment`] drives seeded multi-episode runs and writes CSV logs.

pub mod action;
pub mod agents;
pub mod config;
pub mod encoders;
pub mod experiment;
pub mod frame;
pub mod game;
pub mod qlearning;
pub mod rewards;
pub mod server;

pub use action::Action;
pub use config::{ColumnRange, SimConfig, TowerKind, UnitKind};
pub use game::{Event, EventKind, GameError, GameState, Outcome, PlayerId};
