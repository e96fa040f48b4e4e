//! Q-learning.
//!
//! * [`ReplayBuffer`]: FIFO experience store sampled uniformly with replacement.
//! * [`QNetwork`]: a one-hidden-layer action-value network trained by plain
//!   gradient descent on the squared TD error
//!   `(r + γ·maxₐ' Q(s', a') − Q(s, a))²`, with the bootstrap target held
//!   constant (semi-gradient).
//! * [`QTable`]: the tabular update, used as an oracle-checkable reference.
//! * [`select_action`] and [`epsilon_at`]: epsilon-greedy control.

mod network;
mod policy;
mod replay;
mod tabular;

use thiserror::Error;

pub use network::{Activation, LearnerConfig, QNetwork};
pub use policy::{argmax, epsilon_at, select_action};
pub use replay::{ReplayBuffer, Transition};
pub use tabular::QTable;

#[derive(Debug, Error, PartialEq)]
pub enum QError {
    #[error("expected {expected} features, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("replay buffer holds {have} transitions, batch needs {need}")]
    UnderfilledBuffer { have: usize, need: usize },
    #[error("empty batch")]
    EmptyBatch,
    #[error("action {action} out of range for {count} actions")]
    ActionOutOfRange { action: usize, count: usize },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}
