//! Hybrid backscatter/active mobile-edge-computing offloading: a slotted
//! environment, DQN-family and DDPG learners, non-learning baselines and an
//! experiment harness.

pub mod agents;
pub mod env;
pub mod error;
pub mod harness;
pub mod nn;
pub mod policies;
pub mod replay;

pub use error::{Error, Result};
