//! Experience replay: a uniform ring buffer and proportional prioritized
//! replay backed by a sum tree.

mod buffer;
mod sum_tree;

pub use buffer::{ActionRepr, PrioritizedBuffer, PrioritizedSample, ReplayBuffer, Transition};
pub use sum_tree::SumTree;
