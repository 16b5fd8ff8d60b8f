//! Value-based (DQN, double DQN, dueling double DQN) and actor-critic (DDPG)
//! learners.

pub mod checkpoint;
mod ddpg;
mod dqn;
mod qnet;
mod schedule;

pub use ddpg::{
    allocation_from, project_allocation, project_allocation_vjp, DdpgAgent, DdpgConfig, DdpgDiagnostics, ALLOCATION_DIM,
};
pub use dqn::{DqnAgent, DqnConfig, DqnVariant, TrainDiagnostics};
pub use qnet::{dueling_q, QCache, QNetwork};
pub use schedule::LinearSchedule;
