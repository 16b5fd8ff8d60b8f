//! Slotted hybrid-offloading environment: Markov channel, RF energy
//! harvesting, deadline-constrained workload and the energy-efficiency
//! reward.

mod action;
mod channel;
mod dynamics;
mod radio;
mod subslot;

pub use action::{quantize_action, ActionAllocation, Mode, SHARE_TOLERANCE};
pub use channel::ChannelModel;
pub use dynamics::{
    encode_state, reset, reset_with, resolve_slot, reward, step, EnvModels, EnvState, RewardParams, SlotResolution,
    StepOutcome, Task,
};
pub use radio::{AmbientDistribution, AmbientPowerModel, ArrivalDistribution, PhyParams, WorkloadModel};
pub use subslot::{SubSlotEnv, SubSlotStep, SUBSLOT_EXTRA_FEATURES};

pub(crate) use action::mode_share;
pub(crate) use subslot::clamp_shares;

impl Default for EnvModels {
    fn default() -> Self {
        Self {
            channel: ChannelModel::birth_death(vec![0.2, 0.5, 1.0, 2.0], 0.6).expect("default channel is valid"),
            phy: PhyParams {
                hbs_tx_power: 0.01,
                harvest_efficiency: 0.6,
                noise_power: 0.01,
                bandwidth: 1000.0,
                active_rate: 4000.0,
                passive_rate: 800.0,
                passive_circuit_power: 0.01,
                local_cpu_rate: 1000.0,
                local_energy_per_bit: 1e-4,
                max_active_tx_power: 2.0,
                slot_seconds: 1.0,
            },
            ambient: AmbientPowerModel {
                mean_density: 0.1,
                distribution: AmbientDistribution::Exponential,
            },
            workload: WorkloadModel {
                arrival: ArrivalDistribution::Constant { bits: 900.0 },
                deadline_slots: 2,
            },
            battery_capacity: 0.5,
            initial_energy: 0.25,
            reward: RewardParams::default(),
            episode_slots: 200,
        }
    }
}
