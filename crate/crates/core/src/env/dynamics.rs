//! Slot dynamics: energy budget, workload drain, deadlines, reward.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::action::ActionAllocation;
use super::channel::{sample_categorical, ChannelModel};
use super::radio::{AmbientPowerModel, PhyParams, WorkloadModel};
use crate::error::{Error, Result};

/// Remaining work below this many bits counts as finished.
const BIT_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardParams {
    /// Added to the slot's energy in the denominator (J).
    pub energy_floor: f64,
    /// Multiplier on bits/J.
    pub scale: f64,
}

impl Default for RewardParams {
    fn default() -> Self {
        Self {
            energy_floor: 1e-6,
            scale: 1e-5,
        }
    }
}

/// Everything `step` needs besides the state and the action.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvModels {
    pub channel: ChannelModel,
    pub phy: PhyParams,
    pub ambient: AmbientPowerModel,
    pub workload: WorkloadModel,
    pub battery_capacity: f64,
    pub initial_energy: f64,
    pub reward: RewardParams,
    /// Slots per episode; the terminal flag is raised only at this horizon.
    pub episode_slots: u64,
}

impl EnvModels {
    pub fn validate(&self) -> Result<()> {
        self.phy.validate(self.channel.gains())?;
        self.ambient.validate()?;
        self.workload.validate()?;
        if !(self.battery_capacity.is_finite() && self.battery_capacity > 0.0) {
            return Err(Error::config("battery_capacity", "must be finite and > 0"));
        }
        if !(0.0..=self.battery_capacity).contains(&self.initial_energy) {
            return Err(Error::config("initial_energy", "must lie in [0, battery_capacity]"));
        }
        if !(self.reward.energy_floor > 0.0 && self.reward.scale > 0.0) {
            return Err(Error::config(
                "reward_energy_floor",
                "reward floor and scale must be > 0",
            ));
        }
        if self.episode_slots == 0 {
            return Err(Error::config("episode_slots", "must be >= 1"));
        }
        Ok(())
    }

    /// Normalizer for the backlog feature: the most work that can be queued.
    pub fn backlog_normalizer(&self) -> f64 {
        let n = self.workload.arrival.max_bits() * self.workload.deadline_slots as f64;
        if n > 0.0 {
            n
        } else {
            1.0
        }
    }

    /// Length of [`encode_state`]'s output.
    pub fn feature_len(&self) -> usize {
        self.channel.num_states() + 3
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Task {
    pub bits: f64,
    pub slots_left: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvState {
    pub channel_state: usize,
    pub energy: f64,
    /// Ordered by deadline, earliest first.
    pub backlog: Vec<Task>,
    pub slot_index: u64,
}

impl EnvState {
    pub fn backlog_bits(&self) -> f64 {
        self.backlog.iter().map(|t| t.bits).sum()
    }

    pub fn min_slots_left(&self) -> Option<u32> {
        self.backlog.iter().map(|t| t.slots_left).min()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub next_state: EnvState,
    pub reward: f64,
    pub processed_bits: f64,
    pub bits_active: f64,
    pub bits_passive: f64,
    pub bits_local: f64,
    pub energy_spent: f64,
    pub energy_harvested: f64,
    pub outage: bool,
    pub allocation_executed: ActionAllocation,
    /// Set on the last slot of an episode.
    pub done: bool,
}

/// Deterministic part of a slot, given the ambient draw. Shared by `step`
/// and by planners that need to preview a slot.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotResolution {
    pub executed: ActionAllocation,
    pub harvested: f64,
    pub spent: f64,
    pub bits_active: f64,
    pub bits_passive: f64,
    pub bits_local: f64,
    pub outage: bool,
    pub reward: f64,
    /// Backlog after draining and deadline expiry, before the new arrival.
    pub backlog: Vec<Task>,
    pub energy: f64,
}

impl SlotResolution {
    pub fn processed_bits(&self) -> f64 {
        self.bits_active + self.bits_passive + self.bits_local
    }
}

/// Energy-efficiency reward: scaled bits per joule, zero on outage.
pub fn reward(processed_bits: f64, energy_spent: f64, outage: bool, params: &RewardParams) -> f64 {
    if outage || processed_bits <= 0.0 {
        return 0.0;
    }
    processed_bits / (energy_spent + params.energy_floor) * params.scale
}

/// Resolves one slot with a known ambient power draw.
pub fn resolve_slot(
    state: &EnvState,
    action: &ActionAllocation,
    models: &EnvModels,
    ambient: f64,
) -> Result<SlotResolution> {
    action.validate()?;
    let phy = &models.phy;
    let slot = phy.slot_seconds;
    let gain = models.channel.gain(state.channel_state);
    let harvested = phy.harvest_energy(gain, ambient, action.t_h);
    let budget = state.energy + harvested;
    let backlog_bits = state.backlog_bits();

    let mut exec = *action;
    // Deep fade: the active share is a free no-op.
    let active_power = match phy.active_tx_power(gain) {
        Ok(p) => p,
        Err(_) => {
            exec.t_a = 0.0;
            0.0
        }
    };

    let mut cost_active = active_power * exec.t_a * slot;
    let mut cost_passive = phy.passive_circuit_power * exec.t_p * slot;
    let mut local_bits = (phy.local_cpu_rate * exec.l_loc).min(backlog_bits);
    let mut cost_local = phy.local_energy_per_bit * local_bits;

    let mut excess = cost_active + cost_passive + cost_local - budget;
    if excess > 0.0 {
        // Shrink active, then passive, then local until the demand fits.
        if cost_active > 0.0 {
            let cut = excess.min(cost_active);
            exec.t_a *= (cost_active - cut) / cost_active;
            cost_active -= cut;
            excess -= cut;
        }
        if excess > 0.0 && cost_passive > 0.0 {
            let cut = excess.min(cost_passive);
            exec.t_p *= (cost_passive - cut) / cost_passive;
            cost_passive -= cut;
            excess -= cut;
        }
        if excess > 0.0 && cost_local > 0.0 {
            let cut = excess.min(cost_local);
            cost_local -= cut;
            local_bits = cost_local / phy.local_energy_per_bit;
            exec.l_loc = local_bits / phy.local_cpu_rate;
        }
    }
    let spent = (cost_active + cost_passive + cost_local).min(budget);

    let mut remaining = backlog_bits;
    let mut take = |capacity: f64| {
        let bits = capacity.min(remaining).max(0.0);
        remaining -= bits;
        bits
    };
    let bits_active = take(phy.active_rate * exec.t_a);
    let bits_passive = take(phy.passive_rate * exec.t_p);
    let bits_local = take(local_bits);

    // Drain earliest deadline first, then age the queue.
    let mut to_drain = bits_active + bits_passive + bits_local;
    let mut backlog = Vec::with_capacity(state.backlog.len() + 1);
    let mut outage = false;
    for task in &state.backlog {
        let done = to_drain.min(task.bits);
        to_drain -= done;
        let bits = task.bits - done;
        if bits <= BIT_EPSILON {
            continue;
        }
        let slots_left = task.slots_left.saturating_sub(1);
        if slots_left == 0 {
            outage = true;
        } else {
            backlog.push(Task { bits, slots_left });
        }
    }

    let processed = bits_active + bits_passive + bits_local;
    let energy = (budget - spent).clamp(0.0, models.battery_capacity);
    Ok(SlotResolution {
        executed: exec,
        harvested,
        spent,
        bits_active,
        bits_passive,
        bits_local,
        outage,
        reward: reward(processed, spent, outage, &models.reward),
        backlog,
        energy,
    })
}

/// Advances the environment by one slot. Random draws are taken in a fixed
/// order: ambient power, arrival size, channel transition.
pub fn step<R: Rng + ?Sized>(
    state: &EnvState,
    action: &ActionAllocation,
    models: &EnvModels,
    rng: &mut R,
) -> Result<StepOutcome> {
    action.validate()?;
    let ambient = models.ambient.sample(rng);
    let arrival = models.workload.sample(rng);
    let next_channel = models.channel.step(state.channel_state, rng);

    let res = resolve_slot(state, action, models, ambient)?;
    let mut backlog = res.backlog.clone();
    if arrival > BIT_EPSILON {
        backlog.push(Task {
            bits: arrival,
            slots_left: models.workload.deadline_slots,
        });
    }
    let slot_index = state.slot_index + 1;
    Ok(StepOutcome {
        next_state: EnvState {
            channel_state: next_channel,
            energy: res.energy,
            backlog,
            slot_index,
        },
        reward: res.reward,
        processed_bits: res.processed_bits(),
        bits_active: res.bits_active,
        bits_passive: res.bits_passive,
        bits_local: res.bits_local,
        energy_spent: res.spent,
        energy_harvested: res.harvested,
        outage: res.outage,
        allocation_executed: res.executed,
        done: slot_index.is_multiple_of(models.episode_slots),
    })
}

/// Feature vector: one-hot channel, energy fill, backlog fill, and the
/// nearest deadline over D (1 for an empty backlog).
pub fn encode_state(state: &EnvState, models: &EnvModels) -> Vec<f64> {
    let mut f = vec![0.0; models.feature_len()];
    encode_state_into(state, models, &mut f);
    f
}

pub(crate) fn encode_state_into(state: &EnvState, models: &EnvModels, out: &mut [f64]) {
    let n = models.channel.num_states();
    out[..n].iter_mut().for_each(|x| *x = 0.0);
    out[state.channel_state] = 1.0;
    out[n] = state.energy / models.battery_capacity;
    out[n + 1] = state.backlog_bits() / models.backlog_normalizer();
    out[n + 2] = match state.min_slots_left() {
        Some(s) => s as f64 / models.workload.deadline_slots as f64,
        None => 1.0,
    };
}

/// Initial state: stationary channel draw, configured energy, one arrival.
pub fn reset(models: &EnvModels, seed: u64) -> Result<EnvState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    reset_with(models, &mut rng)
}

pub fn reset_with<R: Rng + ?Sized>(models: &EnvModels, rng: &mut R) -> Result<EnvState> {
    models.validate()?;
    reset_unchecked(models, &models.channel.stationary(), rng)
}

/// `reset_with` without revalidating; `stationary` must come from
/// `models.channel.stationary()`.
pub(crate) fn reset_unchecked<R: Rng + ?Sized>(
    models: &EnvModels,
    stationary: &[f64],
    rng: &mut R,
) -> Result<EnvState> {
    let channel_state = sample_categorical(stationary, rng);
    let bits = models.workload.sample(rng);
    let backlog = if bits > BIT_EPSILON {
        vec![Task {
            bits,
            slots_left: models.workload.deadline_slots,
        }]
    } else {
        Vec::new()
    };
    Ok(EnvState {
        channel_state,
        energy: models.initial_energy,
        backlog,
        slot_index: 0,
    })
}
