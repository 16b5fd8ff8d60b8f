//! Sub-slot decision wrapper for the discrete agents.
//!
//! A slot is split into `K` equal sub-slots, each spent in one [`Mode`]. The
//! wrapper accumulates the chosen shares and executes the whole slot on the
//! last sub-slot; intermediate decisions earn zero reward.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::action::{mode_share, ActionAllocation, Mode};
use super::dynamics::{encode_state_into, reset_unchecked, step, EnvModels, EnvState, StepOutcome};
use crate::error::{Error, Result};

/// Extra features appended to [`super::encode_state`] by the wrapper.
pub const SUBSLOT_EXTRA_FEATURES: usize = 8;

#[derive(Debug, Clone)]
pub struct SubSlotStep {
    pub reward: f64,
    pub done: bool,
    /// Present on the last sub-slot of a slot.
    pub slot: Option<StepOutcome>,
}

#[derive(Debug, Clone)]
pub struct SubSlotEnv {
    models: EnvModels,
    stationary: Vec<f64>,
    k: usize,
    state: EnvState,
    pending: ActionAllocation,
    position: usize,
    rng: ChaCha8Rng,
}

impl SubSlotEnv {
    pub fn new(models: EnvModels, k: usize, seed: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::config("sub_slots", "must be >= 1"));
        }
        models.validate()?;
        let stationary = models.channel.stationary();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let state = reset_unchecked(&models, &stationary, &mut rng)?;
        Ok(Self {
            models,
            stationary,
            k,
            state,
            pending: ActionAllocation::IDLE,
            position: 0,
            rng,
        })
    }

    pub fn models(&self) -> &EnvModels {
        &self.models
    }

    pub fn state(&self) -> &EnvState {
        &self.state
    }

    pub fn sub_slots(&self) -> usize {
        self.k
    }

    pub fn position(&self) -> usize {
        self.position
    }

    pub fn pending(&self) -> &ActionAllocation {
        &self.pending
    }

    /// Starts a fresh episode from the stationary channel distribution.
    pub fn reset(&mut self) -> Result<()> {
        self.state = reset_unchecked(&self.models, &self.stationary, &mut self.rng)?;
        self.pending = ActionAllocation::IDLE;
        self.position = 0;
        Ok(())
    }

    pub fn feature_len(&self) -> usize {
        self.models.feature_len() + SUBSLOT_EXTRA_FEATURES
    }

    pub fn features(&self) -> Vec<f64> {
        let mut f = vec![0.0; self.feature_len()];
        self.features_into(&mut f);
        f
    }

    pub fn features_into(&self, out: &mut [f64]) {
        let base = self.models.feature_len();
        encode_state_into(&self.state, &self.models, &mut out[..base]);
        let extra = &mut out[base..];
        let p = &self.pending;
        let phy = &self.models.phy;
        let norm = self.models.backlog_normalizer();

        let gain = self.models.channel.gain(self.state.channel_state);
        let active_power = phy.active_tx_power(gain).ok();
        let active_cap = if active_power.is_some() {
            phy.active_rate * p.t_a
        } else {
            0.0
        };
        let covered = active_cap + phy.passive_rate * p.t_p + phy.local_cpu_rate * p.l_loc;
        let due: f64 = self
            .state
            .backlog
            .iter()
            .filter(|t| t.slots_left <= 1)
            .map(|t| t.bits)
            .sum();
        let demand = active_power.unwrap_or(0.0) * p.t_a * phy.slot_seconds
            + phy.passive_circuit_power * p.t_p * phy.slot_seconds
            + phy.local_energy_per_bit * (phy.local_cpu_rate * p.l_loc).min(self.state.backlog_bits());
        let expected_harvest = phy.harvest_energy(gain, self.models.ambient.mean_density, p.t_h);

        extra[0] = self.position as f64 / self.k as f64;
        extra[1] = p.t_h;
        extra[2] = p.t_a;
        extra[3] = p.t_p;
        extra[4] = p.l_loc;
        extra[5] = (due - covered).max(0.0) / norm;
        extra[6] = (self.state.backlog_bits() - covered).max(0.0) / norm;
        extra[7] = ((self.state.energy + expected_harvest - demand) / self.models.battery_capacity).clamp(-1.0, 2.0);
    }

    /// Commits `mode` for the current sub-slot; on the last sub-slot the
    /// accumulated allocation is executed as one environment step.
    pub fn step_mode(&mut self, mode: Mode) -> Result<SubSlotStep> {
        let share = mode_share(mode, 1.0 / self.k as f64);
        self.pending = self.pending.plus(&share);
        self.position += 1;
        if self.position < self.k {
            return Ok(SubSlotStep {
                reward: 0.0,
                done: false,
                slot: None,
            });
        }
        let alloc = clamp_shares(self.pending);
        let outcome = step(&self.state, &alloc, &self.models, &mut self.rng)?;
        self.state = outcome.next_state.clone();
        self.pending = ActionAllocation::IDLE;
        self.position = 0;
        Ok(SubSlotStep {
            reward: outcome.reward,
            done: outcome.done,
            slot: Some(outcome),
        })
    }

    /// Executes a full-slot allocation directly (continuous agents).
    pub fn step_allocation(&mut self, alloc: &ActionAllocation) -> Result<StepOutcome> {
        if self.position != 0 {
            return Err(Error::InvalidAction(
                "cannot execute a full slot in the middle of a sub-slot sequence".into(),
            ));
        }
        let outcome = step(&self.state, alloc, &self.models, &mut self.rng)?;
        self.state = outcome.next_state.clone();
        Ok(outcome)
    }
}

/// Removes the rounding excess of summed `1/K` shares.
pub(crate) fn clamp_shares(a: ActionAllocation) -> ActionAllocation {
    let mut a = ActionAllocation {
        t_h: a.t_h.clamp(0.0, 1.0),
        t_a: a.t_a.clamp(0.0, 1.0),
        t_p: a.t_p.clamp(0.0, 1.0),
        l_loc: a.l_loc.clamp(0.0, 1.0),
    };
    let radio = a.radio_share();
    if radio > 1.0 {
        a.t_h /= radio;
        a.t_a /= radio;
        a.t_p /= radio;
    }
    a
}
