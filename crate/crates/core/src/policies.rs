//! Non-learning baselines (random, myopic greedy) and the action mask that
//! turns the hybrid learner into the active-only one.

use rand::Rng;

use crate::env::{clamp_shares, mode_share, resolve_slot, ActionAllocation, EnvModels, EnvState, Mode};
use crate::error::{Error, Result};

/// Subset of modes an agent may choose from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ActionMask {
    allowed: [bool; Mode::COUNT],
}

impl ActionMask {
    pub fn full() -> Self {
        Self {
            allowed: [true; Mode::COUNT],
        }
    }

    /// Conventional offloading: no backscatter radio.
    pub fn active_offload() -> Self {
        Self::new(&[Mode::Harvest, Mode::Active, Mode::Local]).expect("nonempty")
    }

    pub fn new(modes: &[Mode]) -> Result<Self> {
        let mut allowed = [false; Mode::COUNT];
        for m in modes {
            allowed[m.index()] = true;
        }
        if !allowed.iter().any(|a| *a) {
            return Err(Error::EmptyMask);
        }
        Ok(Self { allowed })
    }

    pub fn allows(&self, mode: Mode) -> bool {
        self.allowed[mode.index()]
    }

    pub fn modes(&self) -> Vec<Mode> {
        Mode::ALL.iter().copied().filter(|m| self.allows(*m)).collect()
    }

    pub fn bits(&self) -> [bool; Mode::COUNT] {
        self.allowed
    }

    /// Keeps only the allowed members of `set`.
    pub fn restrict(&self, set: &[Mode]) -> Result<Vec<Mode>> {
        let out: Vec<Mode> = set.iter().copied().filter(|m| self.allows(*m)).collect();
        if out.is_empty() {
            Err(Error::EmptyMask)
        } else {
            Ok(out)
        }
    }
}

impl Default for ActionMask {
    fn default() -> Self {
        Self::full()
    }
}

/// Argmax over the allowed entries of `values`, lowest index on ties.
/// Entries beyond the mask's length are treated as allowed.
pub fn apply_mask(allowed: &[bool], values: &[f64]) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in values.iter().enumerate() {
        if !allowed.get(i).copied().unwrap_or(true) {
            continue;
        }
        match best {
            Some((_, b)) if v <= b => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i).ok_or(Error::EmptyMask)
}

/// One uniformly random allowed mode.
pub fn random_mode<R: Rng + ?Sized>(mask: &ActionMask, rng: &mut R) -> Mode {
    let modes = mask.modes();
    modes[rng.random_range(0..modes.len())]
}

/// Independent uniform modes for each of the `k` sub-slots.
pub fn random_policy<R: Rng + ?Sized>(mask: &ActionMask, k: usize, rng: &mut R) -> Vec<Mode> {
    (0..k).map(|_| random_mode(mask, rng)).collect()
}

/// Myopic choice for sub-slot `position`: each allowed mode is assumed to
/// fill the rest of the slot on top of the `pending` shares, the slot is
/// resolved at the mean ambient power, and the highest instant reward wins
/// (harvest < active < passive < local on ties).
pub fn greedy_policy(
    state: &EnvState,
    pending: &ActionAllocation,
    position: usize,
    models: &EnvModels,
    mask: &ActionMask,
    k: usize,
) -> Result<Mode> {
    if k == 0 || position >= k {
        return Err(Error::InvalidAction(format!(
            "sub-slot position {position} invalid for K = {k}"
        )));
    }
    let rest = (k - position) as f64 / k as f64;
    let ambient = models.ambient.mean_density;
    let mut best: Option<(Mode, f64)> = None;
    for mode in mask.modes() {
        let alloc = clamp_shares(pending.plus(&mode_share(mode, rest)));
        let r = resolve_slot(state, &alloc, models, ambient)?.reward;
        match best {
            Some((_, b)) if r <= b => {}
            _ => best = Some((mode, r)),
        }
    }
    best.map(|(m, _)| m).ok_or(Error::EmptyMask)
}
