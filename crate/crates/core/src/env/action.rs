use crate::error::{Error, Result};

/// Tolerance for the radio-time budget `t_h + t_a + t_p <= 1`, which sums of
/// `1/K` shares only meet up to rounding.
pub const SHARE_TOLERANCE: f64 = 1e-9;

/// Per-slot time shares: harvesting, active offloading and backscatter
/// share the radio; `l_loc` is the CPU share and runs concurrently.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ActionAllocation {
    pub t_h: f64,
    pub t_a: f64,
    pub t_p: f64,
    pub l_loc: f64,
}

impl ActionAllocation {
    pub const IDLE: ActionAllocation = ActionAllocation {
        t_h: 0.0,
        t_a: 0.0,
        t_p: 0.0,
        l_loc: 0.0,
    };

    pub fn new(t_h: f64, t_a: f64, t_p: f64, l_loc: f64) -> Result<Self> {
        let a = Self { t_h, t_a, t_p, l_loc };
        a.validate()?;
        Ok(a)
    }

    pub fn radio_share(&self) -> f64 {
        self.t_h + self.t_a + self.t_p
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("t_h", self.t_h),
            ("t_a", self.t_a),
            ("t_p", self.t_p),
            ("l_loc", self.l_loc),
        ] {
            if !(v.is_finite() && (-SHARE_TOLERANCE..=1.0 + SHARE_TOLERANCE).contains(&v)) {
                return Err(Error::InvalidAction(format!("{name} = {v} outside [0, 1]")));
            }
        }
        if self.radio_share() > 1.0 + SHARE_TOLERANCE {
            return Err(Error::InvalidAction(format!(
                "radio shares sum to {} > 1",
                self.radio_share()
            )));
        }
        Ok(())
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_ok()
    }

    pub fn plus(&self, other: &ActionAllocation) -> ActionAllocation {
        ActionAllocation {
            t_h: self.t_h + other.t_h,
            t_a: self.t_a + other.t_a,
            t_p: self.t_p + other.t_p,
            l_loc: self.l_loc + other.l_loc,
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.t_h, self.t_a, self.t_p, self.l_loc]
    }
}

/// Operating mode of one sub-slot for the discrete agents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    Harvest,
    Active,
    Passive,
    Local,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::Harvest, Mode::Active, Mode::Passive, Mode::Local];
    pub const COUNT: usize = 4;

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Result<Mode> {
        Mode::ALL
            .get(i)
            .copied()
            .ok_or_else(|| Error::InvalidAction(format!("unknown mode index {i}")))
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Harvest => "harvest",
            Mode::Active => "active",
            Mode::Passive => "passive",
            Mode::Local => "local",
        }
    }
}

/// Allocation for one of `k` equal sub-slots spent in mode `mode_index`.
pub fn quantize_action(mode_index: usize, k: usize, sub_slot: usize) -> Result<ActionAllocation> {
    if k == 0 {
        return Err(Error::InvalidAction("sub-slot count must be >= 1".into()));
    }
    if sub_slot >= k {
        return Err(Error::InvalidAction(format!(
            "sub-slot position {sub_slot} out of range for K = {k}"
        )));
    }
    Ok(mode_share(Mode::from_index(mode_index)?, 1.0 / k as f64))
}

pub(crate) fn mode_share(mode: Mode, share: f64) -> ActionAllocation {
    let mut a = ActionAllocation::IDLE;
    match mode {
        Mode::Harvest => a.t_h = share,
        Mode::Active => a.t_a = share,
        Mode::Passive => a.t_p = share,
        Mode::Local => a.l_loc = share,
    }
    a
}
