//! Radio, harvesting and computation parameters of the edge user, plus the
//! stochastic ambient-power and workload models.

use rand::Rng;
use rand_distr::{Distribution, Exp, Uniform};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PhyParams {
    /// RF power radiated by the hybrid base station (W).
    pub hbs_tx_power: f64,
    /// RF-to-DC conversion efficiency in (0, 1].
    pub harvest_efficiency: f64,
    /// Receiver noise power (W).
    pub noise_power: f64,
    /// Channel bandwidth (Hz).
    pub bandwidth: f64,
    /// Active-radio throughput, bits per full slot.
    pub active_rate: f64,
    /// Backscatter throughput, bits per full slot.
    pub passive_rate: f64,
    /// Backscatter circuit power while reflecting (W).
    pub passive_circuit_power: f64,
    /// Local CPU throughput, bits per full slot.
    pub local_cpu_rate: f64,
    /// Local computation energy (J/bit).
    pub local_energy_per_bit: f64,
    pub max_active_tx_power: f64,
    pub slot_seconds: f64,
}

impl PhyParams {
    /// Checks parameter ranges and that backscatter is both slower and
    /// cheaper than the active radio in every channel state.
    pub fn validate(&self, gains: &[f64]) -> Result<()> {
        let positive = [
            ("hbs_tx_power", self.hbs_tx_power),
            ("noise_power", self.noise_power),
            ("bandwidth", self.bandwidth),
            ("active_rate", self.active_rate),
            ("passive_rate", self.passive_rate),
            ("passive_circuit_power", self.passive_circuit_power),
            ("local_cpu_rate", self.local_cpu_rate),
            ("local_energy_per_bit", self.local_energy_per_bit),
            ("max_active_tx_power", self.max_active_tx_power),
            ("slot_seconds", self.slot_seconds),
        ];
        for (key, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::config(key, format!("must be finite and > 0, got {value}")));
            }
        }
        if !(self.harvest_efficiency > 0.0 && self.harvest_efficiency <= 1.0) {
            return Err(Error::config("harvest_efficiency", "must lie in (0, 1]"));
        }
        if self.passive_rate >= self.active_rate {
            return Err(Error::config(
                "passive_rate",
                "backscatter rate must be below the active rate",
            ));
        }
        for &g in gains {
            let p = self.required_active_power(g);
            if self.passive_circuit_power >= p {
                return Err(Error::config(
                    "passive_circuit_power",
                    format!("must be below the active transmit power {p:.4e} W at gain {g}"),
                ));
            }
        }
        Ok(())
    }

    /// Energy harvested during a `t_h` fraction of the slot.
    pub fn harvest_energy(&self, gain: f64, ambient: f64, t_h: f64) -> f64 {
        self.harvest_efficiency * (self.hbs_tx_power * gain + ambient) * t_h * self.slot_seconds
    }

    /// Shannon-inverse power sustaining `active_rate` at this gain, before
    /// the transmit-power cap is applied.
    pub fn required_active_power(&self, gain: f64) -> f64 {
        let spectral = self.active_rate / self.slot_seconds / self.bandwidth;
        self.noise_power * (spectral.exp2() - 1.0) / gain
    }

    /// Transmit power needed for the fixed active rate, or `InfeasiblePower`
    /// when the channel is too deep in a fade for the power cap.
    pub fn active_tx_power(&self, gain: f64) -> Result<f64> {
        let required = self.required_active_power(gain);
        if required > self.max_active_tx_power {
            Err(Error::InfeasiblePower {
                required,
                max: self.max_active_tx_power,
            })
        } else {
            Ok(required)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AmbientDistribution {
    Constant,
    /// Uniform on `[mean * (1 - spread), mean * (1 + spread)]`, spread in [0, 1].
    Uniform {
        spread: f64,
    },
    Exponential,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmbientPowerModel {
    pub mean_density: f64,
    pub distribution: AmbientDistribution,
}

impl AmbientPowerModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.mean_density.is_finite() && self.mean_density >= 0.0) {
            return Err(Error::config("ambient_mean_density", "must be finite and >= 0"));
        }
        if let AmbientDistribution::Uniform { spread } = self.distribution {
            if !(0.0..=1.0).contains(&spread) {
                return Err(Error::config("ambient_spread", "must lie in [0, 1]"));
            }
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let mean = self.mean_density;
        match self.distribution {
            AmbientDistribution::Constant => mean,
            AmbientDistribution::Uniform { spread } => {
                let (lo, hi) = (mean * (1.0 - spread), mean * (1.0 + spread));
                if hi > lo {
                    Uniform::new(lo, hi).expect("ordered bounds").sample(rng)
                } else {
                    mean
                }
            }
            AmbientDistribution::Exponential => {
                if mean > 0.0 {
                    Exp::new(1.0 / mean).expect("positive rate").sample(rng)
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArrivalDistribution {
    Constant { bits: f64 },
    Uniform { low: f64, high: f64 },
}

impl ArrivalDistribution {
    pub fn max_bits(&self) -> f64 {
        match *self {
            ArrivalDistribution::Constant { bits } => bits,
            ArrivalDistribution::Uniform { high, .. } => high,
        }
    }

    pub fn mean_bits(&self) -> f64 {
        match *self {
            ArrivalDistribution::Constant { bits } => bits,
            ArrivalDistribution::Uniform { low, high } => 0.5 * (low + high),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadModel {
    pub arrival: ArrivalDistribution,
    pub deadline_slots: u32,
}

impl WorkloadModel {
    pub fn validate(&self) -> Result<()> {
        if self.deadline_slots == 0 {
            return Err(Error::config("deadline_slots", "must be >= 1"));
        }
        match self.arrival {
            ArrivalDistribution::Constant { bits } if !(bits.is_finite() && bits >= 0.0) => {
                Err(Error::config("arrival_mean_bits", "must be finite and >= 0"))
            }
            ArrivalDistribution::Uniform { low, high }
                if !(low.is_finite() && high.is_finite() && 0.0 <= low && low <= high) =>
            {
                Err(Error::config(
                    "arrival_spread",
                    "uniform bounds must satisfy 0 <= low <= high",
                ))
            }
            _ => Ok(()),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.arrival {
            ArrivalDistribution::Constant { bits } => bits,
            ArrivalDistribution::Uniform { low, high } => {
                if high > low {
                    Uniform::new(low, high).expect("ordered bounds").sample(rng)
                } else {
                    low
                }
            }
        }
    }
}
