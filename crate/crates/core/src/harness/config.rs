use std::fmt;
use std::path::{Path, PathBuf};

use crate::agents::{DdpgConfig, DqnConfig, DqnVariant, LinearSchedule};
use crate::env::{
    AmbientDistribution, AmbientPowerModel, ArrivalDistribution, ChannelModel, EnvModels, PhyParams, RewardParams,
    WorkloadModel,
};
use crate::error::{Error, Result};
use crate::policies::ActionMask;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AgentKind {
    HybridDqn,
    HybridDdqn,
    HybridDueling,
    HybridDdpg,
    ActiveOffload,
    Greedy,
    Random,
}

impl AgentKind {
    pub const ALL: [AgentKind; 7] = [
        AgentKind::HybridDqn,
        AgentKind::HybridDdqn,
        AgentKind::HybridDueling,
        AgentKind::HybridDdpg,
        AgentKind::ActiveOffload,
        AgentKind::Greedy,
        AgentKind::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AgentKind::HybridDqn => "hybrid_dqn",
            AgentKind::HybridDdqn => "hybrid_ddqn",
            AgentKind::HybridDueling => "hybrid_dueling",
            AgentKind::HybridDdpg => "hybrid_ddpg",
            AgentKind::ActiveOffload => "active_offload",
            AgentKind::Greedy => "greedy",
            AgentKind::Random => "random",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Discrete learner variant, if this kind trains a Q-network.
    pub fn dqn_variant(self) -> Option<DqnVariant> {
        match self {
            AgentKind::HybridDqn | AgentKind::ActiveOffload => Some(DqnVariant::Plain),
            AgentKind::HybridDdqn => Some(DqnVariant::Double),
            AgentKind::HybridDueling => Some(DqnVariant::DuelingDouble),
            _ => None,
        }
    }

    pub fn mask(self) -> ActionMask {
        match self {
            AgentKind::ActiveOffload => ActionMask::active_offload(),
            _ => ActionMask::full(),
        }
    }

    pub fn is_learner(self) -> bool {
        self.dqn_variant().is_some() || self == AgentKind::HybridDdpg
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Everything needed to reproduce a run: environment, agent, schedule and
/// seeds. Keys in config files match the field names (`K` for `k`).
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub agent: AgentKind,
    pub k: usize,
    pub training_slots: u64,
    pub eval_slots: u64,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    pub smoothing_window: usize,

    pub channel_gains: Vec<f64>,
    pub channel_stay: f64,
    pub hbs_tx_power: f64,
    pub harvest_efficiency: f64,
    pub noise_power: f64,
    pub bandwidth: f64,
    pub active_rate: f64,
    pub passive_rate: f64,
    pub passive_circuit_power: f64,
    pub local_cpu_rate: f64,
    pub local_energy_per_bit: f64,
    pub max_active_tx_power: f64,
    pub slot_seconds: f64,
    pub ambient_mean_density: f64,
    pub ambient_distribution: String,
    pub ambient_spread: f64,
    pub arrival_distribution: String,
    pub arrival_mean_bits: f64,
    pub arrival_spread: f64,
    pub deadline_slots: u32,
    pub battery_capacity: f64,
    pub initial_energy: f64,
    pub reward_scale: f64,
    pub energy_floor: f64,
    pub episode_slots: u64,

    /// Per-slot discount. Discrete agents decide once per sub-slot and use
    /// `gamma^(1/K)` so the per-slot horizon is the same for every K.
    pub gamma: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub hidden_units: Vec<usize>,
    pub replay_capacity: usize,
    pub warmup: usize,
    /// Gradient step every this many sub-slots. DDPG acts once per slot, so
    /// it trains every `train_every / K` slots to match the update rate.
    pub train_every: u64,
    pub grad_clip: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    pub epsilon_decay_fraction: f64,
    pub target_sync_period: u64,
    pub use_per: bool,
    pub per_alpha: f64,
    pub per_beta_start: f64,
    pub per_beta_end: f64,
    pub per_epsilon: f64,
    pub tau: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub noise_std_start: f64,
    pub noise_std_end: f64,
    pub noise_decay_fraction: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let env = EnvModels::default();
        let phy = env.phy;
        Self {
            agent: AgentKind::HybridDqn,
            k: 4,
            training_slots: 50_000,
            eval_slots: 5_000,
            seeds: (0..10).collect(),
            output_dir: PathBuf::from("results"),
            smoothing_window: 200,

            channel_gains: env.channel.gains().to_vec(),
            channel_stay: env.channel.transition()[0][0],
            hbs_tx_power: phy.hbs_tx_power,
            harvest_efficiency: phy.harvest_efficiency,
            noise_power: phy.noise_power,
            bandwidth: phy.bandwidth,
            active_rate: phy.active_rate,
            passive_rate: phy.passive_rate,
            passive_circuit_power: phy.passive_circuit_power,
            local_cpu_rate: phy.local_cpu_rate,
            local_energy_per_bit: phy.local_energy_per_bit,
            max_active_tx_power: phy.max_active_tx_power,
            slot_seconds: phy.slot_seconds,
            ambient_mean_density: env.ambient.mean_density,
            ambient_distribution: "exponential".into(),
            ambient_spread: 0.5,
            arrival_distribution: "constant".into(),
            arrival_mean_bits: env.workload.arrival.mean_bits(),
            arrival_spread: 0.5,
            deadline_slots: env.workload.deadline_slots,
            battery_capacity: env.battery_capacity,
            initial_energy: env.initial_energy,
            reward_scale: env.reward.scale,
            energy_floor: env.reward.energy_floor,
            episode_slots: env.episode_slots,

            gamma: 0.99,
            learning_rate: 1e-3,
            batch_size: 32,
            hidden_units: vec![32, 32],
            replay_capacity: 50_000,
            warmup: 1_000,
            train_every: 4,
            grad_clip: 10.0,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_decay_fraction: 0.6,
            target_sync_period: 2_000,
            use_per: false,
            per_alpha: 0.6,
            per_beta_start: 0.4,
            per_beta_end: 1.0,
            per_epsilon: 1e-3,
            tau: 0.005,
            actor_lr: 1e-3,
            critic_lr: 1e-3,
            noise_std_start: 0.5,
            noise_std_end: 0.02,
            noise_decay_fraction: 0.6,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::config(key, format!("cannot parse `{value}`")))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(key, s))
        .collect()
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(Error::config(key, format!("`{other}` is not a boolean"))),
    }
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::config(key, format!("must be finite and > 0, got {v}")))
    }
}

fn unit_interval(key: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::config(key, format!("must lie in [0, 1], got {v}")))
    }
}

impl ExperimentConfig {
    /// Sets one field from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "agent" => {
                self.agent =
                    AgentKind::from_name(v).ok_or_else(|| Error::config(key, format!("unknown agent `{v}`")))?
            }
            "K" => self.k = parse_num(key, v)?,
            "training_slots" => self.training_slots = parse_num(key, v)?,
            "eval_slots" => self.eval_slots = parse_num(key, v)?,
            "seeds" => self.seeds = parse_list(key, v)?,
            "output_dir" => self.output_dir = PathBuf::from(v),
            "smoothing_window" => self.smoothing_window = parse_num(key, v)?,

            "channel_gains" => self.channel_gains = parse_list(key, v)?,
            "channel_stay" => self.channel_stay = parse_num(key, v)?,
            "hbs_tx_power" => self.hbs_tx_power = parse_num(key, v)?,
            "harvest_efficiency" => self.harvest_efficiency = parse_num(key, v)?,
            "noise_power" => self.noise_power = parse_num(key, v)?,
            "bandwidth" => self.bandwidth = parse_num(key, v)?,
            "active_rate" => self.active_rate = parse_num(key, v)?,
            "passive_rate" => self.passive_rate = parse_num(key, v)?,
            "passive_circuit_power" => self.passive_circuit_power = parse_num(key, v)?,
            "local_cpu_rate" => self.local_cpu_rate = parse_num(key, v)?,
            "local_energy_per_bit" => self.local_energy_per_bit = parse_num(key, v)?,
            "max_active_tx_power" => self.max_active_tx_power = parse_num(key, v)?,
            "slot_seconds" => self.slot_seconds = parse_num(key, v)?,
            "ambient_mean_density" => self.ambient_mean_density = parse_num(key, v)?,
            "ambient_distribution" => self.ambient_distribution = v.to_string(),
            "ambient_spread" => self.ambient_spread = parse_num(key, v)?,
            "arrival_distribution" => self.arrival_distribution = v.to_string(),
            "arrival_mean_bits" => self.arrival_mean_bits = parse_num(key, v)?,
            "arrival_spread" => self.arrival_spread = parse_num(key, v)?,
            "deadline_slots" => self.deadline_slots = parse_num(key, v)?,
            "battery_capacity" => self.battery_capacity = parse_num(key, v)?,
            "initial_energy" => self.initial_energy = parse_num(key, v)?,
            "reward_scale" => self.reward_scale = parse_num(key, v)?,
            "energy_floor" => self.energy_floor = parse_num(key, v)?,
            "episode_slots" => self.episode_slots = parse_num(key, v)?,

            "gamma" => self.gamma = parse_num(key, v)?,
            "learning_rate" => self.learning_rate = parse_num(key, v)?,
            "batch_size" => self.batch_size = parse_num(key, v)?,
            "hidden_units" => self.hidden_units = parse_list(key, v)?,
            "replay_capacity" => self.replay_capacity = parse_num(key, v)?,
            "warmup" => self.warmup = parse_num(key, v)?,
            "train_every" => self.train_every = parse_num(key, v)?,
            "grad_clip" => self.grad_clip = parse_num(key, v)?,
            "epsilon_start" => self.epsilon_start = parse_num(key, v)?,
            "epsilon_end" => self.epsilon_end = parse_num(key, v)?,
            "epsilon_decay_fraction" => self.epsilon_decay_fraction = parse_num(key, v)?,
            "target_sync_period" => self.target_sync_period = parse_num(key, v)?,
            "use_per" => self.use_per = parse_bool(key, v)?,
            "per_alpha" => self.per_alpha = parse_num(key, v)?,
            "per_beta_start" => self.per_beta_start = parse_num(key, v)?,
            "per_beta_end" => self.per_beta_end = parse_num(key, v)?,
            "per_epsilon" => self.per_epsilon = parse_num(key, v)?,
            "tau" => self.tau = parse_num(key, v)?,
            "actor_lr" => self.actor_lr = parse_num(key, v)?,
            "critic_lr" => self.critic_lr = parse_num(key, v)?,
            "noise_std_start" => self.noise_std_start = parse_num(key, v)?,
            "noise_std_end" => self.noise_std_end = parse_num(key, v)?,
            "noise_decay_fraction" => self.noise_decay_fraction = parse_num(key, v)?,
            _ => return Err(Error::config(key, "unknown key")),
        }
        Ok(())
    }

    /// Every key with its current value, in a stable order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        vec![
            ("agent", self.agent.name().to_string()),
            ("K", self.k.to_string()),
            ("training_slots", self.training_slots.to_string()),
            ("eval_slots", self.eval_slots.to_string()),
            ("seeds", join(&self.seeds)),
            ("output_dir", self.output_dir.display().to_string()),
            ("smoothing_window", self.smoothing_window.to_string()),
            ("channel_gains", join(&self.channel_gains)),
            ("channel_stay", self.channel_stay.to_string()),
            ("hbs_tx_power", self.hbs_tx_power.to_string()),
            ("harvest_efficiency", self.harvest_efficiency.to_string()),
            ("noise_power", self.noise_power.to_string()),
            ("bandwidth", self.bandwidth.to_string()),
            ("active_rate", self.active_rate.to_string()),
            ("passive_rate", self.passive_rate.to_string()),
            ("passive_circuit_power", self.passive_circuit_power.to_string()),
            ("local_cpu_rate", self.local_cpu_rate.to_string()),
            ("local_energy_per_bit", self.local_energy_per_bit.to_string()),
            ("max_active_tx_power", self.max_active_tx_power.to_string()),
            ("slot_seconds", self.slot_seconds.to_string()),
            ("ambient_mean_density", self.ambient_mean_density.to_string()),
            ("ambient_distribution", self.ambient_distribution.clone()),
            ("ambient_spread", self.ambient_spread.to_string()),
            ("arrival_distribution", self.arrival_distribution.clone()),
            ("arrival_mean_bits", self.arrival_mean_bits.to_string()),
            ("arrival_spread", self.arrival_spread.to_string()),
            ("deadline_slots", self.deadline_slots.to_string()),
            ("battery_capacity", self.battery_capacity.to_string()),
            ("initial_energy", self.initial_energy.to_string()),
            ("reward_scale", self.reward_scale.to_string()),
            ("energy_floor", self.energy_floor.to_string()),
            ("episode_slots", self.episode_slots.to_string()),
            ("gamma", self.gamma.to_string()),
            ("learning_rate", self.learning_rate.to_string()),
            ("batch_size", self.batch_size.to_string()),
            ("hidden_units", join(&self.hidden_units)),
            ("replay_capacity", self.replay_capacity.to_string()),
            ("warmup", self.warmup.to_string()),
            ("train_every", self.train_every.to_string()),
            ("grad_clip", self.grad_clip.to_string()),
            ("epsilon_start", self.epsilon_start.to_string()),
            ("epsilon_end", self.epsilon_end.to_string()),
            ("epsilon_decay_fraction", self.epsilon_decay_fraction.to_string()),
            ("target_sync_period", self.target_sync_period.to_string()),
            ("use_per", self.use_per.to_string()),
            ("per_alpha", self.per_alpha.to_string()),
            ("per_beta_start", self.per_beta_start.to_string()),
            ("per_beta_end", self.per_beta_end.to_string()),
            ("per_epsilon", self.per_epsilon.to_string()),
            ("tau", self.tau.to_string()),
            ("actor_lr", self.actor_lr.to_string()),
            ("critic_lr", self.critic_lr.to_string()),
            ("noise_std_start", self.noise_std_start.to_string()),
            ("noise_std_end", self.noise_std_end.to_string()),
            ("noise_decay_fraction", self.noise_decay_fraction.to_string()),
        ]
    }

    /// Parses flat `key = value` text over the defaults and validates it.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for raw in text.lines() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::config(line, "expected `key = value`"))?;
            cfg.set(key.trim(), value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        self.entries()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    /// Writes the resolved configuration as `config.txt` in `dir`.
    pub fn echo(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
        let path = dir.join("config.txt");
        std::fs::write(&path, self.to_text()).map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
        Ok(path)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::config("K", "must be >= 1"));
        }
        if self.training_slots == 0 {
            return Err(Error::config("training_slots", "must be > 0"));
        }
        if self.smoothing_window == 0 {
            return Err(Error::config("smoothing_window", "must be >= 1"));
        }
        unit_interval("epsilon_decay_fraction", self.epsilon_decay_fraction)?;
        unit_interval("noise_decay_fraction", self.noise_decay_fraction)?;
        unit_interval("per_beta_end", self.per_beta_end)?;
        unit_interval("arrival_spread", self.arrival_spread)?;
        positive("grad_clip", self.grad_clip)?;
        self.env_models()?;
        self.dqn_config(DqnVariant::Plain).validate()?;
        self.ddpg_config().validate()?;
        if self.agent.is_learner() && self.replay_capacity == 0 {
            return Err(Error::config("replay_capacity", "must be >= 1"));
        }
        if !(self.per_alpha.is_finite() && self.per_alpha >= 0.0) {
            return Err(Error::config("per_alpha", "must be finite and >= 0"));
        }
        unit_interval("per_beta_start", self.per_beta_start)?;
        positive("per_epsilon", self.per_epsilon)?;
        Ok(())
    }

    pub fn env_models(&self) -> Result<EnvModels> {
        let channel = ChannelModel::birth_death(self.channel_gains.clone(), self.channel_stay)
            .map_err(|e| Error::config("channel_gains", e.to_string()))?;
        let ambient_distribution = match self.ambient_distribution.as_str() {
            "constant" => AmbientDistribution::Constant,
            "uniform" => AmbientDistribution::Uniform {
                spread: self.ambient_spread,
            },
            "exponential" => AmbientDistribution::Exponential,
            other => {
                return Err(Error::config(
                    "ambient_distribution",
                    format!("unknown distribution `{other}`"),
                ))
            }
        };
        let arrival = match self.arrival_distribution.as_str() {
            "constant" => ArrivalDistribution::Constant {
                bits: self.arrival_mean_bits,
            },
            "uniform" => ArrivalDistribution::Uniform {
                low: self.arrival_mean_bits * (1.0 - self.arrival_spread),
                high: self.arrival_mean_bits * (1.0 + self.arrival_spread),
            },
            other => {
                return Err(Error::config(
                    "arrival_distribution",
                    format!("unknown distribution `{other}`"),
                ))
            }
        };
        let models = EnvModels {
            channel,
            phy: PhyParams {
                hbs_tx_power: self.hbs_tx_power,
                harvest_efficiency: self.harvest_efficiency,
                noise_power: self.noise_power,
                bandwidth: self.bandwidth,
                active_rate: self.active_rate,
                passive_rate: self.passive_rate,
                passive_circuit_power: self.passive_circuit_power,
                local_cpu_rate: self.local_cpu_rate,
                local_energy_per_bit: self.local_energy_per_bit,
                max_active_tx_power: self.max_active_tx_power,
                slot_seconds: self.slot_seconds,
            },
            ambient: AmbientPowerModel {
                mean_density: self.ambient_mean_density,
                distribution: ambient_distribution,
            },
            workload: WorkloadModel {
                arrival,
                deadline_slots: self.deadline_slots,
            },
            battery_capacity: self.battery_capacity,
            initial_energy: self.initial_energy,
            reward: RewardParams {
                energy_floor: self.energy_floor,
                scale: self.reward_scale,
            },
            episode_slots: self.episode_slots,
        };
        models.validate()?;
        Ok(models)
    }

    /// Decisions taken during training: one per sub-slot.
    pub fn training_decisions(&self) -> u64 {
        self.training_slots * self.k as u64
    }

    pub fn dqn_config(&self, variant: DqnVariant) -> DqnConfig {
        let horizon = self.training_decisions();
        DqnConfig {
            variant,
            gamma: self.gamma.powf(1.0 / self.k as f64),
            epsilon: LinearSchedule::new(
                self.epsilon_start,
                self.epsilon_end,
                (horizon as f64 * self.epsilon_decay_fraction).round() as u64,
            ),
            target_sync_period: self.target_sync_period,
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            use_per: self.use_per,
            replay_capacity: self.replay_capacity,
            per_alpha: self.per_alpha,
            per_beta: LinearSchedule::new(self.per_beta_start, self.per_beta_end, horizon),
            per_epsilon: self.per_epsilon,
            hidden: self.hidden_units.clone(),
            warmup: self.warmup,
            train_every: self.train_every,
            grad_clip: Some(self.grad_clip),
        }
    }

    pub fn ddpg_config(&self) -> DdpgConfig {
        DdpgConfig {
            gamma: self.gamma,
            tau: self.tau,
            actor_lr: self.actor_lr,
            critic_lr: self.critic_lr,
            batch_size: self.batch_size,
            replay_capacity: self.replay_capacity.max(1),
            hidden: self.hidden_units.clone(),
            noise_std: LinearSchedule::new(
                self.noise_std_start,
                self.noise_std_end,
                (self.training_slots as f64 * self.noise_decay_fraction).round() as u64,
            ),
            warmup: self.warmup,
            train_every: (self.train_every / self.k as u64).max(1),
            grad_clip: Some(self.grad_clip),
        }
    }
}
