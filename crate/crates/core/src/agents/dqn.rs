use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::qnet::{clip_grads, QNetwork};
use super::schedule::LinearSchedule;
use crate::error::{Error, Result};
use crate::nn::AdamState;
use crate::policies::apply_mask;
use crate::replay::{ActionRepr, PrioritizedBuffer, ReplayBuffer, Transition};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DqnVariant {
    Plain,
    Double,
    DuelingDouble,
}

impl DqnVariant {
    pub fn name(self) -> &'static str {
        match self {
            DqnVariant::Plain => "plain",
            DqnVariant::Double => "double",
            DqnVariant::DuelingDouble => "dueling_double",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "plain" => Some(DqnVariant::Plain),
            "double" => Some(DqnVariant::Double),
            "dueling_double" => Some(DqnVariant::DuelingDouble),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DqnConfig {
    pub variant: DqnVariant,
    pub gamma: f64,
    pub epsilon: LinearSchedule,
    /// Hard target copy every this many observed transitions.
    pub target_sync_period: u64,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub use_per: bool,
    pub replay_capacity: usize,
    pub per_alpha: f64,
    pub per_beta: LinearSchedule,
    pub per_epsilon: f64,
    pub hidden: Vec<usize>,
    /// Transitions stored before the first update (at least `batch_size`).
    pub warmup: usize,
    /// One gradient step every this many observed transitions.
    pub train_every: u64,
    pub grad_clip: Option<f64>,
}

impl Default for DqnConfig {
    fn default() -> Self {
        Self {
            variant: DqnVariant::Double,
            gamma: 0.95,
            epsilon: LinearSchedule::new(1.0, 0.05, 30_000),
            target_sync_period: 500,
            batch_size: 64,
            learning_rate: 1e-3,
            use_per: false,
            replay_capacity: 50_000,
            per_alpha: 0.6,
            per_beta: LinearSchedule::new(0.4, 1.0, 50_000),
            per_epsilon: 1e-3,
            hidden: vec![64, 64],
            warmup: 1_000,
            train_every: 1,
            grad_clip: Some(10.0),
        }
    }
}

impl DqnConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::config("gamma", "must lie in [0, 1)"));
        }
        let e = &self.epsilon;
        if !(e.start <= 1.0 && e.start >= e.end && e.end >= 0.0) {
            return Err(Error::config(
                "epsilon_start",
                "need 1 >= epsilon_start >= epsilon_end >= 0",
            ));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch_size", "must be >= 1"));
        }
        if self.target_sync_period == 0 {
            return Err(Error::config("target_sync_period", "must be >= 1"));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::config("learning_rate", "must be > 0"));
        }
        if self.train_every == 0 {
            return Err(Error::config("train_every", "must be >= 1"));
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return Err(Error::config("hidden_units", "need at least one nonzero hidden layer"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
enum Memory {
    Uniform(ReplayBuffer),
    Prioritized(PrioritizedBuffer),
}

impl Memory {
    fn len(&self) -> usize {
        match self {
            Memory::Uniform(b) => b.len(),
            Memory::Prioritized(b) => b.len(),
        }
    }

    fn get(&self, i: usize) -> Result<&Transition> {
        match self {
            Memory::Uniform(b) => b.get(i),
            Memory::Prioritized(b) => b.get(i),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainDiagnostics {
    /// `None` when no gradient step was taken.
    pub loss: Option<f64>,
    pub td_errors: Vec<f64>,
    pub target_synced: bool,
}

/// DQN, double DQN and dueling double DQN over a discrete action set with
/// an optional action mask.
#[derive(Debug, Clone)]
pub struct DqnAgent {
    config: DqnConfig,
    allowed: Vec<bool>,
    online: QNetwork,
    target: QNetwork,
    opts: Vec<AdamState>,
    memory: Memory,
    steps: u64,
    updates: u64,
    rng: ChaCha8Rng,
}

impl DqnAgent {
    pub fn new(config: DqnConfig, input_dim: usize, num_actions: usize, seed: u64) -> Result<Self> {
        config.validate()?;
        if num_actions == 0 || input_dim == 0 {
            return Err(Error::config("num_actions", "need at least one input and one action"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let online = match config.variant {
            DqnVariant::DuelingDouble => QNetwork::dueling(input_dim, &config.hidden, num_actions, &mut rng)?,
            _ => QNetwork::plain(input_dim, &config.hidden, num_actions, &mut rng)?,
        };
        let memory = if config.use_per {
            Memory::Prioritized(PrioritizedBuffer::new(
                config.replay_capacity,
                config.per_alpha,
                config.per_beta.start,
                config.per_epsilon,
            )?)
        } else {
            Memory::Uniform(ReplayBuffer::new(config.replay_capacity)?)
        };
        Ok(Self {
            opts: online.optimizers(config.learning_rate),
            target: online.clone(),
            online,
            memory,
            allowed: vec![true; num_actions],
            steps: 0,
            updates: 0,
            config,
            rng,
        })
    }

    /// Restricts greedy and random choices (and bootstrap maxima) to the
    /// allowed actions.
    pub fn with_mask(mut self, allowed: &[bool]) -> Result<Self> {
        if allowed.len() != self.num_actions() || !allowed.iter().any(|a| *a) {
            return Err(Error::EmptyMask);
        }
        self.allowed = allowed.to_vec();
        Ok(self)
    }

    pub fn config(&self) -> &DqnConfig {
        &self.config
    }

    pub fn num_actions(&self) -> usize {
        self.online.num_actions()
    }

    pub fn allowed(&self) -> &[bool] {
        &self.allowed
    }

    pub fn online(&self) -> &QNetwork {
        &self.online
    }

    pub fn target(&self) -> &QNetwork {
        &self.target
    }

    pub fn set_networks(&mut self, online: QNetwork, target: QNetwork) -> Result<()> {
        if online.parts().len() != self.online.parts().len()
            || online
                .parts()
                .iter()
                .zip(self.online.parts())
                .any(|(a, b)| !a.same_shape(b))
            || target.parts().iter().zip(online.parts()).any(|(a, b)| !a.same_shape(b))
        {
            return Err(Error::Shape("replacement networks differ in shape".into()));
        }
        self.opts = online.optimizers(self.config.learning_rate);
        self.online = online;
        self.target = target;
        Ok(())
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn set_steps(&mut self, steps: u64) {
        self.steps = steps;
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    pub fn buffer_len(&self) -> usize {
        self.memory.len()
    }

    pub fn epsilon(&self) -> f64 {
        self.config.epsilon.value(self.steps)
    }

    pub fn q_values(&self, features: &[f64]) -> Result<Vec<f64>> {
        self.online.q_values(features)
    }

    /// Masked argmax of the online network, lowest index on ties.
    pub fn greedy_action(&self, features: &[f64]) -> Result<usize> {
        apply_mask(&self.allowed, &self.online.q_values(features)?)
    }

    /// Epsilon-greedy with the scheduled epsilon.
    pub fn select_action(&mut self, features: &[f64]) -> Result<usize> {
        let eps = self.epsilon();
        self.select_action_with(features, eps)
    }

    pub fn select_action_with(&mut self, features: &[f64], epsilon: f64) -> Result<usize> {
        if epsilon > 0.0 && self.rng.random::<f64>() < epsilon {
            let choices: Vec<usize> = (0..self.allowed.len()).filter(|i| self.allowed[*i]).collect();
            return Ok(choices[self.rng.random_range(0..choices.len())]);
        }
        self.greedy_action(features)
    }

    fn masked_max(&self, q: &[f64]) -> f64 {
        q.iter()
            .zip(&self.allowed)
            .filter(|(_, a)| **a)
            .map(|(q, _)| *q)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `r + gamma * max_a Q_target(s', a)`, or `r` on terminal transitions.
    pub fn dqn_target(&self, batch: &[&Transition]) -> Result<Vec<f64>> {
        batch
            .iter()
            .map(|t| {
                if t.done {
                    return Ok(t.reward);
                }
                let q = self.target.q_values(&t.next_state)?;
                Ok(t.reward + self.config.gamma * self.masked_max(&q))
            })
            .collect()
    }

    /// `r + gamma * Q_target(s', argmax_a Q_online(s', a))`.
    pub fn ddqn_target(&self, batch: &[&Transition]) -> Result<Vec<f64>> {
        batch
            .iter()
            .map(|t| {
                if t.done {
                    return Ok(t.reward);
                }
                let a = apply_mask(&self.allowed, &self.online.q_values(&t.next_state)?)?;
                let q = self.target.q_values(&t.next_state)?;
                Ok(t.reward + self.config.gamma * q[a])
            })
            .collect()
    }

    pub fn targets(&self, batch: &[&Transition]) -> Result<Vec<f64>> {
        match self.config.variant {
            DqnVariant::Plain => self.dqn_target(batch),
            DqnVariant::Double | DqnVariant::DuelingDouble => self.ddqn_target(batch),
        }
    }

    /// Weighted mean squared TD error of the online network on `batch`.
    pub fn batch_loss(&self, batch: &[&Transition], weights: &[f64]) -> Result<f64> {
        let y = self.targets(batch)?;
        let mut loss = 0.0;
        for ((t, y), w) in batch.iter().zip(&y).zip(weights) {
            let q = self.online.q_values(&t.state)?;
            let d = q[discrete(t)?] - y;
            loss += w * d * d;
        }
        Ok(loss / batch.len() as f64)
    }

    /// One Adam step on the weighted MSE; returns (loss, TD errors).
    pub fn learn_batch(&mut self, batch: &[&Transition], weights: &[f64]) -> Result<(f64, Vec<f64>)> {
        let y = self.targets(batch)?;
        let n = batch.len() as f64;
        let mut grads = self.online.zero_grads();
        let mut tds = Vec::with_capacity(batch.len());
        let mut loss = 0.0;
        let mut dq = vec![0.0; self.num_actions()];
        for ((t, y), w) in batch.iter().zip(&y).zip(weights) {
            let a = discrete(t)?;
            let (q, cache) = self.online.forward(&t.state)?;
            let d = q[a] - y;
            loss += w * d * d;
            tds.push(d);
            dq.iter_mut().for_each(|g| *g = 0.0);
            dq[a] = 2.0 * w * d / n;
            self.online.backward_accumulate(&cache, &dq, &mut grads)?;
        }
        clip_grads(&mut grads, self.config.grad_clip);
        self.online.apply(&grads, &mut self.opts)?;
        self.updates += 1;
        Ok((loss / n, tds))
    }

    /// Stores `t`, then (once warm) samples a batch, takes one gradient
    /// step, refreshes PER priorities and syncs the target every C steps.
    pub fn train_step(&mut self, t: Transition) -> Result<TrainDiagnostics> {
        if t.state.len() != self.online.input_dim() || t.next_state.len() != self.online.input_dim() {
            return Err(Error::Shape(format!(
                "transition features have length {}, network expects {}",
                t.state.len(),
                self.online.input_dim()
            )));
        }
        discrete(&t)?;
        match &mut self.memory {
            Memory::Uniform(b) => {
                b.push(t);
            }
            Memory::Prioritized(b) => {
                b.push(t);
            }
        }
        self.steps += 1;
        let mut diag = TrainDiagnostics::default();

        let warm = self.memory.len() >= self.config.warmup.max(self.config.batch_size);
        if warm && self.steps.is_multiple_of(self.config.train_every) {
            let bs = self.config.batch_size;
            let (indices, weights) = match &mut self.memory {
                Memory::Uniform(b) => (b.sample_uniform(bs, &mut self.rng)?, vec![1.0; bs]),
                Memory::Prioritized(b) => {
                    b.set_beta(self.config.per_beta.value(self.steps));
                    let s = b.sample(bs, &mut self.rng)?;
                    (s.indices, s.weights)
                }
            };
            let batch: Vec<Transition> = indices
                .iter()
                .map(|&i| self.memory.get(i).cloned())
                .collect::<Result<_>>()?;
            let refs: Vec<&Transition> = batch.iter().collect();
            let (loss, tds) = self.learn_batch(&refs, &weights)?;
            if let Memory::Prioritized(b) = &mut self.memory {
                b.update(&indices, &tds)?;
            }
            diag.loss = Some(loss);
            diag.td_errors = tds;
        }
        if self.steps.is_multiple_of(self.config.target_sync_period) {
            self.target = self.online.clone();
            diag.target_synced = true;
        }
        Ok(diag)
    }
}

fn discrete(t: &Transition) -> Result<usize> {
    match t.action {
        ActionRepr::Discrete(a) => Ok(a),
        ActionRepr::Continuous(_) => Err(Error::InvalidAction("DQN agents store discrete actions only".into())),
    }
}
