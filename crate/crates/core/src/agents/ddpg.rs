use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::qnet::clip_grads;
use super::schedule::LinearSchedule;
use crate::env::ActionAllocation;
use crate::error::{Error, Result};
use crate::nn::{
    adam_step, layer_chain, sigmoid, soft_update, Activation, AdamState, Gradients, InitScheme, MlpParams,
};
use crate::replay::{ActionRepr, ReplayBuffer, Transition};

/// Actor output size: raw scores for `t_h, t_a, t_p, l_loc`.
pub const ALLOCATION_DIM: usize = 4;

/// Maps raw actor scores to a feasible allocation: each score goes through
/// a sigmoid, and the three radio shares are rescaled when they sum past 1.
pub fn project_allocation(raw: &[f64]) -> [f64; ALLOCATION_DIM] {
    let u: [f64; ALLOCATION_DIM] = std::array::from_fn(|i| sigmoid(raw[i]));
    let s = u[0] + u[1] + u[2];
    let scale = if s > 1.0 { 1.0 / s } else { 1.0 };
    [u[0] * scale, u[1] * scale, u[2] * scale, u[3]]
}

/// Vector-Jacobian product of [`project_allocation`]: maps `dL/d(out)` to
/// `dL/d(raw)`.
pub fn project_allocation_vjp(raw: &[f64], dout: &[f64]) -> [f64; ALLOCATION_DIM] {
    let u: [f64; ALLOCATION_DIM] = std::array::from_fn(|i| sigmoid(raw[i]));
    let s = u[0] + u[1] + u[2];
    let mut du = [0.0; ALLOCATION_DIM];
    if s > 1.0 {
        // out_i = u_i / s  =>  d out_i / d u_j = (delta_ij * s - u_i) / s^2
        let dot: f64 = (0..3).map(|i| dout[i] * u[i]).sum();
        for j in 0..3 {
            du[j] = (dout[j] * s - dot) / (s * s);
        }
    } else {
        du[..3].copy_from_slice(&dout[..3]);
    }
    du[3] = dout[3];
    std::array::from_fn(|j| du[j] * u[j] * (1.0 - u[j]))
}

pub fn allocation_from(out: &[f64; ALLOCATION_DIM]) -> ActionAllocation {
    ActionAllocation {
        t_h: out[0],
        t_a: out[1],
        t_p: out[2],
        l_loc: out[3],
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DdpgConfig {
    pub gamma: f64,
    pub tau: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub batch_size: usize,
    pub replay_capacity: usize,
    pub hidden: Vec<usize>,
    /// Gaussian noise added to the raw actor scores while exploring.
    pub noise_std: LinearSchedule,
    pub warmup: usize,
    pub train_every: u64,
    pub grad_clip: Option<f64>,
}

impl Default for DdpgConfig {
    fn default() -> Self {
        Self {
            gamma: 0.95,
            tau: 0.005,
            actor_lr: 1e-4,
            critic_lr: 1e-3,
            batch_size: 64,
            replay_capacity: 50_000,
            hidden: vec![64, 64],
            noise_std: LinearSchedule::new(0.2, 0.02, 30_000),
            warmup: 1_000,
            train_every: 1,
            grad_clip: Some(10.0),
        }
    }
}

impl DdpgConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::config("gamma", "must lie in [0, 1)"));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(Error::config("tau", "must lie in (0, 1]"));
        }
        if !(self.actor_lr > 0.0 && self.critic_lr > 0.0) {
            return Err(Error::config("learning_rate", "must be > 0"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch_size", "must be >= 1"));
        }
        if self.train_every == 0 {
            return Err(Error::config("train_every", "must be >= 1"));
        }
        if self.noise_std.start < 0.0 || self.noise_std.end < 0.0 {
            return Err(Error::config("noise_std_start", "must be >= 0"));
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return Err(Error::config("hidden_units", "need at least one nonzero hidden layer"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DdpgDiagnostics {
    pub critic_loss: Option<f64>,
    pub actor_objective: Option<f64>,
}

/// Deterministic actor-critic over the continuous allocation.
#[derive(Debug, Clone)]
pub struct DdpgAgent {
    config: DdpgConfig,
    actor: MlpParams,
    critic: MlpParams,
    actor_target: MlpParams,
    critic_target: MlpParams,
    actor_opt: AdamState,
    critic_opt: AdamState,
    memory: ReplayBuffer,
    steps: u64,
    rng: ChaCha8Rng,
}

impl DdpgAgent {
    pub fn new(config: DdpgConfig, input_dim: usize, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let actor = MlpParams::init(
            &layer_chain(
                input_dim,
                &config.hidden,
                ALLOCATION_DIM,
                Activation::Relu,
                Activation::Linear,
            ),
            InitScheme::He,
            &mut rng,
        )?;
        let critic = MlpParams::init(
            &layer_chain(
                input_dim + ALLOCATION_DIM,
                &config.hidden,
                1,
                Activation::Relu,
                Activation::Linear,
            ),
            InitScheme::He,
            &mut rng,
        )?;
        Ok(Self {
            actor_opt: AdamState::new(&actor, config.actor_lr),
            critic_opt: AdamState::new(&critic, config.critic_lr),
            actor_target: actor.clone(),
            critic_target: critic.clone(),
            memory: ReplayBuffer::new(config.replay_capacity)?,
            actor,
            critic,
            steps: 0,
            config,
            rng,
        })
    }

    pub fn config(&self) -> &DdpgConfig {
        &self.config
    }

    pub fn actor(&self) -> &MlpParams {
        &self.actor
    }

    pub fn critic(&self) -> &MlpParams {
        &self.critic
    }

    pub fn actor_target(&self) -> &MlpParams {
        &self.actor_target
    }

    pub fn critic_target(&self) -> &MlpParams {
        &self.critic_target
    }

    pub fn set_networks(
        &mut self,
        actor: MlpParams,
        critic: MlpParams,
        actor_target: MlpParams,
        critic_target: MlpParams,
    ) -> Result<()> {
        if !(actor.same_shape(&self.actor)
            && actor_target.same_shape(&self.actor)
            && critic.same_shape(&self.critic)
            && critic_target.same_shape(&self.critic))
        {
            return Err(Error::Shape("replacement networks differ in shape".into()));
        }
        self.actor_opt = AdamState::new(&actor, self.config.actor_lr);
        self.critic_opt = AdamState::new(&critic, self.config.critic_lr);
        self.actor = actor;
        self.critic = critic;
        self.actor_target = actor_target;
        self.critic_target = critic_target;
        Ok(())
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn set_steps(&mut self, steps: u64) {
        self.steps = steps;
    }

    pub fn noise_std(&self) -> f64 {
        self.config.noise_std.value(self.steps)
    }

    /// Projected allocation; with `explore` the raw scores are perturbed by
    /// the scheduled Gaussian noise first.
    pub fn act(&mut self, features: &[f64], explore: bool) -> Result<[f64; ALLOCATION_DIM]> {
        let mut raw = self.actor.predict(features)?;
        let std = self.noise_std();
        if explore && std > 0.0 {
            let noise = Normal::new(0.0, std).map_err(|e| Error::config("noise_std_start", e.to_string()))?;
            raw.iter_mut().for_each(|r| *r += noise.sample(&mut self.rng));
        }
        Ok(project_allocation(&raw))
    }

    pub fn q_value(&self, features: &[f64], action: &[f64]) -> Result<f64> {
        Ok(self.critic.predict(&concat(features, action))?[0])
    }

    fn target_value(&self, t: &Transition) -> Result<f64> {
        if t.done {
            return Ok(t.reward);
        }
        let a = project_allocation(&self.actor_target.predict(&t.next_state)?);
        let q = self.critic_target.predict(&concat(&t.next_state, &a))?[0];
        Ok(t.reward + self.config.gamma * q)
    }

    /// Mean of `Q(s, project(actor(s)))` over `states` and its gradient
    /// with respect to the actor parameters.
    pub fn actor_objective_grad(&self, states: &[&[f64]]) -> Result<(f64, Gradients)> {
        let n = states.len() as f64;
        let mut grads = Gradients::zeros_like(&self.actor);
        let mut objective = 0.0;
        let in_dim = self.actor.input_dim();
        for s in states {
            let (raw, actor_cache) = self.actor.forward(s)?;
            let a = project_allocation(&raw);
            let (q, critic_cache) = self.critic.forward(&concat(s, &a))?;
            objective += q[0];
            let (_, dx) = self.critic.backward(&critic_cache, &[1.0 / n])?;
            let draw = project_allocation_vjp(&raw, &dx[in_dim..]);
            self.actor.backward_accumulate(&actor_cache, &draw, &mut grads)?;
        }
        Ok((objective / n, grads))
    }

    /// Critic regression on the batch followed by one actor ascent step and
    /// soft target updates.
    pub fn learn_batch(&mut self, batch: &[&Transition]) -> Result<DdpgDiagnostics> {
        let n = batch.len() as f64;
        let mut cgrads = Gradients::zeros_like(&self.critic);
        let mut loss = 0.0;
        for t in batch {
            let y = self.target_value(t)?;
            let a = continuous(t)?;
            let (q, cache) = self.critic.forward(&concat(&t.state, a))?;
            let d = q[0] - y;
            loss += d * d;
            self.critic.backward_accumulate(&cache, &[2.0 * d / n], &mut cgrads)?;
        }
        clip_grads(std::slice::from_mut(&mut cgrads), self.config.grad_clip);
        adam_step(&mut self.critic, &cgrads, &mut self.critic_opt)?;

        let states: Vec<&[f64]> = batch.iter().map(|t| t.state.as_slice()).collect();
        let (objective, mut agrads) = self.actor_objective_grad(&states)?;
        // Gradient ascent on the objective.
        agrads.scale(-1.0);
        clip_grads(std::slice::from_mut(&mut agrads), self.config.grad_clip);
        adam_step(&mut self.actor, &agrads, &mut self.actor_opt)?;

        soft_update(&mut self.critic_target, &self.critic, self.config.tau)?;
        soft_update(&mut self.actor_target, &self.actor, self.config.tau)?;
        Ok(DdpgDiagnostics {
            critic_loss: Some(loss / n),
            actor_objective: Some(objective),
        })
    }

    pub fn train_step(&mut self, t: Transition) -> Result<DdpgDiagnostics> {
        let a = continuous(&t)?;
        if a.len() != ALLOCATION_DIM || t.state.len() != self.actor.input_dim() {
            return Err(Error::Shape("transition does not match the actor-critic shapes".into()));
        }
        self.memory.push(t);
        self.steps += 1;
        let warm = self.memory.len() >= self.config.warmup.max(self.config.batch_size);
        if !warm || !self.steps.is_multiple_of(self.config.train_every) {
            return Ok(DdpgDiagnostics::default());
        }
        let idx = self.memory.sample_uniform(self.config.batch_size, &mut self.rng)?;
        let batch: Vec<Transition> = idx
            .iter()
            .map(|&i| self.memory.get(i).cloned())
            .collect::<Result<_>>()?;
        let refs: Vec<&Transition> = batch.iter().collect();
        self.learn_batch(&refs)
    }
}

fn concat(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut v = Vec::with_capacity(a.len() + b.len());
    v.extend_from_slice(a);
    v.extend_from_slice(b);
    v
}

fn continuous(t: &Transition) -> Result<&[f64]> {
    match &t.action {
        ActionRepr::Continuous(a) => Ok(a),
        ActionRepr::Discrete(_) => Err(Error::InvalidAction("DDPG stores continuous actions only".into())),
    }
}
