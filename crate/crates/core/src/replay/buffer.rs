use rand::Rng;

use super::sum_tree::SumTree;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum ActionRepr {
    Discrete(usize),
    Continuous(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: ActionRepr,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub done: bool,
}

/// Fixed-capacity ring of transitions; the oldest entry is overwritten
/// once full.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    data: Vec<Transition>,
    cursor: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::config("replay_capacity", "must be >= 1"));
        }
        Ok(Self {
            capacity,
            data: Vec::new(),
            cursor: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Stores `t` and returns the slot it occupies.
    pub fn push(&mut self, t: Transition) -> usize {
        let slot = self.cursor;
        if self.data.len() < self.capacity {
            self.data.push(t);
        } else {
            self.data[slot] = t;
        }
        self.cursor = (self.cursor + 1) % self.capacity;
        slot
    }

    pub fn get(&self, index: usize) -> Result<&Transition> {
        self.data.get(index).ok_or(Error::Index {
            index,
            len: self.data.len(),
        })
    }

    /// Uniform draws with replacement; any nonempty buffer can fill a batch.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, batch_size: usize, rng: &mut R) -> Result<Vec<usize>> {
        if self.data.is_empty() {
            return Err(Error::InsufficientData {
                available: self.data.len(),
                requested: batch_size,
            });
        }
        Ok((0..batch_size).map(|_| rng.random_range(0..self.data.len())).collect())
    }
}

/// Proportional prioritized replay. The tree stores `priority^alpha`.
#[derive(Debug, Clone)]
pub struct PrioritizedBuffer {
    buffer: ReplayBuffer,
    tree: SumTree,
    alpha: f64,
    beta: f64,
    epsilon_p: f64,
    max_priority: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrioritizedSample {
    pub indices: Vec<usize>,
    /// Importance weights normalized by the batch maximum.
    pub weights: Vec<f64>,
}

impl PrioritizedBuffer {
    pub fn new(capacity: usize, alpha: f64, beta: f64, epsilon_p: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::config("per_alpha", "must be finite and >= 0"));
        }
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::config("per_beta_start", "must lie in [0, 1]"));
        }
        if !(epsilon_p > 0.0) {
            return Err(Error::config("per_epsilon", "must be > 0"));
        }
        Ok(Self {
            buffer: ReplayBuffer::new(capacity)?,
            tree: SumTree::new(capacity),
            alpha,
            beta,
            epsilon_p,
            max_priority: 1.0,
        })
    }

    pub fn len(&self) -> usize {
        self.buffer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buffer.is_empty()
    }

    pub fn get(&self, index: usize) -> Result<&Transition> {
        self.buffer.get(index)
    }

    pub fn tree(&self) -> &SumTree {
        &self.tree
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn set_beta(&mut self, beta: f64) {
        self.beta = beta.clamp(0.0, 1.0);
    }

    pub fn max_priority(&self) -> f64 {
        self.max_priority
    }

    /// Raw priority of slot `index` (before the alpha exponent).
    pub fn priority(&self, index: usize) -> f64 {
        let stored = self.tree.leaf(index);
        if self.alpha == 0.0 {
            // p^0 = 1 loses the raw value; report the stored mass.
            stored
        } else {
            stored.powf(1.0 / self.alpha)
        }
    }

    /// New entries take the largest priority seen so far (1 initially).
    pub fn push(&mut self, t: Transition) -> usize {
        let slot = self.buffer.push(t);
        self.tree.set(slot, self.max_priority.powf(self.alpha));
        slot
    }

    /// Stratified proportional sampling: one draw per equal slice of the
    /// total priority mass.
    pub fn sample<R: Rng + ?Sized>(&self, batch_size: usize, rng: &mut R) -> Result<PrioritizedSample> {
        let n = self.buffer.len();
        if n == 0 {
            return Err(Error::InsufficientData {
                available: n,
                requested: batch_size,
            });
        }
        let total = self.tree.total();
        let segment = total / batch_size as f64;
        let mut indices = Vec::with_capacity(batch_size);
        let mut weights = Vec::with_capacity(batch_size);
        for i in 0..batch_size {
            let lo = segment * i as f64;
            let mass = lo + rng.random::<f64>() * segment;
            let idx = self.tree.find(mass).min(n - 1);
            let p = self.tree.leaf(idx) / total;
            indices.push(idx);
            weights.push((n as f64 * p).powf(-self.beta));
        }
        let max_w = weights.iter().cloned().fold(0.0, f64::max);
        if max_w > 0.0 && max_w.is_finite() {
            weights.iter_mut().for_each(|w| *w /= max_w);
        } else {
            weights.iter_mut().for_each(|w| *w = 1.0);
        }
        Ok(PrioritizedSample { indices, weights })
    }

    /// Sets priority `|td| + epsilon_p` for each sampled index.
    pub fn update(&mut self, indices: &[usize], td_errors: &[f64]) -> Result<()> {
        if indices.len() != td_errors.len() {
            return Err(Error::Shape(format!(
                "{} indices but {} TD errors",
                indices.len(),
                td_errors.len()
            )));
        }
        let n = self.buffer.len();
        if let Some(&bad) = indices.iter().find(|&&i| i >= n) {
            return Err(Error::Index { index: bad, len: n });
        }
        for (&i, td) in indices.iter().zip(td_errors) {
            let p = td.abs() + self.epsilon_p;
            self.max_priority = self.max_priority.max(p);
            self.tree.set(i, p.powf(self.alpha));
        }
        Ok(())
    }
}
