//! Finite-state Markov model of the HBS-to-user channel power gain.

use rand::Rng;

use crate::error::{Error, Result};

const ROW_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelModel {
    gains: Vec<f64>,
    transition: Vec<Vec<f64>>,
}

impl ChannelModel {
    /// Validates gains (positive, strictly increasing) and a row-stochastic
    /// transition matrix of matching size.
    pub fn new(gains: Vec<f64>, transition: Vec<Vec<f64>>) -> Result<Self> {
        if gains.is_empty() {
            return Err(Error::config("channel_gains", "at least one state required"));
        }
        if gains.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
            return Err(Error::config("channel_gains", "gains must be finite and > 0"));
        }
        if gains.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config("channel_gains", "gains must be strictly increasing"));
        }
        let n = gains.len();
        if transition.len() != n || transition.iter().any(|row| row.len() != n) {
            return Err(Error::config(
                "channel_transition",
                format!("expected a {n}x{n} matrix"),
            ));
        }
        for (i, row) in transition.iter().enumerate() {
            if row.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(Error::config(
                    "channel_transition",
                    format!("row {i} has an entry outside [0, 1]"),
                ));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_TOLERANCE {
                return Err(Error::config(
                    "channel_transition",
                    format!("row {i} sums to {sum}, not 1"),
                ));
            }
        }
        Ok(Self { gains, transition })
    }

    /// Nearest-neighbour chain: `stay` on the diagonal, the remainder split
    /// evenly between neighbours (boundary states give it all to their one
    /// neighbour).
    pub fn birth_death(gains: Vec<f64>, stay: f64) -> Result<Self> {
        let n = gains.len();
        let mut transition = vec![vec![0.0; n]; n];
        for (i, row) in transition.iter_mut().enumerate() {
            if n == 1 {
                row[0] = 1.0;
                continue;
            }
            row[i] = stay;
            let moving = 1.0 - stay;
            if i == 0 {
                row[1] = moving;
            } else if i == n - 1 {
                row[n - 2] = moving;
            } else {
                row[i - 1] = moving / 2.0;
                row[i + 1] = moving / 2.0;
            }
        }
        Self::new(gains, transition)
    }

    pub fn num_states(&self) -> usize {
        self.gains.len()
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn gain(&self, state: usize) -> f64 {
        self.gains[state]
    }

    pub fn transition(&self) -> &[Vec<f64>] {
        &self.transition
    }

    /// Draws the successor of `state` from its transition row.
    pub fn step<R: Rng + ?Sized>(&self, state: usize, rng: &mut R) -> usize {
        sample_categorical(&self.transition[state], rng)
    }

    /// Stationary distribution by power iteration from the uniform vector.
    pub fn stationary(&self) -> Vec<f64> {
        let n = self.num_states();
        let mut pi = vec![1.0 / n as f64; n];
        for _ in 0..100_000 {
            let mut next = vec![0.0; n];
            for (i, p) in pi.iter().enumerate() {
                for (j, t) in self.transition[i].iter().enumerate() {
                    next[j] += p * t;
                }
            }
            // Lazy averaging keeps periodic chains from oscillating forever.
            for (nx, p) in next.iter_mut().zip(&pi) {
                *nx = 0.5 * (*nx + p);
            }
            let delta: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
            pi = next;
            if delta < 1e-14 {
                break;
            }
        }
        let total: f64 = pi.iter().sum();
        pi.iter().map(|p| p / total).collect()
    }
}

/// Inverse-CDF draw from a probability vector. Falls back to the last
/// positive entry when rounding leaves the draw above the cumulative sum.
pub(crate) fn sample_categorical<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.iter().rposition(|p| *p > 0.0).unwrap_or(probs.len() - 1)
}
