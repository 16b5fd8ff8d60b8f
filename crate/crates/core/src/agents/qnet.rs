//! Action-value networks: a plain MLP head, or a shared trunk feeding
//! separate value and advantage heads.

use rand::Rng;

use crate::error::{Error, Result};
use crate::nn::{adam_step, layer_chain, Activation, AdamState, ForwardCache, Gradients, InitScheme, MlpParams};

/// `Q(a) = V + A(a) - mean(A)`.
pub fn dueling_q(value: f64, advantages: &[f64]) -> Vec<f64> {
    let mean = advantages.iter().sum::<f64>() / advantages.len() as f64;
    advantages.iter().map(|a| value + a - mean).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum QNetwork {
    Plain(MlpParams),
    Dueling {
        trunk: MlpParams,
        value: MlpParams,
        advantage: MlpParams,
    },
}

#[derive(Debug, Clone)]
pub enum QCache {
    Plain(ForwardCache),
    Dueling {
        trunk: ForwardCache,
        value: ForwardCache,
        advantage: ForwardCache,
    },
}

impl QNetwork {
    pub fn plain<R: Rng + ?Sized>(input: usize, hidden: &[usize], actions: usize, rng: &mut R) -> Result<Self> {
        let specs = layer_chain(input, hidden, actions, Activation::Relu, Activation::Linear);
        Ok(QNetwork::Plain(MlpParams::init(&specs, InitScheme::He, rng)?))
    }

    pub fn dueling<R: Rng + ?Sized>(input: usize, hidden: &[usize], actions: usize, rng: &mut R) -> Result<Self> {
        let (&width, rest) = hidden
            .split_last()
            .ok_or_else(|| Error::config("hidden_units", "dueling network needs a hidden trunk"))?;
        let trunk_specs = layer_chain(input, rest, width, Activation::Relu, Activation::Relu);
        let trunk = MlpParams::init(&trunk_specs, InitScheme::He, rng)?;
        let value = MlpParams::init(
            &layer_chain(width, &[], 1, Activation::Relu, Activation::Linear),
            InitScheme::Xavier,
            rng,
        )?;
        let advantage = MlpParams::init(
            &layer_chain(width, &[], actions, Activation::Relu, Activation::Linear),
            InitScheme::Xavier,
            rng,
        )?;
        Ok(QNetwork::Dueling {
            trunk,
            value,
            advantage,
        })
    }

    pub fn from_parts(parts: Vec<MlpParams>) -> Result<Self> {
        match parts.len() {
            1 => Ok(QNetwork::Plain(parts.into_iter().next().expect("one part"))),
            3 => {
                let mut it = parts.into_iter();
                let (trunk, value, advantage) = (it.next().unwrap(), it.next().unwrap(), it.next().unwrap());
                if value.output_dim() != 1
                    || value.input_dim() != trunk.output_dim()
                    || advantage.input_dim() != trunk.output_dim()
                {
                    return Err(Error::Shape("dueling heads do not fit the trunk".into()));
                }
                Ok(QNetwork::Dueling {
                    trunk,
                    value,
                    advantage,
                })
            }
            n => Err(Error::Shape(format!("a Q-network has 1 or 3 parts, got {n}"))),
        }
    }

    pub fn parts(&self) -> Vec<&MlpParams> {
        match self {
            QNetwork::Plain(n) => vec![n],
            QNetwork::Dueling {
                trunk,
                value,
                advantage,
            } => vec![trunk, value, advantage],
        }
    }

    fn parts_mut(&mut self) -> Vec<&mut MlpParams> {
        match self {
            QNetwork::Plain(n) => vec![n],
            QNetwork::Dueling {
                trunk,
                value,
                advantage,
            } => vec![trunk, value, advantage],
        }
    }

    pub fn input_dim(&self) -> usize {
        self.parts()[0].input_dim()
    }

    pub fn num_actions(&self) -> usize {
        match self {
            QNetwork::Plain(n) => n.output_dim(),
            QNetwork::Dueling { advantage, .. } => advantage.output_dim(),
        }
    }

    pub fn q_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            QNetwork::Plain(n) => n.predict(x),
            QNetwork::Dueling {
                trunk,
                value,
                advantage,
            } => {
                let h = trunk.predict(x)?;
                let v = value.predict(&h)?[0];
                Ok(dueling_q(v, &advantage.predict(&h)?))
            }
        }
    }

    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, QCache)> {
        match self {
            QNetwork::Plain(n) => {
                let (q, c) = n.forward(x)?;
                Ok((q, QCache::Plain(c)))
            }
            QNetwork::Dueling {
                trunk,
                value,
                advantage,
            } => {
                let (h, tc) = trunk.forward(x)?;
                let (v, vc) = value.forward(&h)?;
                let (a, ac) = advantage.forward(&h)?;
                Ok((
                    dueling_q(v[0], &a),
                    QCache::Dueling {
                        trunk: tc,
                        value: vc,
                        advantage: ac,
                    },
                ))
            }
        }
    }

    pub fn zero_grads(&self) -> Vec<Gradients> {
        self.parts().into_iter().map(Gradients::zeros_like).collect()
    }

    /// Adds the parameter gradient for `dL/dQ = dq` into `grads`.
    pub fn backward_accumulate(&self, cache: &QCache, dq: &[f64], grads: &mut [Gradients]) -> Result<()> {
        match (self, cache) {
            (QNetwork::Plain(n), QCache::Plain(c)) => {
                n.backward_accumulate(c, dq, &mut grads[0])?;
            }
            (
                QNetwork::Dueling {
                    trunk,
                    value,
                    advantage,
                },
                QCache::Dueling {
                    trunk: tc,
                    value: vc,
                    advantage: ac,
                },
            ) => {
                let total: f64 = dq.iter().sum();
                let mean = total / dq.len() as f64;
                let da: Vec<f64> = dq.iter().map(|g| g - mean).collect();
                let (g_trunk, rest) = grads.split_at_mut(1);
                let (g_value, g_adv) = rest.split_at_mut(1);
                let dh_v = value.backward_accumulate(vc, &[total], &mut g_value[0])?;
                let dh_a = advantage.backward_accumulate(ac, &da, &mut g_adv[0])?;
                let dh: Vec<f64> = dh_v.iter().zip(&dh_a).map(|(a, b)| a + b).collect();
                trunk.backward_accumulate(tc, &dh, &mut g_trunk[0])?;
            }
            _ => return Err(Error::Shape("cache from a different network kind".into())),
        }
        Ok(())
    }

    pub fn optimizers(&self, learning_rate: f64) -> Vec<AdamState> {
        self.parts()
            .into_iter()
            .map(|p| AdamState::new(p, learning_rate))
            .collect()
    }

    pub fn apply(&mut self, grads: &[Gradients], opts: &mut [AdamState]) -> Result<()> {
        for ((p, g), o) in self.parts_mut().into_iter().zip(grads).zip(opts.iter_mut()) {
            adam_step(p, g, o)?;
        }
        Ok(())
    }
}

/// Global-norm clipping across several gradient tensors.
pub(crate) fn clip_grads(grads: &mut [Gradients], max_norm: Option<f64>) {
    let Some(max_norm) = max_norm else { return };
    let norm = grads.iter().map(|g| g.norm().powi(2)).sum::<f64>().sqrt();
    if norm > max_norm && norm > 0.0 {
        grads.iter_mut().for_each(|g| g.scale(max_norm / norm));
    }
}
