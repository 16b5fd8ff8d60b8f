use super::mlp::{Gradients, MlpParams};
use crate::error::{Error, Result};

/// Adam optimizer state with bias-corrected moments.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub step_count: u64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    first: Gradients,
    second: Gradients,
}

impl AdamState {
    pub fn new(net: &MlpParams, learning_rate: f64) -> Self {
        Self::with_betas(net, learning_rate, 0.9, 0.999, 1e-8)
    }

    pub fn with_betas(net: &MlpParams, learning_rate: f64, beta1: f64, beta2: f64, epsilon: f64) -> Self {
        Self {
            step_count: 0,
            learning_rate,
            beta1,
            beta2,
            epsilon,
            first: Gradients::zeros_like(net),
            second: Gradients::zeros_like(net),
        }
    }

    pub fn first_moment(&self) -> &Gradients {
        &self.first
    }

    pub fn second_moment(&self) -> &Gradients {
        &self.second
    }
}

/// One Adam update of `net` along `grads` (a gradient to descend).
pub fn adam_step(net: &mut MlpParams, grads: &Gradients, opt: &mut AdamState) -> Result<()> {
    if !grads.matches(net) || !opt.first.matches(net) {
        return Err(Error::Shape("optimizer state or gradients do not match network".into()));
    }
    opt.step_count += 1;
    let t = opt.step_count as i32;
    let (b1, b2) = (opt.beta1, opt.beta2);
    let c1 = 1.0 - b1.powi(t);
    let c2 = 1.0 - b2.powi(t);
    let lr = opt.learning_rate;
    let eps = opt.epsilon;
    for (((p, g), m), v) in net
        .params_mut()
        .zip(grads.values())
        .zip(opt.first.values_mut())
        .zip(opt.second.values_mut())
    {
        *m = b1 * *m + (1.0 - b1) * g;
        *v = b2 * *v + (1.0 - b2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *p -= lr * m_hat / (v_hat.sqrt() + eps);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{layer_chain, Activation, InitScheme};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn net() -> MlpParams {
        let specs = layer_chain(2, &[3], 2, Activation::Relu, Activation::Linear);
        MlpParams::init(&specs, InitScheme::He, &mut ChaCha8Rng::seed_from_u64(1)).unwrap()
    }

    #[test]
    fn zero_gradient_is_a_no_op() {
        let mut n = net();
        let before = n.clone();
        let mut opt = AdamState::new(&n, 1e-2);
        let g = Gradients::zeros_like(&n);
        for _ in 0..5 {
            adam_step(&mut n, &g, &mut opt).unwrap();
        }
        assert_eq!(n, before);
    }

    #[test]
    fn first_step_moves_by_learning_rate_against_gradient() {
        let mut n = net();
        let before = n.clone();
        let lr = 1e-3;
        let mut opt = AdamState::new(&n, lr);
        let mut g = Gradients::zeros_like(&n);
        let signs = [2.5, -0.3, 1e-2, -40.0];
        for (i, v) in g.values_mut().enumerate() {
            *v = signs[i % signs.len()];
        }
        adam_step(&mut n, &g, &mut opt).unwrap();
        // m_hat = g, v_hat = g^2 => step = lr * g / (|g| + eps)
        for ((a, b), gv) in n.params().zip(before.params()).zip(g.values()) {
            let expected = -lr * gv / (gv.abs() + 1e-8);
            assert!((a - b - expected).abs() < 1e-12, "{} vs {expected}", a - b);
        }
    }

    #[test]
    fn identical_gradients_identical_updates() {
        let mut n = net();
        n.params_mut().for_each(|p| *p = 0.5);
        let mut opt = AdamState::new(&n, 1e-2);
        let mut g = Gradients::zeros_like(&n);
        g.values_mut().for_each(|v| *v = 0.7);
        adam_step(&mut n, &g, &mut opt).unwrap();
        adam_step(&mut n, &g, &mut opt).unwrap();
        let first = *n.params().next().unwrap();
        assert!(n.params().all(|p| *p == first));
    }

    #[test]
    fn shape_mismatch() {
        let mut n = net();
        let other = MlpParams::zeros(&layer_chain(2, &[4], 2, Activation::Relu, Activation::Linear)).unwrap();
        let mut opt = AdamState::new(&n, 1e-2);
        let g = Gradients::zeros_like(&other);
        assert!(matches!(adam_step(&mut n, &g, &mut opt), Err(Error::Shape(_))));
    }
}
