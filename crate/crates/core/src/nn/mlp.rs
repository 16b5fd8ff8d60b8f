use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activation {
    Relu,
    Tanh,
    Linear,
    Sigmoid,
}

impl Activation {
    #[inline]
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Tanh => x.tanh(),
            Activation::Linear => x,
            Activation::Sigmoid => sigmoid(x),
        }
    }

    /// Derivative expressed through the activation's output.
    #[inline]
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - y * y,
            Activation::Linear => 1.0,
            Activation::Sigmoid => y * (1.0 - y),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
            Activation::Linear => "linear",
            Activation::Sigmoid => "sigmoid",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "relu" => Some(Activation::Relu),
            "tanh" => Some(Activation::Tanh),
            "linear" => Some(Activation::Linear),
            "sigmoid" => Some(Activation::Sigmoid),
            _ => None,
        }
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerSpec {
    pub in_dim: usize,
    pub out_dim: usize,
    pub activation: Activation,
}

impl LayerSpec {
    pub fn new(in_dim: usize, out_dim: usize, activation: Activation) -> Self {
        Self {
            in_dim,
            out_dim,
            activation,
        }
    }
}

/// Builds `input -> hidden... -> output` with `hidden_act` on every hidden
/// layer.
pub fn layer_chain(
    input: usize,
    hidden: &[usize],
    output: usize,
    hidden_act: Activation,
    output_act: Activation,
) -> Vec<LayerSpec> {
    let mut dims = Vec::with_capacity(hidden.len() + 2);
    dims.push(input);
    dims.extend_from_slice(hidden);
    dims.push(output);
    dims.windows(2)
        .enumerate()
        .map(|(i, w)| {
            let act = if i + 2 == dims.len() { output_act } else { hidden_act };
            LayerSpec::new(w[0], w[1], act)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitScheme {
    He,
    Xavier,
}

/// One affine layer; `weights` is row-major `out_dim x in_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub spec: LayerSpec,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Dense {
    pub fn zeros(spec: LayerSpec) -> Self {
        Self {
            spec,
            weights: vec![0.0; spec.in_dim * spec.out_dim],
            biases: vec![0.0; spec.out_dim],
        }
    }

    fn forward_into(&self, x: &[f64], out: &mut Vec<f64>) {
        let n_in = self.spec.in_dim;
        out.clear();
        out.extend(self.biases.iter().zip(self.weights.chunks_exact(n_in)).map(|(b, row)| {
            let z = b + row.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>();
            self.spec.activation.apply(z)
        }));
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    layers: Vec<Dense>,
}

/// Layer inputs and the final output of one forward pass.
#[derive(Debug, Clone, Default)]
pub struct ForwardCache {
    activations: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &[f64] {
        self.activations.last().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn input(&self) -> &[f64] {
        self.activations.first().map(Vec::as_slice).unwrap_or(&[])
    }
}

impl MlpParams {
    pub fn from_layers(layers: Vec<Dense>) -> Result<Self> {
        check_chain(layers.iter().map(|l| &l.spec))?;
        for (i, l) in layers.iter().enumerate() {
            if l.weights.len() != l.spec.in_dim * l.spec.out_dim || l.biases.len() != l.spec.out_dim {
                return Err(Error::Shape(format!("layer {i} tensors do not match its spec")));
            }
        }
        Ok(Self { layers })
    }

    pub fn zeros(specs: &[LayerSpec]) -> Result<Self> {
        check_chain(specs.iter())?;
        Ok(Self {
            layers: specs.iter().map(|s| Dense::zeros(*s)).collect(),
        })
    }

    /// Random weights per `scheme`, zero biases.
    pub fn init<R: Rng + ?Sized>(specs: &[LayerSpec], scheme: InitScheme, rng: &mut R) -> Result<Self> {
        let mut net = Self::zeros(specs)?;
        for layer in &mut net.layers {
            let (fan_in, fan_out) = (layer.spec.in_dim as f64, layer.spec.out_dim as f64);
            let var = match scheme {
                InitScheme::He => 2.0 / fan_in,
                InitScheme::Xavier => 2.0 / (fan_in + fan_out),
            };
            let normal = Normal::new(0.0, var.sqrt()).expect("finite variance");
            layer.weights.iter_mut().for_each(|w| *w = normal.sample(rng));
        }
        Ok(net)
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn specs(&self) -> Vec<LayerSpec> {
        self.layers.iter().map(|l| l.spec).collect()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].spec.in_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("nonempty").spec.out_dim
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    /// Visits every scalar parameter, weights before biases, layer by layer.
    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.weights.iter_mut().chain(l.biases.iter_mut()))
    }

    pub fn params(&self) -> impl Iterator<Item = &f64> {
        self.layers.iter().flat_map(|l| l.weights.iter().chain(l.biases.iter()))
    }

    pub fn same_shape(&self, other: &MlpParams) -> bool {
        self.specs() == other.specs()
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::Shape(format!(
                "input has length {}, network expects {}",
                x.len(),
                self.input_dim()
            )));
        }
        Ok(())
    }

    /// Output only.
    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        for layer in &self.layers {
            layer.forward_into(&cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(cur)
    }

    /// Output plus the cache `backward` needs.
    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, ForwardCache)> {
        self.check_input(x)?;
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(x.to_vec());
        for layer in &self.layers {
            let mut out = Vec::with_capacity(layer.spec.out_dim);
            layer.forward_into(activations.last().expect("nonempty"), &mut out);
            activations.push(out);
        }
        let cache = ForwardCache { activations };
        Ok((cache.output().to_vec(), cache))
    }

    /// Gradients of a scalar loss given `dL/d(output)`, and `dL/d(input)`.
    pub fn backward(&self, cache: &ForwardCache, output_grad: &[f64]) -> Result<(Gradients, Vec<f64>)> {
        let mut grads = Gradients::zeros_like(self);
        let dx = self.backward_accumulate(cache, output_grad, &mut grads)?;
        Ok((grads, dx))
    }

    /// Like [`backward`](Self::backward) but adds into `grads`.
    pub fn backward_accumulate(
        &self,
        cache: &ForwardCache,
        output_grad: &[f64],
        grads: &mut Gradients,
    ) -> Result<Vec<f64>> {
        if cache.activations.len() != self.layers.len() + 1 {
            return Err(Error::Shape("cache does not match network depth".into()));
        }
        if output_grad.len() != self.output_dim() {
            return Err(Error::Shape(format!(
                "output gradient has length {}, network outputs {}",
                output_grad.len(),
                self.output_dim()
            )));
        }
        if !grads.matches(self) {
            return Err(Error::Shape("gradient buffer does not match network".into()));
        }
        let mut delta = output_grad.to_vec();
        for (idx, layer) in self.layers.iter().enumerate().rev() {
            let x = &cache.activations[idx];
            let y = &cache.activations[idx + 1];
            let n_in = layer.spec.in_dim;
            for (d, yi) in delta.iter_mut().zip(y) {
                *d *= layer.spec.activation.derivative_from_output(*yi);
            }
            let g = &mut grads.layers[idx];
            for (o, d) in delta.iter().enumerate() {
                g.biases[o] += d;
                if *d != 0.0 {
                    for (gw, xi) in g.weights[o * n_in..(o + 1) * n_in].iter_mut().zip(x) {
                        *gw += d * xi;
                    }
                }
            }
            let mut dx = vec![0.0; n_in];
            for (o, d) in delta.iter().enumerate() {
                if *d != 0.0 {
                    for (dxi, w) in dx.iter_mut().zip(&layer.weights[o * n_in..(o + 1) * n_in]) {
                        *dxi += d * w;
                    }
                }
            }
            delta = dx;
        }
        Ok(delta)
    }
}

fn check_chain<'a>(specs: impl Iterator<Item = &'a LayerSpec>) -> Result<()> {
    let mut prev: Option<usize> = None;
    let mut count = 0;
    for (i, s) in specs.enumerate() {
        count += 1;
        if s.in_dim == 0 || s.out_dim == 0 {
            return Err(Error::config("layers", format!("layer {i} has a zero dimension")));
        }
        if let Some(p) = prev {
            if p != s.in_dim {
                return Err(Error::Shape(format!(
                    "layer {i} expects {} inputs but the previous layer emits {p}",
                    s.in_dim
                )));
            }
        }
        prev = Some(s.out_dim);
    }
    if count == 0 {
        return Err(Error::config("layers", "network needs at least one layer"));
    }
    Ok(())
}

/// Parameter-shaped gradient (or moment) buffers.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Dense>,
}

impl Gradients {
    pub fn zeros_like(net: &MlpParams) -> Self {
        Self {
            layers: net.layers.iter().map(|l| Dense::zeros(l.spec)).collect(),
        }
    }

    pub fn matches(&self, net: &MlpParams) -> bool {
        self.layers.len() == net.layers.len() && self.layers.iter().zip(&net.layers).all(|(a, b)| a.spec == b.spec)
    }

    pub fn values(&self) -> impl Iterator<Item = &f64> {
        self.layers.iter().flat_map(|l| l.weights.iter().chain(l.biases.iter()))
    }

    pub fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.weights.iter_mut().chain(l.biases.iter_mut()))
    }

    pub fn scale(&mut self, factor: f64) {
        self.values_mut().for_each(|v| *v *= factor);
    }

    pub fn fill_zero(&mut self) {
        self.values_mut().for_each(|v| *v = 0.0);
    }

    pub fn norm(&self) -> f64 {
        self.values().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Rescales so the global L2 norm is at most `max_norm`.
    pub fn clip_norm(&mut self, max_norm: f64) {
        let n = self.norm();
        if n > max_norm && n > 0.0 {
            self.scale(max_norm / n);
        }
    }
}

/// `target <- tau * online + (1 - tau) * target`.
pub fn soft_update(target: &mut MlpParams, online: &MlpParams, tau: f64) -> Result<()> {
    if !target.same_shape(online) {
        return Err(Error::Shape("soft update between differently shaped networks".into()));
    }
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::config("tau", "must lie in [0, 1]"));
    }
    if tau == 1.0 {
        target.clone_from(online);
        return Ok(());
    }
    for (t, o) in target.params_mut().zip(online.params()) {
        *t = tau * o + (1.0 - tau) * *t;
    }
    Ok(())
}
