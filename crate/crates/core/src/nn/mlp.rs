//! Dense feed-forward network with an optional dueling head.
//!
//! Layers compute `a = act(x · Wᵀ + b)` on row-major mini-batches; weights are stored
//! `out × in`. Gradients are derived by hand from the stored [`ActivationTrace`].
//!
//! With a dueling head the trunk output feeds two parallel linear maps, a scalar state
//! value `V` and an advantage vector `A`, recombined as `Q = V + A - mean(A)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::matrix::{gemm_a_b, gemm_a_bt, gemm_at_b, Matrix};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Linear,
    Tanh,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Linear => z,
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative evaluated from the pre-activation `z` and the output `a = act(z)`.
    #[inline]
    fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Linear => 1.0,
            Activation::Tanh => 1.0 - a * a,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub input_width: usize,
    pub output_width: usize,
    pub activation: Activation,
}

impl LayerSpec {
    pub fn new(input_width: usize, output_width: usize, activation: Activation) -> Self {
        Self {
            input_width,
            output_width,
            activation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeadKind {
    Plain,
    Dueling,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    spec: LayerSpec,
    /// Row-major `output_width × input_width`.
    weights: Vec<f64>,
    biases: Vec<f64>,
}

impl Dense {
    fn zeros(spec: LayerSpec) -> Self {
        Self {
            spec,
            weights: vec![0.0; spec.output_width * spec.input_width],
            biases: vec![0.0; spec.output_width],
        }
    }

    /// Weights and biases uniform in `±1/√fan_in`.
    fn init<R: Rng + ?Sized>(spec: LayerSpec, rng: &mut R) -> Self {
        let bound = 1.0 / (spec.input_width as f64).sqrt();
        let mut layer = Self::zeros(spec);
        for w in layer.weights.iter_mut().chain(layer.biases.iter_mut()) {
            *w = rng.random_range(-bound..=bound);
        }
        layer
    }

    pub fn spec(&self) -> LayerSpec {
        self.spec
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn biases_mut(&mut self) -> &mut [f64] {
        &mut self.biases
    }

    fn validate(&self) -> Result<()> {
        let s = self.spec;
        if s.input_width == 0 || s.output_width == 0 {
            return Err(Error::Architecture("layer widths must be >= 1".into()));
        }
        if self.weights.len() != s.input_width * s.output_width {
            return Err(Error::dim("layer weights", s.input_width * s.output_width, self.weights.len()));
        }
        if self.biases.len() != s.output_width {
            return Err(Error::dim("layer biases", s.output_width, self.biases.len()));
        }
        Ok(())
    }

    /// Affine map only: `x · Wᵀ + b`.
    fn affine(&self, x: &Matrix) -> Matrix {
        let (b, n) = (x.rows(), self.spec.output_width);
        let mut z = Matrix::zeros(b, n);
        for r in 0..b {
            z.row_mut(r).copy_from_slice(&self.biases);
        }
        gemm_a_bt(b, self.spec.input_width, n, x.as_slice(), &self.weights, 1.0, z.as_mut_slice());
        z
    }

    /// Accumulates `dW`, `db` for a pre-activation gradient `dz` and returns `dX` when asked.
    fn backprop(&self, x: &Matrix, dz: &Matrix, dw: &mut [f64], db: &mut [f64], want_dx: bool) -> Option<Matrix> {
        let (b, n, m) = (x.rows(), self.spec.output_width, self.spec.input_width);
        gemm_at_b(n, b, m, dz.as_slice(), x.as_slice(), 1.0, dw);
        for r in 0..b {
            for (acc, g) in db.iter_mut().zip(dz.row(r)) {
                *acc += g;
            }
        }
        want_dx.then(|| {
            let mut dx = Matrix::zeros(b, m);
            gemm_a_b(b, n, m, dz.as_slice(), &self.weights, 0.0, dx.as_mut_slice());
            dx
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DuelingHead {
    value: Dense,
    advantage: Dense,
}

/// Every intermediate of a batched forward pass, enough to backpropagate exactly.
#[derive(Debug, Clone)]
pub struct ActivationTrace {
    input: Matrix,
    pre: Vec<Matrix>,
    post: Vec<Matrix>,
    dueling: Option<(Matrix, Matrix)>,
    output: Matrix,
}

impl ActivationTrace {
    pub fn input(&self) -> &Matrix {
        &self.input
    }

    pub fn pre_activations(&self) -> &[Matrix] {
        &self.pre
    }

    pub fn post_activations(&self) -> &[Matrix] {
        &self.post
    }

    /// `(value, advantage)` streams when the net has a dueling head.
    pub fn dueling_streams(&self) -> Option<(&Matrix, &Matrix)> {
        self.dueling.as_ref().map(|(v, a)| (v, a))
    }

    pub fn output(&self) -> &Matrix {
        &self.output
    }

    pub fn into_output(self) -> Matrix {
        self.output
    }
}

/// Gradients with one tensor per parameter tensor, in [`Mlp::params`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrads {
    tensors: Vec<Vec<f64>>,
}

impl ParamGrads {
    pub fn zeros_like(net: &Mlp) -> Self {
        Self {
            tensors: net.params().iter().map(|p| vec![0.0; p.len()]).collect(),
        }
    }

    pub fn tensors(&self) -> &[Vec<f64>] {
        &self.tensors
    }

    pub fn tensors_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.tensors
    }

    pub fn is_finite(&self) -> bool {
        self.tensors.iter().flatten().all(|g| g.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.tensors.iter().flatten().fold(0.0, |m, g| m.max(g.abs()))
    }

    /// Element-wise `self += other`.
    pub fn accumulate(&mut self, other: &ParamGrads) -> Result<()> {
        if self.tensors.len() != other.tensors.len() {
            return Err(Error::dim("gradient tensors", self.tensors.len(), other.tensors.len()));
        }
        for (a, b) in self.tensors.iter_mut().zip(&other.tensors) {
            if a.len() != b.len() {
                return Err(Error::dim("gradient tensor", a.len(), b.len()));
            }
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    layers: Vec<Dense>,
    dueling: Option<DuelingHead>,
}

impl Mlp {
    /// Randomly initialised network. `specs` is the trunk; with `actions = Some(n)` a
    /// dueling head with `n` advantages is appended after it.
    pub fn new<R: Rng + ?Sized>(specs: &[LayerSpec], dueling_actions: Option<usize>, rng: &mut R) -> Result<Self> {
        Self::check_chain(specs, dueling_actions)?;
        let layers = specs.iter().map(|&s| Dense::init(s, rng)).collect::<Vec<_>>();
        let dueling = dueling_actions.map(|actions| {
            let width = specs.last().map(|s| s.output_width).unwrap_or_default();
            DuelingHead {
                value: Dense::init(LayerSpec::new(width, 1, Activation::Linear), rng),
                advantage: Dense::init(LayerSpec::new(width, actions, Activation::Linear), rng),
            }
        });
        Ok(Self { layers, dueling })
    }

    /// Same shapes as [`Mlp::new`] with every parameter zero.
    pub fn zeros(specs: &[LayerSpec], dueling_actions: Option<usize>) -> Result<Self> {
        Self::check_chain(specs, dueling_actions)?;
        let width = specs.last().map(|s| s.output_width).unwrap_or_default();
        Ok(Self {
            layers: specs.iter().map(|&s| Dense::zeros(s)).collect(),
            dueling: dueling_actions.map(|actions| DuelingHead {
                value: Dense::zeros(LayerSpec::new(width, 1, Activation::Linear)),
                advantage: Dense::zeros(LayerSpec::new(width, actions, Activation::Linear)),
            }),
        })
    }

    /// Fully connected stack over `widths` (input first): `hidden` on every layer but the
    /// last, `output` on the last.
    pub fn dense<R: Rng + ?Sized>(widths: &[usize], hidden: Activation, output: Activation, rng: &mut R) -> Result<Self> {
        Self::new(&chain_specs(widths, hidden, output)?, None, rng)
    }

    /// Dueling Q-network: trunk over `widths` (all `hidden`), then value and advantage maps.
    pub fn dueling<R: Rng + ?Sized>(widths: &[usize], hidden: Activation, actions: usize, rng: &mut R) -> Result<Self> {
        Self::new(&chain_specs(widths, hidden, hidden)?, Some(actions), rng)
    }

    fn check_chain(specs: &[LayerSpec], dueling_actions: Option<usize>) -> Result<()> {
        if specs.is_empty() {
            return Err(Error::Architecture("network needs at least one trunk layer".into()));
        }
        for s in specs {
            if s.input_width == 0 || s.output_width == 0 {
                return Err(Error::Architecture("layer widths must be >= 1".into()));
            }
        }
        for pair in specs.windows(2) {
            if pair[0].output_width != pair[1].input_width {
                return Err(Error::Architecture(format!(
                    "layer output width {} does not feed next input width {}",
                    pair[0].output_width, pair[1].input_width
                )));
            }
        }
        if dueling_actions == Some(0) {
            return Err(Error::Architecture("dueling head needs at least one action".into()));
        }
        Ok(())
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let specs: Vec<_> = self.layers.iter().map(Dense::spec).collect();
        Self::check_chain(&specs, self.dueling.as_ref().map(|h| h.advantage.spec.output_width))?;
        for l in &self.layers {
            l.validate()?;
        }
        if let Some(h) = &self.dueling {
            h.value.validate()?;
            h.advantage.validate()?;
            let width = self.trunk_width();
            if h.value.spec.input_width != width || h.advantage.spec.input_width != width || h.value.spec.output_width != 1 {
                return Err(Error::Architecture("dueling head does not match trunk".into()));
            }
            if h.value.spec.activation != Activation::Linear || h.advantage.spec.activation != Activation::Linear {
                return Err(Error::Architecture("dueling streams must be linear".into()));
            }
        }
        Ok(())
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn specs(&self) -> Vec<LayerSpec> {
        self.layers.iter().map(Dense::spec).collect()
    }

    pub fn head(&self) -> HeadKind {
        if self.dueling.is_some() {
            HeadKind::Dueling
        } else {
            HeadKind::Plain
        }
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].spec.input_width
    }

    fn trunk_width(&self) -> usize {
        self.layers.last().map(|l| l.spec.output_width).unwrap_or_default()
    }

    pub fn output_width(&self) -> usize {
        match &self.dueling {
            Some(h) => h.advantage.spec.output_width,
            None => self.trunk_width(),
        }
    }

    /// Parameter tensors in canonical order: each trunk layer's weights then biases,
    /// followed by the value and advantage streams of a dueling head.
    pub fn params(&self) -> Vec<&[f64]> {
        let mut out = Vec::with_capacity(2 * self.layers.len() + 4);
        for l in &self.layers {
            out.push(l.weights.as_slice());
            out.push(l.biases.as_slice());
        }
        if let Some(h) = &self.dueling {
            for l in [&h.value, &h.advantage] {
                out.push(l.weights.as_slice());
                out.push(l.biases.as_slice());
            }
        }
        out
    }

    pub fn params_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = Vec::with_capacity(2 * self.layers.len() + 4);
        for l in &mut self.layers {
            out.push(l.weights.as_mut_slice());
            out.push(l.biases.as_mut_slice());
        }
        if let Some(h) = &mut self.dueling {
            for l in [&mut h.value, &mut h.advantage] {
                out.push(l.weights.as_mut_slice());
                out.push(l.biases.as_mut_slice());
            }
        }
        out
    }

    pub fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }

    pub fn same_architecture(&self, other: &Mlp) -> bool {
        self.specs() == other.specs()
            && match (&self.dueling, &other.dueling) {
                (None, None) => true,
                (Some(a), Some(b)) => a.value.spec == b.value.spec && a.advantage.spec == b.advantage.spec,
                _ => false,
            }
    }

    /// Hard copy `θ⁻ ← θ`.
    pub fn copy_from(&mut self, source: &Mlp) -> Result<()> {
        if !self.same_architecture(source) {
            return Err(Error::Architecture("copy between different architectures".into()));
        }
        for (dst, src) in self.params_mut().into_iter().zip(source.params()) {
            dst.copy_from_slice(src);
        }
        Ok(())
    }

    /// Batched forward pass; each row of `input` is one sample.
    pub fn forward_batch(&self, input: &Matrix) -> Result<ActivationTrace> {
        if input.cols() != self.input_width() {
            return Err(Error::dim("network input", self.input_width(), input.cols()));
        }
        if !input.is_finite() {
            return Err(Error::NonFinite("network input"));
        }
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut post: Vec<Matrix> = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let x = post.last().unwrap_or(input);
            let z = layer.affine(x);
            let mut a = z.clone();
            let act = layer.spec.activation;
            if act != Activation::Linear {
                a.as_mut_slice().iter_mut().for_each(|v| *v = act.apply(*v));
            }
            pre.push(z);
            post.push(a);
        }
        let trunk = post.last().expect("at least one layer");
        let (dueling, output) = match &self.dueling {
            None => (None, trunk.clone()),
            Some(h) => {
                let v = h.value.affine(trunk);
                let adv = h.advantage.affine(trunk);
                let mut q = Matrix::zeros(adv.rows(), adv.cols());
                for r in 0..adv.rows() {
                    let combined = dueling_combine(v.get(r, 0), adv.row(r))?;
                    q.row_mut(r).copy_from_slice(&combined);
                }
                (Some((v, adv)), q)
            }
        };
        Ok(ActivationTrace {
            input: input.clone(),
            pre,
            post,
            dueling,
            output,
        })
    }

    /// Single-sample forward pass.
    pub fn forward(&self, input: &[f64]) -> Result<ActivationTrace> {
        self.forward_batch(&Matrix::row_vector(input))
    }

    /// Output rows only.
    pub fn predict(&self, input: &Matrix) -> Result<Matrix> {
        Ok(self.forward_batch(input)?.into_output())
    }

    pub fn predict_one(&self, input: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward(input)?.into_output().into_vec())
    }

    fn check_trace(&self, trace: &ActivationTrace, output_grad: &Matrix) -> Result<()> {
        let consistent = trace.pre.len() == self.layers.len()
            && trace.input.cols() == self.input_width()
            && trace
                .pre
                .iter()
                .zip(&self.layers)
                .all(|(z, l)| z.cols() == l.spec.output_width && z.rows() == trace.input.rows())
            && trace.dueling.is_some() == self.dueling.is_some()
            && trace.output.cols() == self.output_width();
        if !consistent {
            return Err(Error::Architecture("activation trace was not produced by this network".into()));
        }
        if output_grad.rows() != trace.output.rows() || output_grad.cols() != trace.output.cols() {
            return Err(Error::dim(
                "output gradient",
                trace.output.rows() * trace.output.cols(),
                output_grad.rows() * output_grad.cols(),
            ));
        }
        Ok(())
    }

    /// Gradients of `Σ output_grad ⊙ output` with respect to every parameter.
    pub fn backward(&self, trace: &ActivationTrace, output_grad: &Matrix) -> Result<ParamGrads> {
        Ok(self.backprop(trace, output_grad, false)?.0)
    }

    /// Like [`Mlp::backward`] but also returns the gradient with respect to the input rows.
    pub fn backward_with_input(&self, trace: &ActivationTrace, output_grad: &Matrix) -> Result<(ParamGrads, Matrix)> {
        let (grads, dx) = self.backprop(trace, output_grad, true)?;
        Ok((grads, dx.expect("input gradient requested")))
    }

    fn backprop(&self, trace: &ActivationTrace, output_grad: &Matrix, want_input: bool) -> Result<(ParamGrads, Option<Matrix>)> {
        self.check_trace(trace, output_grad)?;
        let mut grads = ParamGrads::zeros_like(self);
        let n_trunk = self.layers.len();

        // Gradient flowing into the trunk's final post-activation.
        let mut d_post = match (&self.dueling, &trace.dueling) {
            (Some(h), Some((_, adv))) => {
                let (rows, actions) = (adv.rows(), adv.cols());
                let mut dv = Matrix::zeros(rows, 1);
                let mut da = Matrix::zeros(rows, actions);
                for r in 0..rows {
                    let dq = output_grad.row(r);
                    let sum: f64 = dq.iter().sum();
                    let mean = sum / actions as f64;
                    dv.set(r, 0, sum);
                    for (d, g) in da.row_mut(r).iter_mut().zip(dq) {
                        *d = g - mean;
                    }
                }
                let trunk_out = &trace.post[n_trunk - 1];
                let base = 2 * n_trunk;
                let (head_v, head_a) = grads.tensors.split_at_mut(base + 2);
                let (vw, vb) = head_v[base..].split_at_mut(1);
                let (aw, ab) = head_a.split_at_mut(1);
                let mut dh = h.value.backprop(trunk_out, &dv, &mut vw[0], &mut vb[0], true).expect("dx");
                let dh_a = h.advantage.backprop(trunk_out, &da, &mut aw[0], &mut ab[0], true).expect("dx");
                dh.as_mut_slice().iter_mut().zip(dh_a.as_slice()).for_each(|(x, y)| *x += y);
                dh
            }
            _ => output_grad.clone(),
        };

        let mut d_input = None;
        for k in (0..n_trunk).rev() {
            let layer = &self.layers[k];
            let z = &trace.pre[k];
            let a = &trace.post[k];
            let act = layer.spec.activation;
            let mut dz = d_post;
            if act != Activation::Linear {
                for ((d, &zv), &av) in dz.as_mut_slice().iter_mut().zip(z.as_slice()).zip(a.as_slice()) {
                    *d *= act.derivative(zv, av);
                }
            }
            let x = if k == 0 { &trace.input } else { &trace.post[k - 1] };
            let (w_part, b_part) = grads.tensors[2 * k..2 * k + 2].split_at_mut(1);
            let need_dx = k > 0 || want_input;
            let dx = layer.backprop(x, &dz, &mut w_part[0], &mut b_part[0], need_dx);
            if k == 0 {
                d_input = dx;
                break;
            }
            d_post = dx.expect("dx");
        }
        Ok((grads, d_input))
    }
}

/// `widths = [in, h1, ..., out]` → chained layer specs.
pub fn chain_specs(widths: &[usize], hidden: Activation, output: Activation) -> Result<Vec<LayerSpec>> {
    if widths.len() < 2 {
        return Err(Error::Architecture("need at least input and output widths".into()));
    }
    let last = widths.len() - 2;
    Ok(widths
        .windows(2)
        .enumerate()
        .map(|(i, w)| LayerSpec::new(w[0], w[1], if i == last { output } else { hidden }))
        .collect())
}

/// `Q(a) = V + A(a) - mean(A)`.
pub fn dueling_combine(value: f64, advantages: &[f64]) -> Result<Vec<f64>> {
    if advantages.is_empty() {
        return Err(Error::InvalidArgument("dueling_combine needs at least one advantage".into()));
    }
    let mean = advantages.iter().sum::<f64>() / advantages.len() as f64;
    Ok(advantages.iter().map(|a| value + (a - mean)).collect())
}
