use rand::Rng;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Tanh,
}

impl Activation {
    #[inline]
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Tanh => x.tanh(),
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
        }
    }

    pub(crate) fn code(self) -> u32 {
        match self {
            Activation::Relu => 0,
            Activation::Tanh => 1,
        }
    }

    pub(crate) fn from_code(code: u32) -> Option<Self> {
        match code {
            0 => Some(Activation::Relu),
            1 => Some(Activation::Tanh),
            _ => None,
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "relu" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            other => Err(format!("expected `relu` or `tanh`, got `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MlpSpec {
    pub layer_sizes: Vec<usize>,
    pub activation: Activation,
}

impl MlpSpec {
    pub fn new(layer_sizes: Vec<usize>, activation: Activation) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(Error::ShapeMismatch {
                what: "layer count",
                expected: 2,
                got: layer_sizes.len(),
            });
        }
        if let Some(&zero) = layer_sizes.iter().find(|&&s| s == 0) {
            return Err(Error::ShapeMismatch {
                what: "layer size",
                expected: 1,
                got: zero,
            });
        }
        Ok(Self {
            layer_sizes,
            activation,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().expect("at least two layers")
    }

    /// Number of weight layers.
    pub fn depth(&self) -> usize {
        self.layer_sizes.len() - 1
    }

    pub fn n_params(&self) -> usize {
        self.layer_sizes
            .windows(2)
            .map(|w| w[0] * w[1] + w[1])
            .sum()
    }

    /// `(fan_in, fan_out, offset)` of every weight layer.
    fn layers(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let mut offset = 0;
        self.layer_sizes.windows(2).map(move |w| {
            let here = offset;
            offset += w[0] * w[1] + w[1];
            (w[0], w[1], here)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Online,
    Target,
}

/// Weights and biases of one network.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSet {
    spec: MlpSpec,
    values: Vec<f64>,
    role: Role,
}

/// Gradient with the same layout as its [`ParamSet`].
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet {
    pub(crate) values: Vec<f64>,
}

impl GradientSet {
    pub fn zeros(n: usize) -> Self {
        Self {
            values: vec![0.0; n],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|g| g * g).sum::<f64>().sqrt()
    }

    /// Rescales the gradient so its Euclidean norm is at most `max_norm`.
    pub fn clip_norm(&mut self, max_norm: f64) {
        let norm = self.norm();
        if norm > max_norm && norm > 0.0 {
            let scale = max_norm / norm;
            self.values.iter_mut().for_each(|g| *g *= scale);
        }
    }
}

/// Per-sample loss on an output error `e = prediction - target`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Loss {
    /// `e^2`
    Mse,
    /// `e^2 / 2` inside `[-delta, delta]`, linear outside.
    Huber { delta: f64 },
}

impl Loss {
    #[inline]
    fn value_and_slope(self, e: f64) -> (f64, f64) {
        match self {
            Loss::Mse => (e * e, 2.0 * e),
            Loss::Huber { delta } => {
                if e.abs() <= delta {
                    (0.5 * e * e, e)
                } else {
                    (delta * (e.abs() - 0.5 * delta), delta * e.signum())
                }
            }
        }
    }
}

/// Reusable activation buffers for forward and backward passes.
#[derive(Debug, Clone, Default)]
pub struct Workspace {
    outputs: Vec<Vec<f64>>,
    delta: Vec<f64>,
    delta_prev: Vec<f64>,
}

impl Workspace {
    pub fn new(spec: &MlpSpec) -> Self {
        let widest = *spec.layer_sizes.iter().max().expect("non-empty");
        Self {
            outputs: spec.layer_sizes[1..].iter().map(|&n| vec![0.0; n]).collect(),
            delta: Vec::with_capacity(widest),
            delta_prev: Vec::with_capacity(widest),
        }
    }

    fn fits(&self, spec: &MlpSpec) -> bool {
        self.outputs.len() == spec.depth()
            && self
                .outputs
                .iter()
                .zip(&spec.layer_sizes[1..])
                .all(|(o, &n)| o.len() == n)
    }
}

impl ParamSet {
    pub fn zeros(spec: MlpSpec, role: Role) -> Self {
        let n = spec.n_params();
        Self {
            spec,
            values: vec![0.0; n],
            role,
        }
    }

    /// Uniform fan-in initialisation: `U(-sqrt(6/fan_in), sqrt(6/fan_in))` for
    /// relu nets, `U(-sqrt(3/fan_in), sqrt(3/fan_in))` for tanh nets. Biases start at zero.
    pub fn init<R: Rng + ?Sized>(spec: MlpSpec, role: Role, rng: &mut R) -> Self {
        let mut p = Self::zeros(spec, role);
        let gain = match p.spec.activation {
            Activation::Relu => 6.0,
            Activation::Tanh => 3.0,
        };
        let layers: Vec<_> = p.spec.layers().collect();
        for (fan_in, fan_out, offset) in layers {
            let bound = (gain / fan_in as f64).sqrt();
            for w in &mut p.values[offset..offset + fan_in * fan_out] {
                *w = rng.gen_range(-bound..bound);
            }
        }
        p
    }

    pub fn from_values(spec: MlpSpec, values: Vec<f64>, role: Role) -> Result<Self> {
        if values.len() != spec.n_params() {
            return Err(Error::ShapeMismatch {
                what: "parameter count",
                expected: spec.n_params(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("parameters"));
        }
        Ok(Self { spec, values, role })
    }

    pub fn spec(&self) -> &MlpSpec {
        &self.spec
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn workspace(&self) -> Workspace {
        Workspace::new(&self.spec)
    }

    /// A deep copy carrying the given role.
    pub fn with_role(&self, role: Role) -> Self {
        Self {
            role,
            ..self.clone()
        }
    }

    /// Forward pass allocating its own buffers.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut ws = self.workspace();
        Ok(self.forward_with(x, &mut ws)?.to_vec())
    }

    /// Forward pass reusing `ws`; returns the output slice.
    pub fn forward_with<'w>(&self, x: &[f64], ws: &'w mut Workspace) -> Result<&'w [f64]> {
        if x.len() != self.spec.input_dim() {
            return Err(Error::ShapeMismatch {
                what: "network input",
                expected: self.spec.input_dim(),
                got: x.len(),
            });
        }
        if !ws.fits(&self.spec) {
            *ws = self.workspace();
        }
        let depth = self.spec.depth();
        let act = self.spec.activation;
        for (l, (fan_in, fan_out, offset)) in self.spec.layers().enumerate() {
            let (done, rest) = ws.outputs.split_at_mut(l);
            let input: &[f64] = if l == 0 { x } else { &done[l - 1] };
            let out = &mut rest[0];
            let weights = &self.values[offset..offset + fan_in * fan_out];
            let bias = &self.values[offset + fan_in * fan_out..offset + fan_in * fan_out + fan_out];
            for (j, o) in out.iter_mut().enumerate() {
                let row = &weights[j * fan_in..(j + 1) * fan_in];
                let z = bias[j] + dot(row, input);
                *o = if l + 1 < depth { act.apply(z) } else { z };
            }
        }
        Ok(&ws.outputs[depth - 1])
    }

    /// Backpropagates `d_output` (gradient of the loss with respect to the
    /// network output for the input last passed through `ws`) and adds the
    /// parameter gradient into `grad`.
    fn accumulate_backward(&self, x: &[f64], ws: &mut Workspace, d_output: &[f64], grad: &mut [f64]) {
        let act = self.spec.activation;
        let layers: Vec<_> = self.spec.layers().collect();
        let Workspace {
            outputs,
            delta,
            delta_prev,
        } = ws;
        delta.clear();
        delta.extend_from_slice(d_output);
        for l in (0..layers.len()).rev() {
            let (fan_in, fan_out, offset) = layers[l];
            let input: &[f64] = if l == 0 { x } else { &outputs[l - 1] };
            let (gw, gb) = grad[offset..offset + fan_in * fan_out + fan_out].split_at_mut(fan_in * fan_out);
            for j in 0..fan_out {
                let d = delta[j];
                if d == 0.0 {
                    continue;
                }
                gb[j] += d;
                let row = &mut gw[j * fan_in..(j + 1) * fan_in];
                for (g, &xi) in row.iter_mut().zip(input) {
                    *g += d * xi;
                }
            }
            if l == 0 {
                break;
            }
            let weights = &self.values[offset..offset + fan_in * fan_out];
            delta_prev.clear();
            delta_prev.resize(fan_in, 0.0);
            for j in 0..fan_out {
                let d = delta[j];
                if d == 0.0 {
                    continue;
                }
                let row = &weights[j * fan_in..(j + 1) * fan_in];
                for (dp, &w) in delta_prev.iter_mut().zip(row) {
                    *dp += d * w;
                }
            }
            for (dp, &y) in delta_prev.iter_mut().zip(input) {
                *dp *= act.derivative_from_output(y);
            }
            std::mem::swap(delta, delta_prev);
        }
    }

    fn check_batch(&self, inputs: &[Vec<f64>], n_targets: usize, weights: &[f64]) -> Result<()> {
        if inputs.is_empty() {
            return Err(Error::ShapeMismatch {
                what: "batch size",
                expected: 1,
                got: 0,
            });
        }
        for (what, got) in [("targets", n_targets), ("sample weights", weights.len())] {
            if got != inputs.len() {
                return Err(Error::ShapeMismatch {
                    what,
                    expected: inputs.len(),
                    got,
                });
            }
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::NonFinite("sample weights"));
        }
        if inputs.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("inputs"));
        }
        Ok(())
    }

    /// Gradient of `(1/B) sum_i w_i sum_j loss(y_ij - t_ij)` over full output vectors.
    pub fn backward(
        &self,
        inputs: &[Vec<f64>],
        targets: &[Vec<f64>],
        weights: &[f64],
        loss: Loss,
    ) -> Result<(GradientSet, f64)> {
        self.check_batch(inputs, targets.len(), weights)?;
        let out_dim = self.spec.output_dim();
        for t in targets {
            if t.len() != out_dim {
                return Err(Error::ShapeMismatch {
                    what: "target width",
                    expected: out_dim,
                    got: t.len(),
                });
            }
            if t.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("targets"));
            }
        }
        let scale = 1.0 / inputs.len() as f64;
        let mut grad = GradientSet::zeros(self.values.len());
        let mut ws = self.workspace();
        let mut d_out = vec![0.0; out_dim];
        let mut total = 0.0;
        for ((x, t), &w) in inputs.iter().zip(targets).zip(weights) {
            let y = self.forward_with(x, &mut ws)?;
            for j in 0..out_dim {
                let (l, slope) = loss.value_and_slope(y[j] - t[j]);
                total += scale * w * l;
                d_out[j] = scale * w * slope;
            }
            self.accumulate_backward(x, &mut ws, &d_out, &mut grad.values);
        }
        Ok((grad, total))
    }

    /// Gradient of `(1/B) sum_i w_i loss(y_i[a_i] - t_i)`, the Q-learning
    /// regression on the selected output only. Also returns the per-sample
    /// errors `y_i[a_i] - t_i`.
    pub fn backward_selected(
        &self,
        inputs: &[Vec<f64>],
        selected: &[usize],
        targets: &[f64],
        weights: &[f64],
        loss: Loss,
    ) -> Result<(GradientSet, f64, Vec<f64>)> {
        self.check_batch(inputs, targets.len(), weights)?;
        if selected.len() != inputs.len() {
            return Err(Error::ShapeMismatch {
                what: "selected outputs",
                expected: inputs.len(),
                got: selected.len(),
            });
        }
        if targets.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("targets"));
        }
        let out_dim = self.spec.output_dim();
        if let Some(&bad) = selected.iter().find(|&&a| a >= out_dim) {
            return Err(Error::ShapeMismatch {
                what: "selected output index",
                expected: out_dim,
                got: bad,
            });
        }
        let scale = 1.0 / inputs.len() as f64;
        let mut grad = GradientSet::zeros(self.values.len());
        let mut ws = self.workspace();
        let mut d_out = vec![0.0; out_dim];
        let mut total = 0.0;
        let mut errors = Vec::with_capacity(inputs.len());
        for (((x, &a), &t), &w) in inputs.iter().zip(selected).zip(targets).zip(weights) {
            let e = self.forward_with(x, &mut ws)?[a] - t;
            let (l, slope) = loss.value_and_slope(e);
            total += scale * w * l;
            errors.push(e);
            d_out.iter_mut().for_each(|d| *d = 0.0);
            d_out[a] = scale * w * slope;
            self.accumulate_backward(x, &mut ws, &d_out, &mut grad.values);
        }
        Ok((grad, total, errors))
    }
}

/// Makes `target` a bitwise copy of `online`'s parameters.
pub fn copy_into_target(online: &ParamSet, target: &mut ParamSet) -> Result<()> {
    if online.spec != target.spec {
        return Err(Error::ShapeMismatch {
            what: "target network parameters",
            expected: online.values.len(),
            got: target.values.len(),
        });
    }
    target.values.copy_from_slice(&online.values);
    Ok(())
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let i = 4 * c;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in 4 * chunks..a.len() {
        s += a[i] * b[i];
    }
    s
}
