use rand::Rng;

use crate::neural::{copy_into_target, Activation, Loss, MlpSpec, Optimizer, OptimizerKind, ParamSet, Role, Workspace};
use crate::Result;

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Online/target network pair with its optimizer.
#[derive(Debug, Clone)]
pub struct QNetwork {
    online: ParamSet,
    target: ParamSet,
    optimizer: Optimizer,
    loss: Loss,
    grad_clip: Option<f64>,
    ws: Workspace,
}

pub(crate) struct QNetworkOptions {
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub optimizer: OptimizerKind,
    pub lr: f64,
    pub loss: Loss,
    pub grad_clip: Option<f64>,
}

impl QNetwork {
    pub(crate) fn new<R: Rng + ?Sized>(input: usize, output: usize, opts: &QNetworkOptions, rng: &mut R) -> Result<Self> {
        let mut sizes = Vec::with_capacity(opts.hidden.len() + 2);
        sizes.push(input);
        sizes.extend_from_slice(&opts.hidden);
        sizes.push(output);
        let spec = MlpSpec::new(sizes, opts.activation)?;
        let online = ParamSet::init(spec, Role::Online, rng);
        Ok(Self::from_online(online, opts.optimizer, opts.lr, opts.loss, opts.grad_clip))
    }

    pub(crate) fn from_online(online: ParamSet, optimizer: OptimizerKind, lr: f64, loss: Loss, grad_clip: Option<f64>) -> Self {
        let target = online.with_role(Role::Target);
        Self {
            optimizer: Optimizer::new(optimizer, lr, online.values().len()),
            ws: online.workspace(),
            online,
            target,
            loss,
            grad_clip,
        }
    }

    pub fn online(&self) -> &ParamSet {
        &self.online
    }

    pub fn online_mut(&mut self) -> &mut ParamSet {
        &mut self.online
    }

    pub fn target(&self) -> &ParamSet {
        &self.target
    }

    pub fn target_mut(&mut self) -> &mut ParamSet {
        &mut self.target
    }

    pub fn q_online(&mut self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.online.forward_with(x, &mut self.ws)?.to_vec())
    }

    pub fn q_target(&mut self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.target.forward_with(x, &mut self.ws)?.to_vec())
    }

    pub fn sync_target(&mut self) -> Result<()> {
        copy_into_target(&self.online, &mut self.target)
    }

    /// One weighted regression step of `Q(x_i)[a_i]` towards `y_i`.
    /// Returns the loss before the update and the errors `Q - y`.
    pub fn fit(&mut self, inputs: &[Vec<f64>], selected: &[usize], targets: &[f64], weights: &[f64]) -> Result<(f64, Vec<f64>)> {
        let (mut grad, loss, errors) = self.online.backward_selected(inputs, selected, targets, weights, self.loss)?;
        if let Some(max) = self.grad_clip {
            grad.clip_norm(max);
        }
        self.optimizer.step(&mut self.online, &grad)?;
        Ok((loss, errors))
    }
}
