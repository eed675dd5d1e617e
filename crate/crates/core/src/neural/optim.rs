use super::{GradientSet, ParamSet};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First and second moment estimates plus the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl AdamState {
    pub fn new(n_params: usize) -> Self {
        Self {
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            t: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }
}

fn check_shapes(p: &ParamSet, g: &GradientSet) -> Result<()> {
    if p.values().len() != g.values().len() {
        return Err(Error::ShapeMismatch {
            what: "gradient",
            expected: p.values().len(),
            got: g.values().len(),
        });
    }
    Ok(())
}

/// Adam with bias correction.
pub fn adam_step(p: &mut ParamSet, g: &GradientSet, state: &mut AdamState, cfg: &AdamConfig) -> Result<()> {
    check_shapes(p, g)?;
    if state.m.len() != g.values().len() {
        return Err(Error::ShapeMismatch {
            what: "optimizer state",
            expected: g.values().len(),
            got: state.m.len(),
        });
    }
    state.t += 1;
    let t = state.t as i32;
    let bc1 = 1.0 - cfg.beta1.powi(t);
    let bc2 = 1.0 - cfg.beta2.powi(t);
    for (((w, &grad), m), v) in p
        .values_mut()
        .iter_mut()
        .zip(g.values())
        .zip(state.m.iter_mut())
        .zip(state.v.iter_mut())
    {
        *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * grad;
        *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * grad * grad;
        let m_hat = *m / bc1;
        let v_hat = *v / bc2;
        *w -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
    }
    Ok(())
}

pub fn sgd_step(p: &mut ParamSet, g: &GradientSet, lr: f64) -> Result<()> {
    check_shapes(p, g)?;
    for (w, &grad) in p.values_mut().iter_mut().zip(g.values()) {
        *w -= lr * grad;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    Adam,
    Sgd,
}

impl std::str::FromStr for OptimizerKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "adam" => Ok(OptimizerKind::Adam),
            "sgd" => Ok(OptimizerKind::Sgd),
            other => Err(format!("expected `adam` or `sgd`, got `{other}`")),
        }
    }
}

/// Stateful optimizer bound to one parameter set.
#[derive(Debug, Clone, PartialEq)]
pub enum Optimizer {
    Adam { cfg: AdamConfig, state: AdamState },
    Sgd { lr: f64 },
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, lr: f64, n_params: usize) -> Self {
        match kind {
            OptimizerKind::Adam => Optimizer::Adam {
                cfg: AdamConfig {
                    lr,
                    ..AdamConfig::default()
                },
                state: AdamState::new(n_params),
            },
            OptimizerKind::Sgd => Optimizer::Sgd { lr },
        }
    }

    pub fn step(&mut self, p: &mut ParamSet, g: &GradientSet) -> Result<()> {
        match self {
            Optimizer::Adam { cfg, state } => adam_step(p, g, state, cfg),
            Optimizer::Sgd { lr } => sgd_step(p, g, *lr),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::{Activation, MlpSpec, Role};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params() -> ParamSet {
        let spec = MlpSpec::new(vec![2, 3, 1], Activation::Tanh).unwrap();
        ParamSet::init(spec, Role::Online, &mut ChaCha8Rng::seed_from_u64(9))
    }

    #[test]
    fn zero_gradient_leaves_params() {
        let mut p = params();
        let before = p.clone();
        let g = GradientSet::zeros(p.values().len());
        let mut st = AdamState::new(p.values().len());
        adam_step(&mut p, &g, &mut st, &AdamConfig::default()).unwrap();
        assert_eq!(p, before);
    }

    #[test]
    fn first_adam_step_moves_by_lr_times_sign() {
        let mut p = params();
        let before = p.values().to_vec();
        let n = before.len();
        let grads: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 0.3 } else { -2.0 }).collect();
        let g = GradientSet { values: grads.clone() };
        let cfg = AdamConfig { lr: 0.01, ..AdamConfig::default() };
        let mut st = AdamState::new(n);
        adam_step(&mut p, &g, &mut st, &cfg).unwrap();
        for ((after, b), gr) in p.values().iter().zip(&before).zip(&grads) {
            let expected = b - cfg.lr * gr / (gr.abs() + cfg.eps);
            assert!((after - expected).abs() < 1e-15);
            assert!((after - (b - cfg.lr * gr.signum())).abs() < 1e-9);
        }
    }

    #[test]
    fn adam_is_deterministic() {
        let g = GradientSet { values: (0..params().values().len()).map(|i| i as f64 * 0.1 - 0.4).collect() };
        let run = || {
            let mut p = params();
            let mut opt = Optimizer::new(OptimizerKind::Adam, 1e-3, p.values().len());
            opt.step(&mut p, &g).unwrap();
            opt.step(&mut p, &g).unwrap();
            p
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn sgd_step_moves_against_gradient() {
        let mut p = params();
        let before = p.values().to_vec();
        let g = GradientSet { values: vec![1.0; before.len()] };
        sgd_step(&mut p, &g, 0.5).unwrap();
        for (a, b) in p.values().iter().zip(&before) {
            assert_eq!(*a, b - 0.5);
        }
    }

    #[test]
    fn shape_mismatch() {
        let mut p = params();
        let g = GradientSet::zeros(3);
        assert!(sgd_step(&mut p, &g, 0.1).is_err());
        let mut st = AdamState::new(3);
        let g = GradientSet::zeros(p.values().len());
        assert!(adam_step(&mut p, &g, &mut st, &AdamConfig::default()).is_err());
    }
}
