//! Helpers shared by the integration test targets.
#![allow(dead_code)]

pub mod wrapper;

use frugal_rl::neural::{Activation, Loss, MlpSpec, ParamSet, Role};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub struct Fixture {
    pub params: ParamSet,
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
    pub selected: Vec<usize>,
    pub weights: Vec<f64>,
    pub loss: Loss,
}

pub fn fixture(rng: &mut ChaCha8Rng) -> Fixture {
    let depth = rng.gen_range(2..=4);
    let sizes: Vec<usize> = (0..depth).map(|_| rng.gen_range(1..=6)).collect();
    let activation = if rng.gen_bool(0.5) { Activation::Relu } else { Activation::Tanh };
    let spec = MlpSpec::new(sizes.clone(), activation).unwrap();
    // Every parameter random, biases included, so no unit sits exactly on a kink.
    let n = spec.n_params();
    let values = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let params = ParamSet::from_values(spec, values, Role::Online).unwrap();
    let batch = rng.gen_range(1..=5);
    let inputs = (0..batch).map(|_| (0..sizes[0]).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
    let out = *sizes.last().unwrap();
    let targets = (0..batch).map(|_| (0..out).map(|_| rng.gen_range(-3.0..3.0)).collect()).collect();
    let selected = (0..batch).map(|_| rng.gen_range(0..out)).collect();
    let weights = (0..batch).map(|_| rng.gen_range(0.05..1.0)).collect();
    let loss = if rng.gen_bool(0.5) { Loss::Mse } else { Loss::Huber { delta: rng.gen_range(0.2..2.0) } };
    Fixture { params, inputs, targets, selected, weights, loss }
}

/// Worst relative disagreement of both backward variants with central differences.
pub fn max_relative_error(f: &Fixture) -> f64 {
    let full = |p: &ParamSet| p.backward(&f.inputs, &f.targets, &f.weights, f.loss).unwrap();
    let chosen: Vec<f64> = f.targets.iter().zip(&f.selected).map(|(t, &a)| t[a]).collect();
    let sel = |p: &ParamSet| {
        let (g, l, _) = p.backward_selected(&f.inputs, &f.selected, &chosen, &f.weights, f.loss).unwrap();
        (g, l)
    };
    let mut worst: f64 = 0.0;
    for eval in [&full as &dyn Fn(&ParamSet) -> _, &sel] {
        let (grad, _) = eval(&f.params);
        for i in 0..f.params.values().len() {
            let h = 1e-5;
            let mut plus = f.params.clone();
            plus.values_mut()[i] += h;
            let mut minus = f.params.clone();
            minus.values_mut()[i] -= h;
            let numeric = (eval(&plus).1 - eval(&minus).1) / (2.0 * h);
            let analytic = grad.values()[i];
            let err = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6);
            worst = worst.max(err);
        }
    }
    worst
}

/// Linear network (no hidden layer) with weight rows `w` (one per output) and biases `b`.
pub fn linear(input: usize, w: &[Vec<f64>], b: &[f64], role: Role) -> ParamSet {
    assert_eq!(w.len(), b.len());
    let spec = MlpSpec::new(vec![input, b.len()], Activation::Relu).unwrap();
    let mut values: Vec<f64> = w.iter().flat_map(|row| {
        assert_eq!(row.len(), input);
        row.clone()
    }).collect();
    values.extend_from_slice(b);
    ParamSet::from_values(spec, values, role).unwrap()
}

/// CartPole feedback gains that keep the pole up while each action is held for three steps.
pub const CARTPOLE_GAINS: [f64; 4] = [1.0, 1.5, 20.0, 3.0];

/// DMSOA snapshot whose control net pushes right iff `CARTPOLE_GAINS . s > 0`
/// and whose measurement net always picks `repeat` out of `max_repeat`.
pub fn fixed_repeat_cartpole(max_repeat: usize, repeat: usize) -> frugal_rl::agents::AgentSnapshot {
    use frugal_rl::agents::{AgentKind, AgentSnapshot, ControlEncoding};
    let qc = linear(4, &[vec![0.0; 4], CARTPOLE_GAINS.to_vec()], &[0.0, 0.0], Role::Online);
    let mut bias = vec![0.0; max_repeat];
    bias[repeat - 1] = 1.0;
    let qm = linear(5, &vec![vec![0.0; 5]; max_repeat], &bias, Role::Online);
    AgentSnapshot {
        kind: AgentKind::Dmsoa,
        env_name: "cartpole".into(),
        obs_dim: 4,
        n_actions: 2,
        max_repeat,
        memory_window: 1,
        gamma: 0.99,
        encoding: ControlEncoding::Scalar,
        input_scale: None,
        nets: vec![qc, qm],
    }
}
