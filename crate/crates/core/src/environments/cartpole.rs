use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ActionId, EnvDescriptor, Environment, EpisodeClock, StateVector, StepOutcome};
use crate::Result;

/// Classic cart-pole constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartPoleParams {
    pub gravity: f64,
    pub cart_mass: f64,
    pub pole_mass: f64,
    /// Half of the pole length.
    pub half_length: f64,
    pub force_mag: f64,
    pub dt: f64,
    pub x_threshold: f64,
    pub theta_threshold: f64,
    pub max_episode_steps: usize,
    /// Half-width of the uniform initial-state interval.
    pub init_range: f64,
}

impl Default for CartPoleParams {
    fn default() -> Self {
        Self {
            gravity: 9.8,
            cart_mass: 1.0,
            pole_mass: 0.1,
            half_length: 0.5,
            force_mag: 10.0,
            dt: 0.02,
            x_threshold: 2.4,
            theta_threshold: 12.0 * 2.0 * std::f64::consts::PI / 360.0,
            max_episode_steps: 200,
            init_range: 0.05,
        }
    }
}

/// Cart-pole with explicit Euler integration. State is `(x, x_dot, theta, theta_dot)`;
/// action 0 pushes left, action 1 pushes right. Reward is 1 on every step.
#[derive(Debug, Clone)]
pub struct CartPole {
    params: CartPoleParams,
    state: [f64; 4],
    clock: EpisodeClock,
}

impl CartPole {
    pub fn new(params: CartPoleParams) -> Self {
        assert!(
            params.gravity > 0.0
                && params.cart_mass > 0.0
                && params.pole_mass > 0.0
                && params.half_length > 0.0
                && params.force_mag > 0.0
                && params.dt > 0.0,
            "cart-pole constants must be positive"
        );
        Self {
            params,
            state: [0.0; 4],
            clock: EpisodeClock::default(),
        }
    }

    pub fn params(&self) -> &CartPoleParams {
        &self.params
    }

    /// Overwrites the current state; the step counter is left untouched.
    pub fn set_state(&mut self, state: [f64; 4]) {
        self.state = state;
    }

    /// One Euler step of the cart-pole equations of motion.
    pub fn dynamics(params: &CartPoleParams, state: [f64; 4], action: ActionId) -> [f64; 4] {
        let [x, x_dot, theta, theta_dot] = state;
        let force = if action == 1 {
            params.force_mag
        } else {
            -params.force_mag
        };
        let total_mass = params.cart_mass + params.pole_mass;
        let polemass_length = params.pole_mass * params.half_length;
        let (sin_t, cos_t) = theta.sin_cos();

        let temp = (force + polemass_length * theta_dot * theta_dot * sin_t) / total_mass;
        let theta_acc = (params.gravity * sin_t - cos_t * temp)
            / (params.half_length
                * (4.0 / 3.0 - params.pole_mass * cos_t * cos_t / total_mass));
        let x_acc = temp - polemass_length * theta_acc * cos_t / total_mass;

        [
            x + params.dt * x_dot,
            x_dot + params.dt * x_acc,
            theta + params.dt * theta_dot,
            theta_dot + params.dt * theta_acc,
        ]
    }

    fn failed(&self) -> bool {
        self.state[0].abs() > self.params.x_threshold
            || self.state[2].abs() > self.params.theta_threshold
    }
}

impl Environment for CartPole {
    fn descriptor(&self) -> EnvDescriptor {
        EnvDescriptor {
            obs_dim: 4,
            n_actions: 2,
            max_episode_steps: self.params.max_episode_steps,
            r_ext_min: 1.0,
            r_ext_max: 1.0,
        }
    }

    fn reset(&mut self, seed: u64) -> StateVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = self.params.init_range;
        for v in self.state.iter_mut() {
            *v = rng.gen_range(-r..=r);
        }
        self.clock.restart();
        StateVector::new(self.state.to_vec())
    }

    fn step(&mut self, action: ActionId) -> Result<StepOutcome> {
        self.clock.check(action, 2)?;
        self.state = Self::dynamics(&self.params, self.state, action);
        let terminal = self.failed();
        let truncated = self.clock.tick(terminal, self.params.max_episode_steps);
        Ok(StepOutcome {
            next_state: StateVector::new(self.state.to_vec()),
            r_ext: 1.0,
            terminal,
            truncated,
        })
    }

    fn elapsed_steps(&self) -> usize {
        self.clock.steps()
    }

    fn name(&self) -> String {
        "cartpole".into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn reset_is_deterministic_and_within_init_range() {
        let mut env = CartPole::new(CartPoleParams::default());
        let a = env.reset(7);
        let b = env.reset(7);
        assert_eq!(a, b);
        assert_eq!(a.len(), 4);
        assert!(a.as_slice().iter().all(|v| (-0.05..=0.05).contains(v)));
        assert_ne!(env.reset(8), a);
    }

    #[test]
    fn push_right_from_rest() {
        // Hand-computed: temp = 10/1.1, theta_acc = -temp / (0.5 * (4/3 - 0.1/1.1)),
        // x_acc = temp - 0.05 * theta_acc / 1.1, then one Euler step with dt = 0.02.
        let p = CartPoleParams::default();
        let next = CartPole::dynamics(&p, [0.0; 4], 1);
        assert_eq!(next[0], 0.0);
        assert!((next[1] - 0.195_121_951_219_512_2).abs() < 1e-12);
        assert_eq!(next[2], 0.0);
        assert!((next[3] + 0.292_682_926_829_268_3).abs() < 1e-12);

        let mut env = CartPole::new(p);
        env.reset(0);
        env.set_state([0.0; 4]);
        let out = env.step(1).unwrap();
        assert_eq!(out.r_ext, 1.0);
        assert!(!out.terminal && !out.truncated);
        assert!((out.next_state.as_slice()[1] - 0.19512).abs() < 1e-5);
        assert!((out.next_state.as_slice()[3] + 0.29268).abs() < 1e-5);
    }

    #[test]
    fn truncates_at_horizon() {
        let mut env = CartPole::new(CartPoleParams {
            max_episode_steps: 3,
            ..CartPoleParams::default()
        });
        env.reset(1);
        let mut last = None;
        for a in [0, 1, 0] {
            last = Some(env.step(a).unwrap());
        }
        let last = last.unwrap();
        assert!(last.truncated);
        assert_eq!(env.elapsed_steps(), 3);
        assert!(env.step(0).is_err());
    }

    #[test]
    fn fails_when_pole_falls() {
        let mut env = CartPole::new(CartPoleParams::default());
        env.reset(0);
        let mut steps = 0;
        loop {
            steps += 1;
            let out = env.step(1).unwrap();
            if out.terminal {
                break;
            }
        }
        assert!(steps < 200);
    }

    #[test]
    fn random_actions_stay_finite() {
        let mut env = CartPole::new(CartPoleParams::default());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut seed = 0;
        env.reset(seed);
        for _ in 0..1_000_000 {
            let out = env.step(rng.gen_range(0..2)).unwrap();
            assert!(out.next_state.is_finite());
            if out.is_done() {
                seed += 1;
                env.reset(seed);
            }
        }
    }
}
