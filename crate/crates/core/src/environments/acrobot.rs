use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ActionId, EnvDescriptor, Environment, EpisodeClock, StateVector, StepOutcome};
use crate::Result;

/// How the acrobot state is presented to observers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AcrobotObservation {
    /// `(theta1, theta2, omega1, omega2)`, angles wrapped to `(-pi, pi]`.
    Angles,
    /// `(cos theta1, sin theta1, cos theta2, sin theta2, omega1, omega2)`.
    Trig,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcrobotParams {
    pub link_length_1: f64,
    pub link_mass_1: f64,
    pub link_mass_2: f64,
    pub link_com_1: f64,
    pub link_com_2: f64,
    pub link_moi: f64,
    pub gravity: f64,
    pub max_vel_1: f64,
    pub max_vel_2: f64,
    pub dt: f64,
    pub max_episode_steps: usize,
    pub init_range: f64,
    pub observation: AcrobotObservation,
}

impl Default for AcrobotParams {
    fn default() -> Self {
        Self {
            link_length_1: 1.0,
            link_mass_1: 1.0,
            link_mass_2: 1.0,
            link_com_1: 0.5,
            link_com_2: 0.5,
            link_moi: 1.0,
            gravity: 9.8,
            max_vel_1: 4.0 * PI,
            max_vel_2: 9.0 * PI,
            dt: 0.2,
            max_episode_steps: 200,
            init_range: 0.1,
            observation: AcrobotObservation::Angles,
        }
    }
}

/// Two-link underactuated pendulum. `theta1 = 0` is the first link hanging
/// straight down; torques are `{-1, 0, +1}` on the second joint. The goal is
/// reached when the tip rises above one link length over the pivot. Every
/// step costs -1.
#[derive(Debug, Clone)]
pub struct Acrobot {
    params: AcrobotParams,
    state: [f64; 4],
    clock: EpisodeClock,
}

pub const ACROBOT_TORQUES: [f64; 3] = [-1.0, 0.0, 1.0];

impl Acrobot {
    pub fn new(params: AcrobotParams) -> Self {
        assert!(
            params.link_length_1 > 0.0
                && params.link_mass_1 > 0.0
                && params.link_mass_2 > 0.0
                && params.link_com_1 > 0.0
                && params.link_com_2 > 0.0
                && params.link_moi > 0.0
                && params.gravity > 0.0
                && params.dt > 0.0,
            "acrobot constants must be positive"
        );
        Self {
            params,
            state: [0.0; 4],
            clock: EpisodeClock::default(),
        }
    }

    pub fn params(&self) -> &AcrobotParams {
        &self.params
    }

    /// Raw `(theta1, theta2, omega1, omega2)` state.
    pub fn raw_state(&self) -> [f64; 4] {
        self.state
    }

    pub fn set_state(&mut self, state: [f64; 4]) {
        self.state = state;
    }

    /// Time derivative of `(theta1, theta2, omega1, omega2)` under `torque`.
    pub fn derivatives(p: &AcrobotParams, s: [f64; 4], torque: f64) -> [f64; 4] {
        let (m1, m2) = (p.link_mass_1, p.link_mass_2);
        let (l1, lc1, lc2) = (p.link_length_1, p.link_com_1, p.link_com_2);
        let (i1, i2, g) = (p.link_moi, p.link_moi, p.gravity);
        let [theta1, theta2, dtheta1, dtheta2] = s;

        let d1 = m1 * lc1 * lc1 + m2 * (l1 * l1 + lc2 * lc2 + 2.0 * l1 * lc2 * theta2.cos()) + i1 + i2;
        let d2 = m2 * (lc2 * lc2 + l1 * lc2 * theta2.cos()) + i2;
        // cos(x - pi/2) written as sin(x) so the hanging pose is an exact equilibrium.
        let phi2 = m2 * lc2 * g * (theta1 + theta2).sin();
        let phi1 = -m2 * l1 * lc2 * dtheta2 * dtheta2 * theta2.sin()
            - 2.0 * m2 * l1 * lc2 * dtheta2 * dtheta1 * theta2.sin()
            + (m1 * lc1 + m2 * l1) * g * theta1.sin()
            + phi2;
        let ddtheta2 = (torque + d2 / d1 * phi1 - m2 * l1 * lc2 * dtheta1 * dtheta1 * theta2.sin() - phi2)
            / (m2 * lc2 * lc2 + i2 - d2 * d2 / d1);
        let ddtheta1 = -(d2 * ddtheta2 + phi1) / d1;
        [dtheta1, dtheta2, ddtheta1, ddtheta2]
    }

    /// One fourth-order Runge-Kutta step over `dt`, followed by angle wrapping
    /// and velocity clipping.
    pub fn dynamics(p: &AcrobotParams, s: [f64; 4], action: ActionId) -> [f64; 4] {
        let torque = ACROBOT_TORQUES[action];
        let dt = p.dt;
        let f = |y: [f64; 4]| Self::derivatives(p, y, torque);
        let add = |y: [f64; 4], k: [f64; 4], h: f64| {
            [y[0] + h * k[0], y[1] + h * k[1], y[2] + h * k[2], y[3] + h * k[3]]
        };
        let k1 = f(s);
        let k2 = f(add(s, k1, dt / 2.0));
        let k3 = f(add(s, k2, dt / 2.0));
        let k4 = f(add(s, k3, dt));
        let mut next = [0.0; 4];
        for i in 0..4 {
            next[i] = s[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        next[0] = wrap_angle(next[0]);
        next[1] = wrap_angle(next[1]);
        next[2] = next[2].clamp(-p.max_vel_1, p.max_vel_1);
        next[3] = next[3].clamp(-p.max_vel_2, p.max_vel_2);
        next
    }

    pub fn goal_reached(s: [f64; 4]) -> bool {
        -s[0].cos() - (s[1] + s[0]).cos() > 1.0
    }

    fn observe(&self) -> StateVector {
        let s = self.state;
        match self.params.observation {
            AcrobotObservation::Angles => StateVector::new(s.to_vec()),
            AcrobotObservation::Trig => StateVector::new(vec![
                s[0].cos(),
                s[0].sin(),
                s[1].cos(),
                s[1].sin(),
                s[2],
                s[3],
            ]),
        }
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(x: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut y = x;
    while y > PI {
        y -= two_pi;
    }
    while y <= -PI {
        y += two_pi;
    }
    y
}

impl Environment for Acrobot {
    fn descriptor(&self) -> EnvDescriptor {
        EnvDescriptor {
            obs_dim: match self.params.observation {
                AcrobotObservation::Angles => 4,
                AcrobotObservation::Trig => 6,
            },
            n_actions: 3,
            max_episode_steps: self.params.max_episode_steps,
            r_ext_min: -1.0,
            r_ext_max: -1.0,
        }
    }

    fn reset(&mut self, seed: u64) -> StateVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = self.params.init_range;
        for v in self.state.iter_mut() {
            *v = rng.gen_range(-r..=r);
        }
        self.clock.restart();
        self.observe()
    }

    fn step(&mut self, action: ActionId) -> Result<StepOutcome> {
        self.clock.check(action, 3)?;
        self.state = Self::dynamics(&self.params, self.state, action);
        let terminal = Self::goal_reached(self.state);
        let truncated = self.clock.tick(terminal, self.params.max_episode_steps);
        Ok(StepOutcome {
            next_state: self.observe(),
            r_ext: -1.0,
            terminal,
            truncated,
        })
    }

    fn elapsed_steps(&self) -> usize {
        self.clock.steps()
    }

    fn name(&self) -> String {
        "acrobot".into()
    }
}
