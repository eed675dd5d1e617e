//! Fully observable base environments.
//!
//! Every environment is deterministic given the seed passed to
//! [`Environment::reset`] and the sequence of actions applied afterwards.

mod acrobot;
mod cartpole;
mod chain;

pub use acrobot::{Acrobot, AcrobotObservation, AcrobotParams};
pub use cartpole::{CartPole, CartPoleParams};
pub use chain::{ChainParams, ChainWorld, CHAIN_LEFT, CHAIN_RIGHT};

use crate::{Error, Result};

/// Index of a discrete control action.
pub type ActionId = usize;

/// A measured (or measurable) environment state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(Vec<f64>);

impl StateVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl From<Vec<f64>> for StateVector {
    fn from(values: Vec<f64>) -> Self {
        Self(values)
    }
}

/// Static shape and reward information for an environment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvDescriptor {
    pub obs_dim: usize,
    pub n_actions: usize,
    pub max_episode_steps: usize,
    pub r_ext_min: f64,
    pub r_ext_max: f64,
}

/// Result of one base environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub next_state: StateVector,
    pub r_ext: f64,
    /// Task-defined end of the episode.
    pub terminal: bool,
    /// The step counter reached `max_episode_steps`.
    pub truncated: bool,
}

impl StepOutcome {
    pub fn is_done(&self) -> bool {
        self.terminal || self.truncated
    }
}

pub trait Environment: Send {
    fn descriptor(&self) -> EnvDescriptor;

    /// Starts a new episode. Identical seeds give identical initial states.
    fn reset(&mut self, seed: u64) -> StateVector;

    /// Advances the dynamics by exactly one base time step.
    fn step(&mut self, action: ActionId) -> Result<StepOutcome>;

    /// Base steps taken since the last reset.
    fn elapsed_steps(&self) -> usize;

    /// A short name that identifies the environment, e.g. `chain:5`.
    fn name(&self) -> String;
}

impl<E: Environment + ?Sized> Environment for Box<E> {
    fn descriptor(&self) -> EnvDescriptor {
        (**self).descriptor()
    }

    fn reset(&mut self, seed: u64) -> StateVector {
        (**self).reset(seed)
    }

    fn step(&mut self, action: ActionId) -> Result<StepOutcome> {
        (**self).step(action)
    }

    fn elapsed_steps(&self) -> usize {
        (**self).elapsed_steps()
    }

    fn name(&self) -> String {
        (**self).name()
    }
}

/// Optional construction knobs for [`make_env`].
#[derive(Debug, Clone, PartialEq)]
pub struct EnvOptions {
    pub acrobot_observation: AcrobotObservation,
    /// Extrinsic reward per chain step.
    pub chain_reward: f64,
    /// Chain horizon; `None` means `10 * N`.
    pub chain_horizon: Option<usize>,
}

impl Default for EnvOptions {
    fn default() -> Self {
        Self {
            acrobot_observation: AcrobotObservation::Angles,
            chain_reward: -1.0,
            chain_horizon: None,
        }
    }
}

/// Parsed environment name: `cartpole`, `acrobot` or `chain:N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvName {
    CartPole,
    Acrobot,
    Chain(usize),
}

impl std::str::FromStr for EnvName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "cartpole" => Ok(EnvName::CartPole),
            "acrobot" => Ok(EnvName::Acrobot),
            _ => {
                let n = s
                    .strip_prefix("chain:")
                    .and_then(|n| n.parse::<usize>().ok())
                    .ok_or_else(|| Error::UnknownEnv(s.to_string()))?;
                if n < 2 {
                    return Err(Error::UnknownEnv(s.to_string()));
                }
                Ok(EnvName::Chain(n))
            }
        }
    }
}

impl std::fmt::Display for EnvName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EnvName::CartPole => write!(f, "cartpole"),
            EnvName::Acrobot => write!(f, "acrobot"),
            EnvName::Chain(n) => write!(f, "chain:{n}"),
        }
    }
}

pub fn make_env(name: &str, options: &EnvOptions) -> Result<Box<dyn Environment>> {
    let env: Box<dyn Environment> = match name.parse::<EnvName>()? {
        EnvName::CartPole => Box::new(CartPole::new(CartPoleParams::default())),
        EnvName::Acrobot => Box::new(Acrobot::new(AcrobotParams {
            observation: options.acrobot_observation,
            ..AcrobotParams::default()
        })),
        EnvName::Chain(n) => {
            let mut params = ChainParams::new(n);
            params.reward = options.chain_reward;
            if let Some(h) = options.chain_horizon {
                params.max_episode_steps = h;
            }
            Box::new(ChainWorld::new(params))
        }
    };
    Ok(env)
}

/// Shared step bookkeeping: action validation, finished-episode guard and
/// the truncation counter.
#[derive(Debug, Clone, Default)]
pub(crate) struct EpisodeClock {
    steps: usize,
    finished: bool,
    started: bool,
}

impl EpisodeClock {
    pub(crate) fn restart(&mut self) {
        *self = Self {
            started: true,
            ..Self::default()
        };
    }

    pub(crate) fn check(&self, action: ActionId, n_actions: usize) -> Result<()> {
        if !self.started {
            return Err(Error::NotReset);
        }
        if self.finished {
            return Err(Error::EpisodeFinished);
        }
        if action >= n_actions {
            return Err(Error::InvalidAction { action, n_actions });
        }
        Ok(())
    }

    /// Counts one step and returns whether the horizon was reached.
    pub(crate) fn tick(&mut self, terminal: bool, max_steps: usize) -> bool {
        self.steps += 1;
        let truncated = self.steps >= max_steps;
        self.finished = terminal || truncated;
        truncated
    }

    pub(crate) fn steps(&self) -> usize {
        self.steps
    }
}
