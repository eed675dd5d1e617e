use super::{ActionId, EnvDescriptor, Environment, EpisodeClock, StateVector, StepOutcome};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainParams {
    /// Number of states; the start is 0 and the goal is `length - 1`.
    pub length: usize,
    /// Extrinsic reward of every step.
    pub reward: f64,
    pub max_episode_steps: usize,
}

impl ChainParams {
    pub fn new(length: usize) -> Self {
        Self {
            length,
            reward: -1.0,
            max_episode_steps: 10 * length,
        }
    }
}

pub const CHAIN_LEFT: ActionId = 0;
pub const CHAIN_RIGHT: ActionId = 1;

/// Deterministic corridor. Moving left at index 0 stays put.
#[derive(Debug, Clone)]
pub struct ChainWorld {
    params: ChainParams,
    position: usize,
    clock: EpisodeClock,
}

impl ChainWorld {
    pub fn new(params: ChainParams) -> Self {
        assert!(params.length >= 2, "chain needs at least two states");
        assert!(params.max_episode_steps >= 1);
        Self {
            params,
            position: 0,
            clock: EpisodeClock::default(),
        }
    }

    pub fn params(&self) -> &ChainParams {
        &self.params
    }

    pub fn position(&self) -> usize {
        self.position
    }

    pub fn set_position(&mut self, position: usize) {
        assert!(position < self.params.length);
        self.position = position;
    }
}

impl Environment for ChainWorld {
    fn descriptor(&self) -> EnvDescriptor {
        EnvDescriptor {
            obs_dim: 1,
            n_actions: 2,
            max_episode_steps: self.params.max_episode_steps,
            r_ext_min: self.params.reward,
            r_ext_max: self.params.reward,
        }
    }

    fn reset(&mut self, _seed: u64) -> StateVector {
        self.position = 0;
        self.clock.restart();
        StateVector::new(vec![0.0])
    }

    fn step(&mut self, action: ActionId) -> Result<StepOutcome> {
        self.clock.check(action, 2)?;
        self.position = match action {
            CHAIN_RIGHT => self.position + 1,
            _ => self.position.saturating_sub(1),
        };
        let terminal = self.position == self.params.length - 1;
        let truncated = self.clock.tick(terminal, self.params.max_episode_steps);
        Ok(StepOutcome {
            next_state: StateVector::new(vec![self.position as f64]),
            r_ext: self.params.reward,
            terminal,
            truncated,
        })
    }

    fn elapsed_steps(&self) -> usize {
        self.clock.steps()
    }

    fn name(&self) -> String {
        format!("chain:{}", self.params.length)
    }
}
