//! Proportional prioritized experience replay.

mod buffer;
mod nstep;
mod sum_tree;

pub use buffer::{PrioritizedReplay, ReplayConfig, SampleBatch};
pub use nstep::{assemble_nstep, NStepAccumulator};
pub use sum_tree::SumTree;

/// Learner-side replay record of a costed transition: the network inputs
/// before and after, the chosen action pair and the aggregated reward.
#[derive(Debug, Clone, PartialEq)]
pub struct Experience {
    pub obs: Vec<f64>,
    pub control: usize,
    /// Measurement choice (`a_m`) for OSMBOA, `k - 1` for DMSOA.
    pub secondary: usize,
    pub reward: f64,
    pub next_obs: Vec<f64>,
    pub terminal: bool,
    pub truncated: bool,
    /// The learner bootstraps with `gamma^discount_exponent`.
    pub discount_exponent: u32,
}

impl Experience {
    pub fn is_done(&self) -> bool {
        self.terminal || self.truncated
    }
}
