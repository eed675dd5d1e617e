//! Double-DQN learners for the two measurement-aware agent designs.
//!
//! [`DmsoaAgent`] couples a control network `Q_c(o)` with a measurement
//! network `Q_m(o, a_c)` over repeat counts `1..=K`; [`OsmboaAgent`] uses one
//! network over the `(control, measure?)` tuple space. Both sample from a
//! proportional prioritized replay and bootstrap with the online argmax
//! evaluated under the target parameters.

mod checkpoint;
mod config;
mod dmsoa;
mod episode;
mod osmboa;
mod qnet;

pub use checkpoint::{load_agent, AgentSnapshot, AGENT_MAGIC};
pub use config::{
    AgentConfig, AgentKind, ControlEncoding, EpsilonSchedule, PrioritySource, TrainSchedule,
};
pub use dmsoa::DmsoaAgent;
pub use episode::{episode_seed, run_episode, EndCause, Episode, EpisodeId, EpisodeLog};
pub use osmboa::OsmboaAgent;
pub use qnet::{argmax, QNetwork};

use std::io::Write;

use crate::acnomdp::{AcNomdp, CostedTransition};
use crate::environments::Environment;
use crate::Result;

/// The wrapper type agents interact with.
pub type BoxedAcNomdp = AcNomdp<Box<dyn Environment>>;

pub trait Agent: Send {
    fn kind(&self) -> AgentKind;

    /// Called after the environment was reset.
    fn begin_episode(&mut self, env: &BoxedAcNomdp) -> Result<()>;

    /// Chooses and executes one decision. With `learn`, the transition is
    /// stored and the networks are trained according to the schedule;
    /// otherwise the greedy policy acts and nothing is updated.
    fn decide(&mut self, env: &mut BoxedAcNomdp, learn: bool) -> Result<CostedTransition>;

    /// Training decisions taken so far.
    fn decisions_made(&self) -> u64;

    /// Serializes the greedy policy.
    fn snapshot(&self) -> AgentSnapshot;

    fn save(&self, w: &mut dyn Write) -> Result<()> {
        self.snapshot().write(w)
    }
}

/// Builds a fresh agent of the given kind.
pub fn build_agent(
    kind: AgentKind,
    cfg: &AgentConfig,
    env: &BoxedAcNomdp,
    seed: u64,
) -> Result<Box<dyn Agent>> {
    Ok(match kind {
        AgentKind::Dmsoa => Box::new(DmsoaAgent::new(cfg, env, seed)?),
        AgentKind::Osmboa => Box::new(OsmboaAgent::new(cfg, env, seed)?),
    })
}
