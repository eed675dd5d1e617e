use super::{Agent, BoxedAcNomdp};
use crate::acnomdp::MeasurementTrace;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EpisodeId {
    pub seed: u64,
    pub index: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndCause {
    Terminal,
    Truncated,
}

impl EndCause {
    pub fn as_str(self) -> &'static str {
        match self {
            EndCause::Terminal => "terminal",
            EndCause::Truncated => "truncated",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeLog {
    pub seed: u64,
    pub episode: u64,
    pub base_steps: usize,
    pub decisions: usize,
    pub measured_steps: usize,
    pub unmeasured_steps: usize,
    /// Undiscounted sum of costed per-step rewards.
    pub costed_return: f64,
    /// Undiscounted sum of the base environment's rewards.
    pub extrinsic_return: f64,
    /// Sum of aggregated decision rewards, each discounted by `gamma` to the
    /// power of the base steps preceding it.
    pub discounted_return: f64,
    pub end: EndCause,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub log: EpisodeLog,
    pub trace: MeasurementTrace,
}

/// Deterministic per-episode seed derived from a run seed (splitmix64 mix).
pub fn episode_seed(run_seed: u64, index: u64, stream: u64) -> u64 {
    let mut z = run_seed
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03))
        .wrapping_add(stream.wrapping_mul(0x8CB9_2BA7_2F3D_8DD7))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Resets `env` with `reset_seed` and lets `agent` act until the episode ends.
pub fn run_episode(
    agent: &mut dyn Agent,
    env: &mut BoxedAcNomdp,
    id: EpisodeId,
    reset_seed: u64,
    learn: bool,
) -> Result<Episode> {
    env.reset(reset_seed);
    agent.begin_episode(env)?;
    let gamma = env.config().reward.gamma;
    let mut trace = MeasurementTrace::new();
    let mut costed = 0.0;
    let mut extrinsic = 0.0;
    let mut discounted = 0.0;
    let mut discount = 1.0;
    loop {
        let t = agent.decide(env, learn)?;
        trace.record(&t);
        costed += t.costed_sum;
        extrinsic += t.extrinsic_sum;
        discounted += discount * t.reward;
        for _ in 0..t.base_steps {
            discount *= gamma;
        }
        if t.is_done() {
            let log = EpisodeLog {
                seed: id.seed,
                episode: id.index,
                base_steps: trace.base_steps(),
                decisions: trace.decisions.len(),
                measured_steps: trace.measured_steps(),
                unmeasured_steps: trace.unmeasured_steps(),
                costed_return: costed,
                extrinsic_return: extrinsic,
                discounted_return: discounted,
                end: if t.terminal { EndCause::Terminal } else { EndCause::Truncated },
            };
            return Ok(Episode { log, trace });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_differ_by_stream_and_index() {
        let a = episode_seed(1, 0, 0);
        assert_ne!(a, episode_seed(1, 1, 0));
        assert_ne!(a, episode_seed(1, 0, 1));
        assert_ne!(a, episode_seed(2, 0, 0));
        assert_eq!(a, episode_seed(1, 0, 0));
    }
}
