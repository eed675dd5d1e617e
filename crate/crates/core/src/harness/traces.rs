use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::acnomdp::{AcNomdp, MeasurementTrace, RewardSpec, StaleMode, WrapperConfig};
use crate::agents::{episode_seed, load_agent, run_episode, AgentConfig, EpisodeId};
use crate::environments::{make_env, EnvName, EnvOptions};
use crate::{Error, Result};

pub const TRACE_HEADER: &str = "decision,base_step,choice,measured";

const TRACE_STREAM: u64 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct TraceOptions {
    /// Bonus of unmeasured steps; only affects logged rewards.
    pub bonus: f64,
    pub stale_mode: StaleMode,
    pub env_options: EnvOptions,
    pub out_dir: PathBuf,
    pub seed: u64,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            bonus: 0.0,
            stale_mode: StaleMode::Memory,
            env_options: EnvOptions::default(),
            out_dir: PathBuf::from("traces"),
            seed: 0,
        }
    }
}

/// One row per base step: `(decision index, 1-based base step, k or a_m, measured)`.
pub fn trace_rows(trace: &MeasurementTrace) -> Vec<(usize, usize, usize, bool)> {
    trace
        .decisions
        .iter()
        .flat_map(|d| {
            d.measured
                .iter()
                .enumerate()
                .map(move |(i, &m)| (d.index, d.start_step + i, d.choice, m))
        })
        .collect()
}

pub fn write_trace_csv(trace: &MeasurementTrace, path: &Path) -> Result<()> {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for (decision, step, choice, measured) in trace_rows(trace) {
        let _ = writeln!(out, "{decision},{step},{choice},{}", u8::from(measured));
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Greedy rollouts of a saved policy; writes `trace_<i>.csv` per episode.
pub fn export_traces(checkpoint: &Path, env: &str, episodes: usize, opts: &TraceOptions) -> Result<Vec<MeasurementTrace>> {
    let name = EnvName::from_str(env)?.to_string();
    let mut file = std::io::BufReader::new(std::fs::File::open(checkpoint)?);
    let (mut agent, snap) = load_agent(&mut file, &AgentConfig::default())?;
    if snap.env_name != name {
        return Err(Error::Checkpoint(format!(
            "checkpoint was trained on `{}`, not `{name}`",
            snap.env_name
        )));
    }
    let base = make_env(&name, &opts.env_options)?;
    let d = base.descriptor();
    if d.obs_dim != snap.obs_dim || d.n_actions != snap.n_actions {
        return Err(Error::Checkpoint(format!(
            "checkpoint expects {} observations and {} actions, environment has {} and {}",
            snap.obs_dim, snap.n_actions, d.obs_dim, d.n_actions
        )));
    }
    let wrapper = WrapperConfig {
        reward: RewardSpec { bonus: opts.bonus, gamma: snap.gamma },
        max_repeat: snap.max_repeat,
        memory_window: snap.memory_window,
        stale_mode: opts.stale_mode,
    };
    let mut env = AcNomdp::new(base, wrapper)?;
    std::fs::create_dir_all(&opts.out_dir)?;
    let mut traces = Vec::with_capacity(episodes);
    for i in 0..episodes as u64 {
        let id = EpisodeId { seed: opts.seed, index: i };
        let ep = run_episode(agent.as_mut(), &mut env, id, episode_seed(opts.seed, i, TRACE_STREAM), false)?;
        write_trace_csv(&ep.trace, &opts.out_dir.join(format!("trace_{i}.csv")))?;
        traces.push(ep.trace);
    }
    Ok(traces)
}
