use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::RunConfig;
use super::csv::{episode_line, eval_line, EPISODES_HEADER, EVAL_HEADER};
use super::report::summarize;
use crate::acnomdp::AcNomdp;
use crate::agents::{build_agent, episode_seed, run_episode, Agent, BoxedAcNomdp, EndCause, EpisodeId, EpisodeLog};
use crate::environments::make_env;
use crate::{Error, Result};

const TRAIN_STREAM: u64 = 0;
const EVAL_STREAM: u64 = 1;
const AGENT_STREAM: u64 = 7;

/// Mean of a greedy evaluation over a fixed set of start states.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub seed: u64,
    /// Training episodes completed before this evaluation.
    pub episode: u64,
    pub decisions: u64,
    pub mean_costed_return: f64,
    pub std_costed_return: f64,
    pub mean_base_steps: f64,
    pub terminal_fraction: f64,
    pub measured_steps: usize,
    pub unmeasured_steps: usize,
}

#[derive(Debug, Clone)]
pub struct SeedOutput {
    pub seed: u64,
    pub episodes: Vec<EpisodeLog>,
    pub evals: Vec<EvalRow>,
    /// Serialized best greedy policy.
    pub checkpoint: Vec<u8>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub dir: PathBuf,
    pub seeds: Vec<SeedOutput>,
}

/// Worker count: `FRUGAL_RL_THREADS` if set, otherwise the available cores.
pub fn thread_count() -> usize {
    std::env::var("FRUGAL_RL_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn wrapper(cfg: &RunConfig) -> Result<BoxedAcNomdp> {
    AcNomdp::new(make_env(&cfg.env, &cfg.env_options)?, cfg.wrapper)
}

fn evaluate(agent: &mut dyn Agent, env: &mut BoxedAcNomdp, cfg: &RunConfig, seed: u64, episode: u64) -> Result<EvalRow> {
    let mut returns = Vec::with_capacity(cfg.eval_episodes as usize);
    let (mut steps, mut terminal, mut measured, mut unmeasured) = (0usize, 0usize, 0usize, 0usize);
    for i in 0..cfg.eval_episodes {
        let id = EpisodeId { seed, index: i };
        let ep = run_episode(agent, env, id, episode_seed(seed, i, EVAL_STREAM), false)?;
        returns.push(ep.log.costed_return);
        steps += ep.log.base_steps;
        terminal += usize::from(ep.log.end == EndCause::Terminal);
        measured += ep.log.measured_steps;
        unmeasured += ep.log.unmeasured_steps;
    }
    let n = returns.len() as f64;
    let mean = returns.iter().sum::<f64>() / n;
    let var = returns.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n;
    Ok(EvalRow {
        seed,
        episode,
        decisions: agent.decisions_made(),
        mean_costed_return: mean,
        std_costed_return: var.sqrt(),
        mean_base_steps: steps as f64 / n,
        terminal_fraction: terminal as f64 / n,
        measured_steps: measured,
        unmeasured_steps: unmeasured,
    })
}

/// One independent training run. Stops after `schedule.episodes` episodes or
/// once the decision budget is spent, whichever comes first.
pub fn run_seed(cfg: &RunConfig, seed: u64) -> Result<SeedOutput> {
    let mut env = wrapper(cfg)?;
    let mut eval_env = wrapper(cfg)?;
    let agent_cfg = cfg.agent_config();
    let mut agent = build_agent(cfg.agent, &agent_cfg, &env, episode_seed(seed, 0, AGENT_STREAM))?;
    let mut episodes = Vec::new();
    let mut evals = Vec::new();
    let mut best: Option<(f64, Vec<u8>)> = None;
    let mut record = |row: EvalRow, agent: &dyn Agent, evals: &mut Vec<EvalRow>| -> Result<()> {
        if best.as_ref().map_or(true, |(b, _)| row.mean_costed_return > *b) {
            let mut bytes = Vec::new();
            agent.save(&mut bytes)?;
            best = Some((row.mean_costed_return, bytes));
        }
        evals.push(row);
        Ok(())
    };
    let mut index = 0u64;
    loop {
        let budget_spent = agent.decisions_made() >= cfg.total_decisions;
        let episodes_done = cfg.episodes.is_some_and(|n| index >= n);
        if budget_spent || episodes_done {
            break;
        }
        let id = EpisodeId { seed, index };
        let ep = run_episode(agent.as_mut(), &mut env, id, episode_seed(seed, index, TRAIN_STREAM), true)?;
        episodes.push(ep.log);
        index += 1;
        if index % cfg.eval_period == 0 {
            let row = evaluate(agent.as_mut(), &mut eval_env, cfg, seed, index)?;
            record(row, agent.as_ref(), &mut evals)?;
        }
    }
    if evals.last().map_or(true, |e| e.episode != index) {
        let row = evaluate(agent.as_mut(), &mut eval_env, cfg, seed, index)?;
        record(row, agent.as_ref(), &mut evals)?;
    }
    Ok(SeedOutput {
        seed,
        episodes,
        evals,
        checkpoint: best.map(|(_, b)| b).unwrap_or_default(),
    })
}

fn write_outputs(dir: &Path, seeds: &[SeedOutput]) -> Result<()> {
    std::fs::create_dir_all(dir.join("checkpoints"))?;
    let mut episodes = String::from(EPISODES_HEADER);
    episodes.push('\n');
    let mut evals = String::from(EVAL_HEADER);
    evals.push('\n');
    for s in seeds {
        s.episodes.iter().for_each(|e| episode_line(&mut episodes, e));
        s.evals.iter().for_each(|e| eval_line(&mut evals, e));
        std::fs::write(dir.join("checkpoints").join(format!("seed_{}.ckpt", s.seed)), &s.checkpoint)?;
    }
    std::fs::write(dir.join("episodes.csv"), episodes)?;
    std::fs::write(dir.join("eval.csv"), evals)?;
    Ok(())
}

/// Trains every seed (in parallel, one run per worker), then writes the
/// merged CSVs in seed-list order and the summary.
pub fn run_experiment(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count().min(cfg.seeds.len()))
        .build()
        .map_err(|e| Error::config("FRUGAL_RL_THREADS", e.to_string()))?;
    let seeds = pool.install(|| {
        cfg.seeds
            .par_iter()
            .map(|&seed| run_seed(cfg, seed))
            .collect::<Result<Vec<_>>>()
    })?;
    write_outputs(&cfg.out, &seeds)?;
    summarize(&cfg.out)?;
    Ok(RunOutput { dir: cfg.out.clone(), seeds })
}
