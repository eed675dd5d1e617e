use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::acnomdp::{RewardSpec, StaleMode, WrapperConfig};
use crate::agents::{AgentConfig, AgentKind, EpsilonSchedule, TrainSchedule};
use crate::environments::{AcrobotObservation, EnvName, EnvOptions};
use crate::neural::{Activation, Loss, OptimizerKind};
use crate::{Error, Result};

/// Exploration endpoints; decay length is a fraction of the decision budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exploration {
    pub control_start: f64,
    pub control_end: f64,
    pub measure_start: f64,
    pub measure_end: f64,
    pub decay_fraction: f64,
}

impl Default for Exploration {
    fn default() -> Self {
        Self {
            control_start: 1.0,
            control_end: 0.05,
            measure_start: 1.0,
            measure_end: 0.05,
            decay_fraction: 0.6,
        }
    }
}

/// Everything a `train` invocation needs. Built from flat `key = value` text.
///
/// | key | default |
/// |-----|---------|
/// | `env` | `cartpole` |
/// | `agent` | `dmsoa` |
/// | `seeds` | `0,1,...,19` |
/// | `out` | `runs/latest` |
/// | `acnomdp.c`, `acnomdp.gamma`, `acnomdp.K` | `1.1`, `0.99`, `3` |
/// | `acnomdp.memory_window`, `acnomdp.stale_mode` | `1`, `memory` |
/// | `env.acrobot_obs`, `env.chain_reward`, `env.chain_horizon` | `angles`, `-1`, `10*N` |
/// | `neural.hidden`, `neural.activation`, `neural.optimizer` | `64,64`, `relu`, `adam` |
/// | `neural.lr`, `neural.loss`, `neural.huber_delta`, `neural.grad_clip` | `0.001`, `mse`, `1`, none |
/// | `agent.tau`, `agent.encoding`, `agent.priority`, `agent.input_scale` | `500`, `scalar`, `control`, none |
/// | `replay.capacity`, `replay.alpha`, `replay.beta0`, `replay.eps`, `replay.n_step` | `50000`, `0.6`, `0.4`, `0.001`, `3` |
/// | `schedule.total_decisions`, `schedule.episodes`, `schedule.warmup` | `100000`, none, `1000` |
/// | `schedule.batch_size`, `schedule.train_every` | `64`, `1` |
/// | `schedule.eps_c_start`, `schedule.eps_c_end`, `schedule.eps_m_start`, `schedule.eps_m_end`, `schedule.eps_decay` | `1`, `0.05`, `1`, `0.05`, `0.6` |
/// | `eval.period`, `eval.episodes` | `10`, `20` |
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub env: String,
    pub agent: AgentKind,
    pub seeds: Vec<u64>,
    pub out: PathBuf,
    pub wrapper: WrapperConfig,
    pub env_options: EnvOptions,
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub optimizer: OptimizerKind,
    pub lr: f64,
    pub huber: bool,
    pub huber_delta: f64,
    pub grad_clip: Option<f64>,
    pub tau: u64,
    pub encoding: crate::agents::ControlEncoding,
    pub priority: crate::agents::PrioritySource,
    pub input_scale: Option<Vec<f64>>,
    pub replay: crate::replay::ReplayConfig,
    pub n_step: usize,
    pub total_decisions: u64,
    /// Optional cap on training episodes per seed.
    pub episodes: Option<u64>,
    pub warmup: u64,
    pub batch_size: usize,
    pub train_every: u64,
    pub exploration: Exploration,
    /// Greedy evaluation every `eval_period` training episodes.
    pub eval_period: u64,
    pub eval_episodes: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let agent = AgentConfig::default();
        Self {
            env: "cartpole".into(),
            agent: AgentKind::Dmsoa,
            seeds: (0..20).collect(),
            out: PathBuf::from("runs/latest"),
            wrapper: WrapperConfig {
                reward: RewardSpec { bonus: 1.1, gamma: 0.99 },
                max_repeat: 3,
                memory_window: 1,
                stale_mode: StaleMode::Memory,
            },
            env_options: EnvOptions::default(),
            hidden: agent.hidden,
            activation: agent.activation,
            optimizer: agent.optimizer,
            lr: agent.lr,
            huber: false,
            huber_delta: 1.0,
            grad_clip: None,
            tau: agent.tau,
            encoding: agent.encoding,
            priority: agent.priority,
            input_scale: None,
            replay: agent.replay,
            n_step: agent.n_step,
            total_decisions: 100_000,
            episodes: None,
            warmup: 1_000,
            batch_size: 64,
            train_every: 1,
            exploration: Exploration::default(),
            eval_period: 10,
            eval_episodes: 20,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| Error::config(key, format!("cannot parse `{value}`: {e}")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

fn parse_optional<T: FromStr>(key: &str, value: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    match value {
        "none" | "" => Ok(None),
        v => parse(key, v).map(Some),
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config(format!("line {}", lineno + 1), format!("expected `key = value`, got `{line}`"))
            })?;
            cfg.set(key.trim(), value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Applies one setting. Unknown keys are rejected by name.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "env" => {
                EnvName::from_str(value)?;
                self.env = value.to_string();
            }
            "agent" => self.agent = value.parse()?,
            "seeds" => self.seeds = parse_list(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "acnomdp.c" => self.wrapper.reward.bonus = parse(key, value)?,
            "acnomdp.gamma" => self.wrapper.reward.gamma = parse(key, value)?,
            "acnomdp.K" => self.wrapper.max_repeat = parse(key, value)?,
            "acnomdp.memory_window" => self.wrapper.memory_window = parse(key, value)?,
            "acnomdp.stale_mode" => self.wrapper.stale_mode = parse(key, value)?,
            "env.acrobot_obs" => {
                self.env_options.acrobot_observation = match value {
                    "angles" => AcrobotObservation::Angles,
                    "trig" => AcrobotObservation::Trig,
                    _ => return Err(Error::config(key, "expected `angles` or `trig`")),
                }
            }
            "env.chain_reward" => self.env_options.chain_reward = parse(key, value)?,
            "env.chain_horizon" => self.env_options.chain_horizon = parse_optional(key, value)?,
            "neural.hidden" => {
                self.hidden = if value == "none" { Vec::new() } else { parse_list(key, value)? }
            }
            "neural.activation" => self.activation = parse(key, value)?,
            "neural.optimizer" => self.optimizer = parse(key, value)?,
            "neural.lr" => self.lr = parse(key, value)?,
            "neural.loss" => {
                self.huber = match value {
                    "mse" => false,
                    "huber" => true,
                    _ => return Err(Error::config(key, "expected `mse` or `huber`")),
                }
            }
            "neural.huber_delta" => self.huber_delta = parse(key, value)?,
            "neural.grad_clip" => self.grad_clip = parse_optional(key, value)?,
            "agent.tau" => self.tau = parse(key, value)?,
            "agent.encoding" => self.encoding = parse(key, value)?,
            "agent.priority" => self.priority = parse(key, value)?,
            "agent.input_scale" => {
                self.input_scale = if value == "none" { None } else { Some(parse_list(key, value)?) }
            }
            "replay.capacity" => self.replay.capacity = parse(key, value)?,
            "replay.alpha" => self.replay.alpha = parse(key, value)?,
            "replay.beta0" => self.replay.beta0 = parse(key, value)?,
            "replay.eps" => self.replay.eps = parse(key, value)?,
            "replay.n_step" => self.n_step = parse(key, value)?,
            "schedule.total_decisions" => self.total_decisions = parse(key, value)?,
            "schedule.episodes" => self.episodes = parse_optional(key, value)?,
            "schedule.warmup" => self.warmup = parse(key, value)?,
            "schedule.batch_size" => self.batch_size = parse(key, value)?,
            "schedule.train_every" => self.train_every = parse(key, value)?,
            "schedule.eps_c_start" => self.exploration.control_start = parse(key, value)?,
            "schedule.eps_c_end" => self.exploration.control_end = parse(key, value)?,
            "schedule.eps_m_start" => self.exploration.measure_start = parse(key, value)?,
            "schedule.eps_m_end" => self.exploration.measure_end = parse(key, value)?,
            "schedule.eps_decay" => self.exploration.decay_fraction = parse(key, value)?,
            "eval.period" => self.eval_period = parse(key, value)?,
            "eval.episodes" => self.eval_episodes = parse(key, value)?,
            other => return Err(Error::config(other, "unknown key")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        EnvName::from_str(&self.env)?;
        self.wrapper.validate()?;
        if self.seeds.is_empty() {
            return Err(Error::config("seeds", "at least one seed required"));
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::config("seeds", "seeds must be distinct"));
        }
        if !(0.0..=1.0).contains(&self.exploration.decay_fraction) || self.exploration.decay_fraction == 0.0 {
            return Err(Error::config("schedule.eps_decay", "must lie in (0, 1]"));
        }
        if self.huber && !(self.huber_delta > 0.0) {
            return Err(Error::config("neural.huber_delta", "must be positive"));
        }
        if self.eval_period == 0 {
            return Err(Error::config("eval.period", "must be positive"));
        }
        if self.eval_episodes == 0 {
            return Err(Error::config("eval.episodes", "must be positive"));
        }
        if self.episodes == Some(0) {
            return Err(Error::config("schedule.episodes", "must be positive"));
        }
        if let Some(h) = self.env_options.chain_horizon {
            if h == 0 {
                return Err(Error::config("env.chain_horizon", "must be positive"));
            }
        }
        self.agent_config().validate()
    }

    pub fn agent_config(&self) -> AgentConfig {
        let e = self.exploration;
        let decay = ((self.total_decisions as f64 * e.decay_fraction).round() as u64).max(1);
        AgentConfig {
            hidden: self.hidden.clone(),
            activation: self.activation,
            optimizer: self.optimizer,
            lr: self.lr,
            loss: if self.huber { Loss::Huber { delta: self.huber_delta } } else { Loss::Mse },
            grad_clip: self.grad_clip,
            tau: self.tau,
            encoding: self.encoding,
            priority: self.priority,
            replay: self.replay,
            n_step: self.n_step,
            schedule: TrainSchedule {
                total_decisions: self.total_decisions,
                warmup_decisions: self.warmup,
                batch_size: self.batch_size,
                train_every: self.train_every,
                eps_control: EpsilonSchedule { start: e.control_start, end: e.control_end, decay_decisions: decay },
                eps_measure: EpsilonSchedule { start: e.measure_start, end: e.measure_end, decay_decisions: decay },
            },
            input_scale: self.input_scale.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_namespaced_keys() {
        let cfg = RunConfig::parse(
            "env = acrobot\nagent = osmboa\nseeds = 3, 4\n# comment\nacnomdp.c = -0.85\nreplay.alpha = 0.5\nneural.hidden = 32,16\n",
        )
        .unwrap();
        assert_eq!(cfg.env, "acrobot");
        assert_eq!(cfg.agent, AgentKind::Osmboa);
        assert_eq!(cfg.seeds, vec![3, 4]);
        assert_eq!(cfg.wrapper.reward.bonus, -0.85);
        assert_eq!(cfg.replay.alpha, 0.5);
        assert_eq!(cfg.hidden, vec![32, 16]);
    }

    #[test]
    fn unknown_key_is_named() {
        match RunConfig::parse("replay.alhpa = 0.6") {
            Err(Error::Config { key, .. }) => assert_eq!(key, "replay.alhpa"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_value_names_key() {
        match RunConfig::parse("acnomdp.gamma = 1.5") {
            Err(Error::Config { key, .. }) => assert_eq!(key, "acnomdp.gamma"),
            other => panic!("unexpected {other:?}"),
        }
        match RunConfig::parse("seeds = 1,1") {
            Err(Error::Config { key, .. }) => assert_eq!(key, "seeds"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_env_and_agent() {
        assert!(matches!(RunConfig::parse("env = pong"), Err(Error::UnknownEnv(_))));
        assert!(matches!(RunConfig::parse("agent = dqn"), Err(Error::UnknownAgent(_))));
    }

    #[test]
    fn exploration_decay_follows_budget() {
        let cfg = RunConfig::parse("schedule.total_decisions = 1000\nschedule.warmup = 10").unwrap();
        assert_eq!(cfg.agent_config().schedule.eps_control.decay_decisions, 600);
    }
}
