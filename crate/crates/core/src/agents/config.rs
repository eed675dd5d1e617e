use crate::neural::{Activation, Loss, OptimizerKind};
use crate::replay::ReplayConfig;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgentKind {
    Dmsoa,
    Osmboa,
}

impl AgentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AgentKind::Dmsoa => "dmsoa",
            AgentKind::Osmboa => "osmboa",
        }
    }
}

impl std::str::FromStr for AgentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "dmsoa" => Ok(AgentKind::Dmsoa),
            "osmboa" => Ok(AgentKind::Osmboa),
            other => Err(Error::UnknownAgent(other.to_string())),
        }
    }
}

impl std::fmt::Display for AgentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How the chosen control action is appended to the measurement network input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlEncoding {
    /// One scalar `a_c / (n_actions - 1)`.
    Scalar,
    OneHot,
}

impl ControlEncoding {
    pub fn width(self, n_actions: usize) -> usize {
        match self {
            ControlEncoding::Scalar => 1,
            ControlEncoding::OneHot => n_actions,
        }
    }

    pub fn append(self, control: usize, n_actions: usize, out: &mut Vec<f64>) {
        match self {
            ControlEncoding::Scalar => out.push(control as f64 / (n_actions - 1) as f64),
            ControlEncoding::OneHot => {
                out.extend((0..n_actions).map(|a| if a == control { 1.0 } else { 0.0 }))
            }
        }
    }
}

impl std::str::FromStr for ControlEncoding {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "scalar" => Ok(ControlEncoding::Scalar),
            "onehot" => Ok(ControlEncoding::OneHot),
            other => Err(format!("expected `scalar` or `onehot`, got `{other}`")),
        }
    }
}

/// Which TD error drives DMSOA replay priorities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrioritySource {
    Control,
    Max,
}

impl std::str::FromStr for PrioritySource {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "control" => Ok(PrioritySource::Control),
            "max" => Ok(PrioritySource::Max),
            other => Err(format!("expected `control` or `max`, got `{other}`")),
        }
    }
}

/// Linear decay from `start` to `end` over `decay_decisions`, constant afterwards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    pub decay_decisions: u64,
}

impl EpsilonSchedule {
    pub fn value(&self, decisions: u64) -> f64 {
        if decisions >= self.decay_decisions {
            return self.end;
        }
        let frac = decisions as f64 / self.decay_decisions as f64;
        self.start + (self.end - self.start) * frac
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainSchedule {
    /// Decision budget; exploration and importance-weight annealing are
    /// spread over it.
    pub total_decisions: u64,
    pub warmup_decisions: u64,
    pub batch_size: usize,
    pub train_every: u64,
    pub eps_control: EpsilonSchedule,
    pub eps_measure: EpsilonSchedule,
}

impl TrainSchedule {
    /// Both epsilons decay `1.0 -> 0.05` over the first 60% of the budget.
    pub fn with_budget(total_decisions: u64) -> Self {
        let eps = EpsilonSchedule {
            start: 1.0,
            end: 0.05,
            decay_decisions: (total_decisions as f64 * 0.6).round().max(1.0) as u64,
        };
        Self {
            total_decisions,
            warmup_decisions: 1_000.min(total_decisions / 2),
            batch_size: 64,
            train_every: 1,
            eps_control: eps,
            eps_measure: eps,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentConfig {
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub optimizer: OptimizerKind,
    pub lr: f64,
    pub loss: Loss,
    /// Clip the gradient norm of every update to this value.
    pub grad_clip: Option<f64>,
    /// Target networks are synced every `tau` training decisions.
    pub tau: u64,
    pub encoding: ControlEncoding,
    pub priority: PrioritySource,
    pub replay: ReplayConfig,
    /// Multi-step return length for OSMBOA. DMSOA always uses single
    /// decisions, which already span their repeat count.
    pub n_step: usize,
    pub schedule: TrainSchedule,
    /// Optional per-dimension multiplier applied to measured states before
    /// they enter a network.
    pub input_scale: Option<Vec<f64>>,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            hidden: vec![64, 64],
            activation: Activation::Relu,
            optimizer: OptimizerKind::Adam,
            lr: 1e-3,
            loss: Loss::Mse,
            grad_clip: None,
            tau: 500,
            encoding: ControlEncoding::Scalar,
            priority: PrioritySource::Control,
            replay: ReplayConfig::default(),
            n_step: 3,
            schedule: TrainSchedule::with_budget(100_000),
            input_scale: None,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        let s = &self.schedule;
        if s.total_decisions == 0 {
            return Err(Error::config("schedule.total_decisions", "must be positive"));
        }
        if s.warmup_decisions >= s.total_decisions {
            return Err(Error::config(
                "schedule.warmup",
                format!("{} must be below total_decisions {}", s.warmup_decisions, s.total_decisions),
            ));
        }
        if s.batch_size == 0 || s.batch_size > self.replay.capacity {
            return Err(Error::config(
                "schedule.batch_size",
                format!("{} must be in 1..={}", s.batch_size, self.replay.capacity),
            ));
        }
        if s.train_every == 0 {
            return Err(Error::config("schedule.train_every", "must be positive"));
        }
        for (key, eps) in [("schedule.eps_control", s.eps_control), ("schedule.eps_measure", s.eps_measure)] {
            if !(0.0..=1.0).contains(&eps.start) || !(0.0..=1.0).contains(&eps.end) {
                return Err(Error::config(key, "epsilon must lie in [0, 1]"));
            }
        }
        if self.tau == 0 {
            return Err(Error::config("agent.tau", "must be positive"));
        }
        if !(self.lr > 0.0) {
            return Err(Error::config("neural.lr", "must be positive"));
        }
        if self.n_step == 0 {
            return Err(Error::config("replay.n_step", "must be at least 1"));
        }
        if self.replay.capacity == 0 {
            return Err(Error::config("replay.capacity", "must be positive"));
        }
        if !(self.replay.alpha >= 0.0) || !(0.0..=1.0).contains(&self.replay.beta0) {
            return Err(Error::config("replay.alpha", "alpha >= 0 and beta0 in [0, 1] required"));
        }
        if self.hidden.contains(&0) {
            return Err(Error::config("neural.hidden", "layer sizes must be positive"));
        }
        Ok(())
    }

    /// Importance-sampling exponent after `decisions` training decisions.
    pub fn beta(&self, decisions: u64) -> f64 {
        let frac = (decisions as f64 / self.schedule.total_decisions as f64).min(1.0);
        self.replay.beta0 + (1.0 - self.replay.beta0) * frac
    }

    pub(crate) fn scale_into(&self, values: &[f64], out: &mut Vec<f64>) {
        match &self.input_scale {
            Some(scale) => out.extend(values.iter().zip(scale.iter().chain(std::iter::repeat(&1.0))).map(|(v, s)| v * s)),
            None => out.extend_from_slice(values),
        }
    }
}
