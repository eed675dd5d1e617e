//! Measurement-cost wrapper around a fully observable environment.
//!
//! The wrapper owns the base environment and exposes two interaction styles:
//!
//! * [`AcNomdp::osmboa_step`] executes one base step for an
//!   `(action, measure?)` tuple. Skipped steps pay the intrinsic bonus `c`
//!   and leave the agent with its memory of the last measured state.
//! * [`AcNomdp::dmsoa_schedule`] repeats one control action `k` times,
//!   collecting `c` on the first `k - 1` steps and the extrinsic reward plus a
//!   fresh measurement on the last one.
//!
//! Every base step contributes exactly one of `{c, r_ext}`. When the episode
//! ends (terminal or horizon) the final step is always measured and pays its
//! extrinsic reward, and any remaining repeats are dropped.

pub(crate) mod trace;

pub use trace::{measurement_ratio, DecisionRecord, MeasurementTrace};

use std::collections::VecDeque;

use crate::environments::{ActionId, EnvDescriptor, Environment, StateVector};
use crate::{Error, Result};

/// What the agent sees after a step.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationPacket {
    /// `None` is the EMPTY marker.
    pub payload: Option<StateVector>,
    /// True iff `payload` is a measurement of the current state.
    pub fresh: bool,
    /// Base step at which the payload was measured.
    pub source_step: usize,
}

impl ObservationPacket {
    /// Payload values, with EMPTY rendered as zeros of width `dim`.
    pub fn values(&self, dim: usize) -> Vec<f64> {
        match &self.payload {
            Some(s) => s.as_slice().to_vec(),
            None => vec![0.0; dim],
        }
    }
}

/// OSMBOA's per-step action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ActionTuple {
    pub control: ActionId,
    /// Measure the next state.
    pub measure: bool,
}

impl ActionTuple {
    /// Flat index used by tuple-valued Q networks: `control * 2 + measure`.
    pub fn index(self) -> usize {
        self.control * 2 + usize::from(self.measure)
    }

    pub fn from_index(index: usize) -> Self {
        Self {
            control: index / 2,
            measure: index % 2 == 1,
        }
    }
}

/// DMSOA's decision: apply `control` for `repeat` steps, measuring after the last.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SkipDecision {
    pub control: ActionId,
    pub repeat: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardSpec {
    /// Intrinsic reward paid for every unmeasured step.
    pub bonus: f64,
    pub gamma: f64,
}

impl RewardSpec {
    /// A human-readable warning when the bonus does not reach the largest
    /// extrinsic reward of a positive-reward environment.
    pub fn bonus_warning(&self, descriptor: &EnvDescriptor) -> Option<String> {
        (descriptor.r_ext_max > 0.0 && self.bonus < descriptor.r_ext_max).then(|| {
            format!(
                "intrinsic bonus {} is below the maximal extrinsic reward {}; the agent has little reason to skip measurements",
                self.bonus, descriptor.r_ext_max
            )
        })
    }
}

/// Observation served on unmeasured steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StaleMode {
    /// The last measured state.
    Memory,
    /// The EMPTY marker (zeros when vectorised).
    Zeros,
}

impl std::str::FromStr for StaleMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "memory" => Ok(StaleMode::Memory),
            "zeros" => Ok(StaleMode::Zeros),
            other => Err(format!("expected `memory` or `zeros`, got `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WrapperConfig {
    pub reward: RewardSpec,
    /// Largest DMSOA repeat count `K`.
    pub max_repeat: usize,
    /// Number of measured states kept for OSMBOA observations.
    pub memory_window: usize,
    pub stale_mode: StaleMode,
}

impl WrapperConfig {
    pub fn validate(&self) -> Result<()> {
        let gamma = self.reward.gamma;
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::config("acnomdp.gamma", format!("{gamma} is outside (0, 1]")));
        }
        if !self.reward.bonus.is_finite() {
            return Err(Error::config("acnomdp.c", "must be finite"));
        }
        if self.max_repeat == 0 {
            return Err(Error::config("acnomdp.K", "must be at least 1"));
        }
        if self.memory_window == 0 {
            return Err(Error::config("acnomdp.memory_window", "must be at least 1"));
        }
        Ok(())
    }
}

/// One agent-level transition. For OSMBOA it spans a single base step; for
/// DMSOA it spans the `j <= k` base steps actually executed.
#[derive(Debug, Clone, PartialEq)]
pub struct CostedTransition {
    pub obs: ObservationPacket,
    pub control: ActionId,
    /// `a_m` for OSMBOA tuples, the requested `k` for DMSOA decisions.
    pub a_m_or_k: usize,
    /// Aggregated reward, discounted inside the span.
    pub reward: f64,
    pub next_obs: ObservationPacket,
    pub terminal: bool,
    pub truncated: bool,
    pub base_steps: usize,
    pub measured_count: usize,
    /// Undiscounted sum of the per-step rewards the agent was paid.
    pub costed_sum: f64,
    /// Undiscounted true extrinsic reward over the span, measured or not.
    pub extrinsic_sum: f64,
}

impl CostedTransition {
    pub fn is_done(&self) -> bool {
        self.terminal || self.truncated
    }

    pub fn unmeasured_count(&self) -> usize {
        self.base_steps - self.measured_count
    }
}

/// The AC-NOMDP view of a base environment.
#[derive(Debug)]
pub struct AcNomdp<E> {
    env: E,
    cfg: WrapperConfig,
    descriptor: EnvDescriptor,
    /// Newest first: `(state, base step at which it was measured)`.
    memory: VecDeque<(StateVector, usize)>,
    current: Option<ObservationPacket>,
    done: bool,
}

impl<E: Environment> AcNomdp<E> {
    pub fn new(env: E, cfg: WrapperConfig) -> Result<Self> {
        cfg.validate()?;
        let descriptor = env.descriptor();
        Ok(Self {
            env,
            cfg,
            descriptor,
            memory: VecDeque::with_capacity(cfg.memory_window),
            current: None,
            done: true,
        })
    }

    pub fn config(&self) -> &WrapperConfig {
        &self.cfg
    }

    pub fn descriptor(&self) -> &EnvDescriptor {
        &self.descriptor
    }

    pub fn env(&self) -> &E {
        &self.env
    }

    pub fn env_mut(&mut self) -> &mut E {
        &mut self.env
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    /// Width of the vector returned by [`Self::osmboa_observe`].
    pub fn augmented_dim(&self) -> usize {
        self.cfg.memory_window * self.descriptor.obs_dim + 1
    }

    /// Resets the base environment; the initial observation is always fresh.
    pub fn reset(&mut self, seed: u64) -> ObservationPacket {
        let s0 = self.env.reset(seed);
        self.memory.clear();
        for _ in 0..self.cfg.memory_window {
            self.memory.push_back((s0.clone(), 0));
        }
        let packet = ObservationPacket {
            payload: Some(s0),
            fresh: true,
            source_step: 0,
        };
        self.current = Some(packet.clone());
        self.done = false;
        packet
    }

    /// The most recent observation packet.
    pub fn observation(&self) -> Result<&ObservationPacket> {
        self.current.as_ref().ok_or(Error::NotReset)
    }

    /// Memory states (newest first) followed by the freshness flag.
    pub fn osmboa_observe(&self) -> Result<Vec<f64>> {
        let current = self.observation()?;
        let dim = self.descriptor.obs_dim;
        let mut out = Vec::with_capacity(self.augmented_dim());
        if !current.fresh && self.cfg.stale_mode == StaleMode::Zeros {
            out.resize(self.cfg.memory_window * dim, 0.0);
        } else {
            for (state, _) in &self.memory {
                out.extend_from_slice(state.as_slice());
            }
        }
        out.push(if current.fresh { 1.0 } else { 0.0 });
        Ok(out)
    }

    fn check_active(&self, control: ActionId) -> Result<()> {
        if self.current.is_none() {
            return Err(Error::NotReset);
        }
        if self.done {
            return Err(Error::EpisodeFinished);
        }
        if control >= self.descriptor.n_actions {
            return Err(Error::InvalidAction {
                action: control,
                n_actions: self.descriptor.n_actions,
            });
        }
        Ok(())
    }

    fn remember(&mut self, state: StateVector, step: usize) -> ObservationPacket {
        self.memory.push_front((state.clone(), step));
        self.memory.truncate(self.cfg.memory_window);
        ObservationPacket {
            payload: Some(state),
            fresh: true,
            source_step: step,
        }
    }

    fn stale_packet(&self) -> ObservationPacket {
        let (state, step) = &self.memory[0];
        ObservationPacket {
            payload: match self.cfg.stale_mode {
                StaleMode::Memory => Some(state.clone()),
                StaleMode::Zeros => None,
            },
            fresh: false,
            source_step: *step,
        }
    }

    /// One base step with an explicit measurement choice.
    pub fn osmboa_step(&mut self, action: ActionTuple) -> Result<CostedTransition> {
        self.check_active(action.control)?;
        let obs = self.current.clone().expect("checked above");
        let out = self.env.step(action.control)?;
        let step = self.env.elapsed_steps();
        let ended = out.is_done();
        let measured = action.measure || ended;
        let reward = if measured { out.r_ext } else { self.cfg.reward.bonus };
        let next_obs = if measured {
            self.remember(out.next_state, step)
        } else {
            self.stale_packet()
        };
        self.current = Some(next_obs.clone());
        self.done = ended;
        Ok(CostedTransition {
            obs,
            control: action.control,
            a_m_or_k: usize::from(action.measure),
            reward,
            next_obs,
            terminal: out.terminal,
            truncated: out.truncated,
            base_steps: 1,
            measured_count: usize::from(measured),
            costed_sum: reward,
            extrinsic_sum: out.r_ext,
        })
    }

    /// Applies `decision.control` up to `decision.repeat` times, measuring
    /// only after the last application (or at episode end).
    ///
    /// The aggregated reward is `sum_{i<j-1} gamma^i c + gamma^(j-1) r_ext_j`
    /// where `j` is the number of steps executed.
    pub fn dmsoa_schedule(&mut self, decision: SkipDecision) -> Result<CostedTransition> {
        if decision.repeat == 0 || decision.repeat > self.cfg.max_repeat {
            return Err(Error::SkipOutOfRange {
                k: decision.repeat,
                max: self.cfg.max_repeat,
            });
        }
        self.check_active(decision.control)?;
        let obs = self.current.clone().expect("checked above");
        let RewardSpec { bonus, gamma } = self.cfg.reward;

        let mut reward = 0.0;
        let mut discount = 1.0;
        let mut costed_sum = 0.0;
        let mut extrinsic_sum = 0.0;
        let mut executed = 0;
        loop {
            let out = self.env.step(decision.control)?;
            executed += 1;
            extrinsic_sum += out.r_ext;
            if executed == decision.repeat || out.is_done() {
                reward += discount * out.r_ext;
                costed_sum += out.r_ext;
                let step = self.env.elapsed_steps();
                let ended = out.is_done();
                let next_obs = self.remember(out.next_state, step);
                self.current = Some(next_obs.clone());
                self.done = ended;
                return Ok(CostedTransition {
                    obs,
                    control: decision.control,
                    a_m_or_k: decision.repeat,
                    reward,
                    next_obs,
                    terminal: out.terminal,
                    truncated: out.truncated,
                    base_steps: executed,
                    measured_count: 1,
                    costed_sum,
                    extrinsic_sum,
                });
            }
            reward += discount * bonus;
            costed_sum += bonus;
            discount *= gamma;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environments::{make_env, CartPole, CartPoleParams, ChainParams, ChainWorld, EnvOptions};

    fn cfg(bonus: f64, gamma: f64, k: usize) -> WrapperConfig {
        WrapperConfig {
            reward: RewardSpec { bonus, gamma },
            max_repeat: k,
            memory_window: 1,
            stale_mode: StaleMode::Memory,
        }
    }

    fn cartpole(bonus: f64, gamma: f64) -> AcNomdp<CartPole> {
        AcNomdp::new(CartPole::new(CartPoleParams::default()), cfg(bonus, gamma, 3)).unwrap()
    }

    #[test]
    fn tuple_index_mapping() {
        for i in 0..6 {
            assert_eq!(ActionTuple::from_index(i).index(), i);
        }
        assert_eq!(
            ActionTuple::from_index(2),
            ActionTuple { control: 1, measure: false }
        );
    }

    #[test]
    fn osmboa_measured_step_pays_extrinsic() {
        let mut w = cartpole(1.1, 1.0);
        w.reset(3);
        let t = w.osmboa_step(ActionTuple { control: 0, measure: true }).unwrap();
        assert_eq!(t.reward, 1.0);
        assert!(t.next_obs.fresh);
        assert_eq!(t.measured_count, 1);
    }

    #[test]
    fn osmboa_skip_pays_bonus_and_serves_memory() {
        let mut w = cartpole(1.1, 1.0);
        let s0 = w.reset(3);
        let t = w.osmboa_step(ActionTuple { control: 0, measure: false }).unwrap();
        assert_eq!(t.reward, 1.1);
        assert!(!t.next_obs.fresh);
        assert_eq!(t.next_obs.payload, s0.payload);
        assert_eq!(t.next_obs.source_step, 0);
        assert_eq!(t.measured_count, 0);
    }

    #[test]
    fn acrobot_skip_bonus() {
        let env = make_env("acrobot", &EnvOptions::default()).unwrap();
        let mut w = AcNomdp::new(env, cfg(-0.85, 1.0, 3)).unwrap();
        w.reset(0);
        let t = w.osmboa_step(ActionTuple { control: 2, measure: false }).unwrap();
        assert_eq!(t.reward, -0.85);
    }

    #[test]
    fn observe_flag_and_ordering() {
        let mut w = cartpole(1.1, 1.0);
        w.reset(5);
        let first = w.osmboa_observe().unwrap();
        assert_eq!(first.len(), 5);
        assert_eq!(first[4], 1.0);
        w.osmboa_step(ActionTuple { control: 1, measure: false }).unwrap();
        let stale = w.osmboa_observe().unwrap();
        assert_eq!(&stale[..4], &first[..4]);
        assert_eq!(stale[4], 0.0);

        let mut w = AcNomdp::new(
            CartPole::new(CartPoleParams::default()),
            WrapperConfig { memory_window: 2, ..cfg(1.1, 1.0, 3) },
        )
        .unwrap();
        w.reset(5);
        let s1 = w.osmboa_step(ActionTuple { control: 1, measure: true }).unwrap().next_obs;
        let s2 = w.osmboa_step(ActionTuple { control: 0, measure: true }).unwrap().next_obs;
        let obs = w.osmboa_observe().unwrap();
        assert_eq!(obs.len(), 9);
        assert_eq!(&obs[..4], s2.payload.unwrap().as_slice());
        assert_eq!(&obs[4..8], s1.payload.unwrap().as_slice());
        assert_eq!(obs[8], 1.0);
    }

    #[test]
    fn zeros_mode_serves_empty() {
        let mut w = AcNomdp::new(
            CartPole::new(CartPoleParams::default()),
            WrapperConfig { stale_mode: StaleMode::Zeros, ..cfg(1.1, 1.0, 3) },
        )
        .unwrap();
        w.reset(5);
        let t = w.osmboa_step(ActionTuple { control: 1, measure: false }).unwrap();
        assert_eq!(t.next_obs.payload, None);
        assert_eq!(w.osmboa_observe().unwrap(), vec![0.0; 5]);
    }

    #[test]
    fn schedule_aggregates_undiscounted() {
        let mut w = cartpole(1.1, 1.0);
        w.reset(1);
        let t = w.dmsoa_schedule(SkipDecision { control: 0, repeat: 3 }).unwrap();
        assert!(!t.terminal);
        assert_eq!(t.base_steps, 3);
        assert!((t.reward - 3.2).abs() < 1e-12);
        assert!(t.next_obs.fresh);
        assert_eq!(t.next_obs.source_step, 3);
    }

    #[test]
    fn schedule_aggregates_discounted() {
        let mut w = cartpole(1.1, 0.99);
        w.reset(1);
        let t = w.dmsoa_schedule(SkipDecision { control: 1, repeat: 3 }).unwrap();
        assert!((t.reward - 3.1691).abs() < 1e-12);
    }

    #[test]
    fn single_repeat_is_a_measured_step() {
        let mut w = cartpole(1.1, 0.99);
        w.reset(1);
        let t = w.dmsoa_schedule(SkipDecision { control: 1, repeat: 1 }).unwrap();
        assert_eq!(t.reward, 1.0);
        assert_eq!(t.base_steps, 1);
    }

    #[test]
    fn repeat_out_of_range() {
        let mut w = cartpole(1.1, 0.99);
        w.reset(1);
        for k in [0, 4] {
            assert!(matches!(
                w.dmsoa_schedule(SkipDecision { control: 0, repeat: k }),
                Err(Error::SkipOutOfRange { .. })
            ));
        }
    }

    #[test]
    fn terminal_cuts_skip_short_and_measures() {
        let mut w = AcNomdp::new(ChainWorld::new(ChainParams::new(3)), cfg(-0.85, 1.0, 3)).unwrap();
        w.reset(0);
        let t = w.dmsoa_schedule(SkipDecision { control: 1, repeat: 3 }).unwrap();
        assert!(t.terminal);
        assert_eq!(t.base_steps, 2);
        assert_eq!(t.measured_count, 1);
        assert!((t.reward - (-1.85)).abs() < 1e-12);
        assert!(t.next_obs.fresh);
        assert!(w.dmsoa_schedule(SkipDecision { control: 1, repeat: 1 }).is_err());
    }

    #[test]
    fn osmboa_terminal_step_is_measured() {
        let mut w = AcNomdp::new(ChainWorld::new(ChainParams::new(2)), cfg(-0.85, 1.0, 3)).unwrap();
        w.reset(0);
        let t = w.osmboa_step(ActionTuple { control: 1, measure: false }).unwrap();
        assert!(t.terminal && t.next_obs.fresh);
        assert_eq!(t.reward, -1.0);
        assert_eq!(t.a_m_or_k, 0);
    }

    #[test]
    fn bonus_warning_only_for_low_positive_bonus() {
        let d = CartPole::new(CartPoleParams::default()).descriptor();
        assert!(RewardSpec { bonus: 0.9, gamma: 1.0 }.bonus_warning(&d).is_some());
        assert!(RewardSpec { bonus: 1.1, gamma: 1.0 }.bonus_warning(&d).is_none());
    }

    #[test]
    fn rejects_bad_config() {
        let env = CartPole::new(CartPoleParams::default());
        assert!(AcNomdp::new(env.clone(), cfg(1.1, 0.0, 3)).is_err());
        assert!(AcNomdp::new(env.clone(), cfg(1.1, 1.5, 3)).is_err());
        assert!(AcNomdp::new(env, cfg(1.1, 1.0, 0)).is_err());
    }
}
