//! Randomized-episode identities of the AC-NOMDP wrapper, checked against a
//! twin copy of the base environment stepped in lockstep.

use frugal_rl::acnomdp::{
    AcNomdp, ActionTuple, MeasurementTrace, RewardSpec, SkipDecision, StaleMode, WrapperConfig,
};
use frugal_rl::environments::{make_env, AcrobotObservation, EnvOptions, Environment, StateVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

macro_rules! ensure_eq {
    ($a:expr, $b:expr) => {{
        let (a, b) = (&$a, &$b);
        if a != b {
            return Err(format!("{} != {}: {:?} vs {:?} (line {})", stringify!($a), stringify!($b), a, b, line!()));
        }
    }};
}

pub type Check = Result<(), String>;

#[derive(Debug, Clone)]
pub struct Case {
    pub env: &'static str,
    pub options: EnvOptions,
    pub reset_seed: u64,
    pub policy_seed: u64,
    pub cfg: WrapperConfig,
    pub measure_prob: f64,
}

impl Case {
    pub fn from_seed(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let env = ["cartpole", "acrobot", "chain:5", "chain:9"][rng.gen_range(0..4)];
        Case {
            env,
            options: EnvOptions {
                acrobot_observation: if rng.gen_bool(0.5) {
                    AcrobotObservation::Trig
                } else {
                    AcrobotObservation::Angles
                },
                ..EnvOptions::default()
            },
            reset_seed: rng.gen(),
            policy_seed: rng.gen(),
            cfg: WrapperConfig {
                reward: RewardSpec {
                    bonus: rng.gen_range(-2.0..2.0),
                    gamma: rng.gen_range(0.5..=1.0),
                },
                max_repeat: rng.gen_range(1..=6),
                memory_window: rng.gen_range(1..=4),
                stale_mode: if rng.gen_bool(0.5) { StaleMode::Zeros } else { StaleMode::Memory },
            },
            measure_prob: rng.gen_range(0.0..=1.0),
        }
    }
}

fn pair(case: &Case) -> (AcNomdp<Box<dyn Environment>>, Box<dyn Environment>) {
    let mut wrapper = AcNomdp::new(make_env(case.env, &case.options).unwrap(), case.cfg).unwrap();
    let mut twin = make_env(case.env, &case.options).unwrap();
    let a = wrapper.reset(case.reset_seed);
    let b = twin.reset(case.reset_seed);
    assert_eq!(a.payload, Some(b));
    assert!(a.fresh);
    (wrapper, twin)
}

fn check_tiling(trace: &MeasurementTrace, measured_flags: &[bool]) -> Check {
    let mut next = 1;
    for (i, d) in trace.decisions.iter().enumerate() {
        ensure_eq!(d.index, i);
        ensure_eq!(d.start_step, next);
        ensure!(d.span() >= 1, "empty decision span");
        next += d.span();
    }
    ensure_eq!(trace.per_step(), measured_flags.to_vec());
    ensure_eq!(trace.measured_steps() + trace.unmeasured_steps(), trace.base_steps());
    Ok(())
}

/// Per-step tuples: exclusive reward routing, freshness, memory contents and
/// step conservation.
pub fn check_osmboa(case: &Case) -> Check {
    let (mut wrapper, mut twin) = pair(case);
    let n = wrapper.descriptor().n_actions;
    let dim = wrapper.descriptor().obs_dim;
    let w = case.cfg.memory_window;
    let bonus = case.cfg.reward.bonus;
    let mut rng = ChaCha8Rng::seed_from_u64(case.policy_seed);
    let s0: StateVector = wrapper.observation().unwrap().payload.clone().unwrap();
    let mut memory: Vec<(StateVector, usize)> = vec![(s0, 0); w];
    let mut trace = MeasurementTrace::new();
    let mut flags = Vec::new();
    let (mut paid_ext, mut paid_bonus) = (0usize, 0usize);

    while !wrapper.is_done() {
        let action = ActionTuple {
            control: rng.gen_range(0..n),
            measure: rng.gen_bool(case.measure_prob),
        };
        let t = wrapper.osmboa_step(action).unwrap();
        let truth = twin.step(action.control).unwrap();
        let step = twin.elapsed_steps();
        let ended = truth.is_done();

        ensure_eq!(t.base_steps, 1);
        ensure_eq!(t.terminal, truth.terminal);
        ensure_eq!(t.truncated, truth.truncated);
        ensure_eq!(t.extrinsic_sum.to_bits(), truth.r_ext.to_bits());
        ensure_eq!(t.measured_count, usize::from(action.measure || ended));
        if t.measured_count == 1 {
            ensure_eq!(t.reward.to_bits(), truth.r_ext.to_bits());
            ensure!(t.next_obs.fresh, "measured step served a stale packet");
            ensure_eq!(t.next_obs.payload.as_ref(), Some(&truth.next_state));
            ensure_eq!(t.next_obs.source_step, step);
            memory.insert(0, (truth.next_state.clone(), step));
            memory.truncate(w);
            paid_ext += 1;
        } else {
            ensure_eq!(t.reward.to_bits(), bonus.to_bits());
            ensure!(!t.next_obs.fresh, "unmeasured step served a fresh packet");
            ensure_eq!(t.next_obs.source_step, memory[0].1);
            match case.cfg.stale_mode {
                StaleMode::Memory => ensure_eq!(t.next_obs.payload.as_ref(), Some(&memory[0].0)),
                StaleMode::Zeros => ensure!(t.next_obs.payload.is_none(), "zeros mode served a payload"),
            }
            paid_bonus += 1;
        }
        ensure_eq!(t.costed_sum.to_bits(), t.reward.to_bits());

        let x = wrapper.osmboa_observe().unwrap();
        ensure_eq!(x.len(), w * dim + 1);
        let flag = if t.next_obs.fresh { 1.0 } else { 0.0 };
        ensure_eq!(x[w * dim], flag);
        if t.next_obs.fresh || case.cfg.stale_mode == StaleMode::Memory {
            let expected: Vec<f64> = memory.iter().flat_map(|(s, _)| s.as_slice().to_vec()).collect();
            ensure_eq!(&x[..w * dim], &expected[..]);
        } else {
            ensure!(x[..w * dim].iter().all(|&v| v == 0.0), "zeros mode leaked memory");
        }

        trace.record(&t);
        flags.push(t.measured_count == 1);
    }

    ensure_eq!(paid_ext + paid_bonus, twin.elapsed_steps());
    ensure_eq!(trace.base_steps(), twin.elapsed_steps());
    ensure_eq!(*flags.last().unwrap(), true);
    ensure!(
        wrapper.osmboa_step(ActionTuple { control: 0, measure: true }).is_err(),
        "stepping a finished episode succeeded"
    );
    check_tiling(&trace, &flags)
}

/// Skip decisions: discounted aggregation, forced measurement at the end of
/// the span and step conservation.
pub fn check_dmsoa(case: &Case) -> Check {
    let (mut wrapper, mut twin) = pair(case);
    let n = wrapper.descriptor().n_actions;
    let k_max = case.cfg.max_repeat;
    let RewardSpec { bonus, gamma } = case.cfg.reward;
    let mut rng = ChaCha8Rng::seed_from_u64(case.policy_seed);
    let mut trace = MeasurementTrace::new();
    let mut flags = Vec::new();
    let mut decisions = 0usize;

    while !wrapper.is_done() {
        let decision = SkipDecision {
            control: rng.gen_range(0..n),
            repeat: rng.gen_range(1..=k_max),
        };
        let t = wrapper.dmsoa_schedule(decision).unwrap();
        decisions += 1;

        let mut j = 0;
        let mut expected = 0.0;
        let mut extrinsic = 0.0;
        let last = loop {
            let out = twin.step(decision.control).unwrap();
            j += 1;
            extrinsic += out.r_ext;
            if j == decision.repeat || out.is_done() {
                expected += gamma.powi(j as i32 - 1) * out.r_ext;
                break out;
            }
            expected += gamma.powi(j as i32 - 1) * bonus;
        };

        ensure_eq!(t.base_steps, j);
        ensure!(j == decision.repeat || t.is_done(), "span cut short without episode end");
        ensure_eq!(t.measured_count, 1);
        ensure_eq!(t.a_m_or_k, decision.repeat);
        ensure_eq!(t.terminal, last.terminal);
        ensure_eq!(t.truncated, last.truncated);
        ensure!(
            (t.reward - expected).abs() <= 1e-12 * expected.abs().max(1.0),
            "aggregated reward {} vs {}",
            t.reward,
            expected
        );
        let costed = (j - 1) as f64 * bonus + last.r_ext;
        ensure!((t.costed_sum - costed).abs() <= 1e-12 * costed.abs().max(1.0), "costed sum");
        ensure!((t.extrinsic_sum - extrinsic).abs() <= 1e-12 * extrinsic.abs().max(1.0), "extrinsic sum");
        ensure!(t.next_obs.fresh, "span ended without a measurement");
        ensure_eq!(t.next_obs.payload.as_ref(), Some(&last.next_state));
        ensure_eq!(t.next_obs.source_step, twin.elapsed_steps());

        trace.record(&t);
        flags.extend(std::iter::repeat(false).take(j - 1));
        flags.push(true);
    }

    ensure_eq!(trace.decisions.len(), decisions);
    ensure_eq!(trace.base_steps(), twin.elapsed_steps());
    ensure_eq!(trace.measured_steps(), decisions);
    check_tiling(&trace, &flags)
}

/// A one-step skip decision and a measured tuple produce identical transitions.
pub fn check_single_repeat(case: &Case) -> Check {
    let mut cfg = case.cfg;
    cfg.max_repeat = 1;
    let mut a = AcNomdp::new(make_env(case.env, &case.options).unwrap(), cfg).unwrap();
    let mut b = AcNomdp::new(make_env(case.env, &case.options).unwrap(), cfg).unwrap();
    ensure_eq!(a.reset(case.reset_seed), b.reset(case.reset_seed));
    let n = a.descriptor().n_actions;
    let mut rng = ChaCha8Rng::seed_from_u64(case.policy_seed);
    while !a.is_done() {
        let control = rng.gen_range(0..n);
        let x = a.dmsoa_schedule(SkipDecision { control, repeat: 1 }).unwrap();
        let y = b.osmboa_step(ActionTuple { control, measure: true }).unwrap();
        ensure_eq!(x.reward.to_bits(), y.reward.to_bits());
        ensure_eq!(x, y);
        ensure_eq!(a.osmboa_observe().unwrap(), b.osmboa_observe().unwrap());
    }
    ensure!(b.is_done(), "tuple episode outlived the skip episode");
    Ok(())
}
