//! Exact solutions of small deterministic chain instances.
//!
//! Values come from backward induction over `(time, position)` for the
//! skip-decision space and over the augmented state `(time, position,
//! last measured position, fresh)` for the per-step tuple space. The reported
//! return of the optimal sequence is recomputed by a forward pass that sums
//! rewards in the same order as the live wrapper, so replaying the sequence
//! reproduces it bit for bit.

use crate::acnomdp::{trace::ratio_from_counts, ActionTuple, SkipDecision};
use crate::environments::{ChainParams, CHAIN_LEFT, CHAIN_RIGHT};
use crate::{Error, Result};

const DMSOA_STATE_LIMIT: usize = 1_000_000;
const OSMBOA_STATE_LIMIT: usize = 10_000_000;
const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainInstance {
    pub length: usize,
    /// Extrinsic reward of a measured step.
    pub reward: f64,
    /// Reward of an unmeasured step.
    pub bonus: f64,
    pub gamma: f64,
    pub horizon: usize,
}

impl ChainInstance {
    pub fn new(params: ChainParams, bonus: f64, gamma: f64) -> Self {
        Self {
            length: params.length,
            reward: params.reward,
            bonus,
            gamma,
            horizon: params.max_episode_steps,
        }
    }

    fn goal(&self) -> usize {
        self.length - 1
    }

    fn advance(&self, position: usize, action: usize) -> usize {
        if action == CHAIN_RIGHT {
            position + 1
        } else {
            position.saturating_sub(1)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleDecision {
    Skip(SkipDecision),
    Tuple(ActionTuple),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    /// Return of the recorded sequence from position 0.
    pub optimal_return: f64,
    /// Backward-induction value at time 0 for every start position (the goal
    /// position has value 0).
    pub start_values: Vec<f64>,
    pub decisions: Vec<OracleDecision>,
    pub measured_steps: usize,
    pub unmeasured_steps: usize,
    /// Unmeasured steps per measured step.
    pub ratio: f64,
}

fn check_size(states: usize, limit: usize) -> Result<()> {
    if states > limit {
        return Err(Error::InstanceTooLarge { states, limit });
    }
    Ok(())
}

fn check_instance(inst: &ChainInstance) -> Result<()> {
    if inst.length < 2 || inst.horizon == 0 {
        return Err(Error::config("env", "chain needs length >= 2 and a positive horizon"));
    }
    if !(0.0..=1.0).contains(&inst.gamma) {
        return Err(Error::config("acnomdp.gamma", "must lie in [0, 1]"));
    }
    Ok(())
}

/// Outcome of applying `action` up to `k` times from `(t, p)`.
struct Span {
    end: usize,
    steps: usize,
    done: bool,
}

fn span(inst: &ChainInstance, t: usize, mut p: usize, action: usize, k: usize) -> Span {
    let mut steps = 0;
    loop {
        p = inst.advance(p, action);
        steps += 1;
        let done = p == inst.goal() || t + steps == inst.horizon;
        if done || steps == k {
            return Span { end: p, steps, done };
        }
    }
}

/// Optimal skip decisions with repeat counts `1..=max_repeat`.
pub fn solve_dmsoa(inst: &ChainInstance, max_repeat: usize) -> Result<OracleSolution> {
    check_instance(inst)?;
    if max_repeat == 0 {
        return Err(Error::SkipOutOfRange { k: 0, max: 0 });
    }
    let n = inst.length;
    let h = inst.horizon;
    check_size(n.saturating_mul(h), DMSOA_STATE_LIMIT)?;
    let mut value = vec![0.0; (h + 1) * n];
    let mut policy = vec![(0usize, 0usize); h * n];
    for t in (0..h).rev() {
        for p in 0..n {
            if p == inst.goal() {
                continue;
            }
            let mut best: Option<(f64, usize, usize)> = None;
            for a in [CHAIN_LEFT, CHAIN_RIGHT] {
                for k in 1..=max_repeat {
                    let s = span(inst, t, p, a, k);
                    let mut q = 0.0;
                    let mut disc = 1.0;
                    for _ in 1..s.steps {
                        q += disc * inst.bonus;
                        disc *= inst.gamma;
                    }
                    q += disc * inst.reward;
                    if !s.done {
                        q += disc * inst.gamma * value[(t + s.steps) * n + s.end];
                    }
                    if best.map_or(true, |(b, _, _)| q > b + TIE_TOLERANCE) {
                        best = Some((q, a, k));
                    }
                }
            }
            let (q, a, k) = best.expect("at least one candidate");
            value[t * n + p] = q;
            policy[t * n + p] = (a, k);
        }
    }

    let mut decisions = Vec::new();
    let (mut t, mut p) = (0, 0);
    let (mut total, mut tdisc) = (0.0, 1.0);
    let (mut measured, mut unmeasured) = (0, 0);
    loop {
        let (a, k) = policy[t * n + p];
        decisions.push(OracleDecision::Skip(SkipDecision { control: a, repeat: k }));
        let s = span(inst, t, p, a, k);
        let mut reward = 0.0;
        let mut disc = 1.0;
        for _ in 1..s.steps {
            reward += disc * inst.bonus;
            disc *= inst.gamma;
        }
        reward += disc * inst.reward;
        total += tdisc * reward;
        for _ in 0..s.steps {
            tdisc *= inst.gamma;
        }
        measured += 1;
        unmeasured += s.steps - 1;
        t += s.steps;
        p = s.end;
        if s.done {
            break;
        }
    }
    Ok(OracleSolution {
        optimal_return: total,
        start_values: (0..n).map(|p| value[p]).collect(),
        decisions,
        measured_steps: measured,
        unmeasured_steps: unmeasured,
        ratio: ratio_from_counts(measured, unmeasured)?,
    })
}

/// Optimal `(control, measure?)` tuples. `memory_window` only sizes the
/// enumerated state; the chain's values do not depend on it.
pub fn solve_osmboa(inst: &ChainInstance, memory_window: usize) -> Result<OracleSolution> {
    solve_tuples(inst, memory_window, &[true, false])
}

/// The tuple oracle with the measurement choice fixed to "measure".
pub fn solve_osmboa_always_measure(inst: &ChainInstance) -> Result<OracleSolution> {
    solve_tuples(inst, 1, &[true])
}

fn solve_tuples(inst: &ChainInstance, memory_window: usize, choices: &[bool]) -> Result<OracleSolution> {
    check_instance(inst)?;
    if memory_window == 0 {
        return Err(Error::config("acnomdp.memory_window", "must be at least 1"));
    }
    let n = inst.length;
    let h = inst.horizon;
    // (position, last measured position, fresh) per time slice.
    let slice = n * n * 2;
    let states = slice.saturating_mul(h).saturating_mul(memory_window);
    check_size(states, OSMBOA_STATE_LIMIT)?;
    let idx = |p: usize, mem: usize, fresh: bool| (p * n + mem) * 2 + usize::from(fresh);
    let mut value = vec![0.0; (h + 1) * slice];
    let mut policy = vec![ActionTuple { control: 0, measure: true }; h * slice];
    for t in (0..h).rev() {
        for p in 0..n {
            if p == inst.goal() {
                continue;
            }
            for mem in 0..n {
                for fresh in [false, true] {
                    let mut best: Option<(f64, ActionTuple)> = None;
                    for a in [CHAIN_LEFT, CHAIN_RIGHT] {
                        for &m in choices {
                            let next = inst.advance(p, a);
                            let done = next == inst.goal() || t + 1 == h;
                            let measured = m || done;
                            let mut q = if measured { inst.reward } else { inst.bonus };
                            if !done {
                                let next_mem = if measured { next } else { mem };
                                q += inst.gamma * value[(t + 1) * slice + idx(next, next_mem, measured)];
                            }
                            if best.map_or(true, |(b, _)| q > b + TIE_TOLERANCE) {
                                best = Some((q, ActionTuple { control: a, measure: m }));
                            }
                        }
                    }
                    let (q, tuple) = best.expect("at least one candidate");
                    value[t * slice + idx(p, mem, fresh)] = q;
                    policy[t * slice + idx(p, mem, fresh)] = tuple;
                }
            }
        }
    }

    let mut decisions = Vec::new();
    let (mut t, mut p, mut mem, mut fresh) = (0, 0, 0, true);
    let (mut total, mut tdisc) = (0.0, 1.0);
    let (mut measured, mut unmeasured) = (0, 0);
    loop {
        let tuple = policy[t * slice + idx(p, mem, fresh)];
        decisions.push(OracleDecision::Tuple(tuple));
        p = inst.advance(p, tuple.control);
        t += 1;
        let done = p == inst.goal() || t == h;
        let m = tuple.measure || done;
        let reward = if m { inst.reward } else { inst.bonus };
        total += tdisc * reward;
        tdisc *= inst.gamma;
        if m {
            measured += 1;
            mem = p;
        } else {
            unmeasured += 1;
        }
        fresh = m;
        if done {
            break;
        }
    }
    Ok(OracleSolution {
        optimal_return: total,
        start_values: (0..n).map(|p| value[idx(p, p, true)]).collect(),
        decisions,
        measured_steps: measured,
        unmeasured_steps: unmeasured,
        ratio: ratio_from_counts(measured, unmeasured)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleSolver {
    Dmsoa { max_repeat: usize },
    Osmboa { memory_window: usize },
}

impl OracleSolver {
    pub fn solve(self, inst: &ChainInstance) -> Result<OracleSolution> {
        match self {
            OracleSolver::Dmsoa { max_repeat } => solve_dmsoa(inst, max_repeat),
            OracleSolver::Osmboa { memory_window } => solve_osmboa(inst, memory_window),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub bonus: f64,
    pub ratio: f64,
    pub optimal_return: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    /// Whether the optimal ratio never decreases as the bonus grows.
    pub ratio_monotone: bool,
}

/// Solves the instance once per bonus level in `grid` (sorted ascending in
/// the report).
pub fn sweep_intrinsic(solver: OracleSolver, inst: &ChainInstance, grid: &[f64]) -> Result<SweepReport> {
    let mut grid = grid.to_vec();
    grid.sort_by(f64::total_cmp);
    let rows = grid
        .iter()
        .map(|&bonus| {
            let s = solver.solve(&ChainInstance { bonus, ..*inst })?;
            Ok(SweepRow { bonus, ratio: s.ratio, optimal_return: s.optimal_return })
        })
        .collect::<Result<Vec<_>>>()?;
    let ratio_monotone = rows.windows(2).all(|w| w[1].ratio >= w[0].ratio);
    Ok(SweepReport { rows, ratio_monotone })
}
