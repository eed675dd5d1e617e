use super::CostedTransition;
use crate::{Error, Result};

/// One agent decision and the base steps it covered.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionRecord {
    pub index: usize,
    /// First base step of the span (1-based, matching the environment counter).
    pub start_step: usize,
    /// `k` for DMSOA, `a_m` for OSMBOA.
    pub choice: usize,
    /// Per base step: was it measured?
    pub measured: Vec<bool>,
}

impl DecisionRecord {
    pub fn span(&self) -> usize {
        self.measured.len()
    }
}

/// Per-decision measurement record of one episode.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MeasurementTrace {
    pub decisions: Vec<DecisionRecord>,
}

impl MeasurementTrace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends the span of a wrapper transition. The measurement, if any,
    /// sits on the final base step.
    pub fn record(&mut self, t: &CostedTransition) {
        let start_step = self.base_steps() + 1;
        let mut measured = vec![false; t.unmeasured_count()];
        measured.resize(t.base_steps, true);
        self.decisions.push(DecisionRecord {
            index: self.decisions.len(),
            start_step,
            choice: t.a_m_or_k,
            measured,
        });
    }

    pub fn base_steps(&self) -> usize {
        self.decisions.iter().map(DecisionRecord::span).sum()
    }

    pub fn measured_steps(&self) -> usize {
        self.decisions
            .iter()
            .flat_map(|d| d.measured.iter())
            .filter(|&&m| m)
            .count()
    }

    pub fn unmeasured_steps(&self) -> usize {
        self.base_steps() - self.measured_steps()
    }

    /// Flattened per-base-step measurement flags.
    pub fn per_step(&self) -> Vec<bool> {
        self.decisions
            .iter()
            .flat_map(|d| d.measured.iter().copied())
            .collect()
    }
}

/// Unmeasured base steps per measured base step (the `x` of `1:x`).
pub fn measurement_ratio(trace: &MeasurementTrace) -> Result<f64> {
    ratio_from_counts(trace.measured_steps(), trace.unmeasured_steps())
}

pub(crate) fn ratio_from_counts(measured: usize, unmeasured: usize) -> Result<f64> {
    if measured == 0 {
        return Err(Error::UndefinedRatio);
    }
    Ok(unmeasured as f64 / measured as f64)
}
