use std::collections::VecDeque;

use super::Experience;

/// Collapses consecutive one-step experiences into one multi-step record:
/// rewards are summed with `gamma^i`, the next observation comes from the last
/// step used, and the window stops early at the first episode end.
pub fn assemble_nstep(window: &[Experience], gamma: f64) -> Experience {
    assert!(!window.is_empty(), "n-step window must be non-empty");
    let first = &window[0];
    let mut reward = 0.0;
    let mut discount = 1.0;
    let mut exponent = 0;
    let mut last = first;
    for e in window {
        reward += discount * e.reward;
        discount *= gamma.powi(e.discount_exponent as i32);
        exponent += e.discount_exponent;
        last = e;
        if e.is_done() {
            break;
        }
    }
    Experience {
        obs: first.obs.clone(),
        control: first.control,
        secondary: first.secondary,
        reward,
        next_obs: last.next_obs.clone(),
        terminal: last.terminal,
        truncated: last.truncated,
        discount_exponent: exponent,
    }
}

/// Streaming n-step assembly. Each pushed experience yields the records
/// whose window is complete; episode ends flush the partial windows.
#[derive(Debug, Clone)]
pub struct NStepAccumulator {
    n: usize,
    gamma: f64,
    window: VecDeque<Experience>,
}

impl NStepAccumulator {
    pub fn new(n: usize, gamma: f64) -> Self {
        assert!(n >= 1, "n-step length must be at least 1");
        Self {
            n,
            gamma,
            window: VecDeque::with_capacity(n),
        }
    }

    pub fn push(&mut self, e: Experience) -> Vec<Experience> {
        let done = e.is_done();
        self.window.push_back(e);
        let mut out = Vec::new();
        if done {
            while !self.window.is_empty() {
                out.push(assemble_nstep(self.window.make_contiguous(), self.gamma));
                self.window.pop_front();
            }
        } else if self.window.len() == self.n {
            out.push(assemble_nstep(self.window.make_contiguous(), self.gamma));
            self.window.pop_front();
        }
        out
    }

    /// Drops any partial window (e.g. when an episode is abandoned).
    pub fn clear(&mut self) {
        self.window.clear();
    }
}
