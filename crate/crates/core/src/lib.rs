//! Reinforcement learning when measuring the environment has a cost.
//!
//! The crate layers an action-contingent, noiselessly observable decision
//! process (AC-NOMDP) on top of ordinary fully observable environments and
//! provides two agents for it:
//!
//! * **DMSOA** picks a control action together with a repeat count `k`; the
//!   scheduler applies the action `k` times and only measures after the last
//!   application.
//! * **OSMBOA** picks a `(control, measure?)` tuple every step and acts from a
//!   memory of the last measured state plus a freshness flag when it skips.
//!
//! Both learn with double DQN over a proportional prioritized replay buffer.
//! An exact solver for small chain instances provides ground truth, and the
//! [`harness`] module runs multi-seed experiments and writes CSV reports.

pub mod acnomdp;
pub mod agents;
pub mod environments;
pub mod error;
pub mod harness;
pub mod neural;
pub mod oracle;
pub mod replay;

pub use error::{Error, Result};
