//! Reinforcement-learning guided exploration of distributed-protocol state
//! spaces.
//!
//! * [`mdp`]: episodic environment/agent contracts and the RL loop.
//! * [`agents`]: Random, NegRLVisits, BonusMaxRL and WaypointRL policies.
//! * [`cube`]: the cube-world validation environment and heatmap export.
//! * [`raft`]: a tick-based Raft simulator exposed as a partition MDP.
//! * [`predicate`]: composable predicates and the Raft predicate library.
//! * [`harness`]: multi-trial experiments, coverage metrics and statistics.

pub mod agents;
pub mod cube;
pub mod error;
pub mod harness;
pub mod mdp;
pub mod predicate;
pub mod raft;

pub use error::{Error, Result};
