//! Tick-based Raft simulator exposed as a partition MDP.

mod color;
mod env;
mod node;
mod partition;
mod safety;
mod snapshot;

pub use color::{Caps, Color};
pub use env::{abstract_key, RaftAction, RaftEnv, RaftParams};
pub use node::{Cluster, Entry, Message, Payload, ProcessState, Role, Timing};
pub use partition::{canonical, multiset_partitions, Block, Partition};
pub use safety::{SafetyMonitor, Violation};
pub use snapshot::{ProcessView, SystemSnapshot, VoteClass};
