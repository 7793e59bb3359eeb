use std::collections::HashMap;
use std::fmt;

use super::node::{Cluster, Entry, Role};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Two different leaders in one term.
    ElectionSafety {
        term: u64,
        first: usize,
        second: usize,
    },
    /// Logs agree at `index` but differ somewhere before it.
    LogMatching { a: usize, b: usize, index: usize },
    /// A committed entry changed or disappeared.
    CommittedDurability { process: usize, index: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ElectionSafety {
                term,
                first,
                second,
            } => {
                write!(f, "election-safety:term{term}:p{first},p{second}")
            }
            Violation::LogMatching { a, b, index } => write!(f, "log-matching:p{a},p{b}@{index}"),
            Violation::CommittedDurability { process, index } => {
                write!(f, "committed-durability:p{process}@{index}")
            }
        }
    }
}

/// Episode-long checker for the three Raft safety properties.
#[derive(Debug, Clone, Default)]
pub struct SafetyMonitor {
    leaders: HashMap<u64, usize>,
    committed: Vec<Vec<Entry>>,
}

impl SafetyMonitor {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn check(&mut self, cluster: &Cluster) -> Vec<Violation> {
        let mut found = Vec::new();
        let procs = cluster.processes();
        self.committed.resize(procs.len(), Vec::new());

        for p in procs.iter().filter(|p| p.alive && p.role == Role::Leader) {
            let first = *self.leaders.entry(p.term).or_insert(p.id);
            if first != p.id {
                found.push(Violation::ElectionSafety {
                    term: p.term,
                    first,
                    second: p.id,
                });
            }
        }

        for (i, a) in procs.iter().enumerate() {
            for b in &procs[i + 1..] {
                let common = a.log.len().min(b.log.len());
                if let Some(index) = (1..=common)
                    .rev()
                    .find(|&k| a.log[k - 1].term == b.log[k - 1].term)
                {
                    if a.log[..index] != b.log[..index] {
                        found.push(Violation::LogMatching {
                            a: a.id,
                            b: b.id,
                            index,
                        });
                    }
                }
            }
        }

        for p in procs {
            let seen = &mut self.committed[p.id];
            let durable = seen.len() <= p.log.len() && p.log[..seen.len()] == seen[..];
            if !durable {
                let index = (0..seen.len())
                    .find(|&k| p.log.get(k) != Some(&seen[k]))
                    .map_or(seen.len(), |k| k + 1);
                found.push(Violation::CommittedDurability {
                    process: p.id,
                    index,
                });
            }
            if p.commit_index >= seen.len() || !durable {
                *seen = p.log[..p.commit_index].to_vec();
            }
        }
        found
    }
}
