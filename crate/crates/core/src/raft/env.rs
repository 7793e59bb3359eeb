use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::color::{Caps, Color};
use super::node::{Cluster, Role, Timing};
use super::partition::{canonical, multiset_partitions, Partition};
use super::safety::{SafetyMonitor, Violation};
use super::snapshot::SystemSnapshot;
use crate::error::{Error, Result};
use crate::mdp::{ActionKey, Environment, StateKey, Transition};

/// Parameters of the simulated Raft environment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RaftParams {
    pub nodes: usize,
    /// Simulator ticks per environment step.
    pub ticks: u32,
    pub max_same_state: u32,
    pub max_crash_actions: u32,
    pub max_concurrent_crashes: usize,
    pub request_budget: u32,
    pub term_cap: u64,
    pub log_cap: usize,
    pub commit_cap: usize,
    /// Inclusive `[min, max]` election timeout in ticks.
    pub election_timeout: [u32; 2],
    pub heartbeat_interval: u32,
    pub seed: u64,
}

impl Default for RaftParams {
    fn default() -> Self {
        Self {
            nodes: 3,
            ticks: 4,
            max_same_state: 5,
            max_crash_actions: 3,
            max_concurrent_crashes: 1,
            request_budget: 3,
            term_cap: 5,
            log_cap: 6,
            commit_cap: 6,
            election_timeout: [10, 20],
            heartbeat_interval: 2,
            seed: 0,
        }
    }
}

impl RaftParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(format!("raft environment: {msg}")));
        let [lo, hi] = self.election_timeout;
        if self.nodes == 0 {
            bad("nodes must be at least 1")
        } else if lo == 0 || lo > hi {
            bad("election_timeout must be [min, max] with 1 <= min <= max")
        } else if self.heartbeat_interval == 0 {
            bad("heartbeat_interval must be at least 1")
        } else {
            Ok(())
        }
    }

    pub fn caps(&self) -> Caps {
        Caps {
            term: self.term_cap,
            log: self.log_cap,
            commit: self.commit_cap,
        }
    }

    fn timing(&self) -> Timing {
        Timing {
            election_min: self.election_timeout[0],
            election_max: self.election_timeout[1],
            heartbeat_interval: self.heartbeat_interval,
            seed: self.seed,
        }
    }
}

/// A resolved action. Partition blocks are count vectors over the distinct
/// live colors of the state the action was enumerated in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RaftAction {
    Partition { blocks: Partition, stay: bool },
    Crash(usize),
    Start(usize),
    Request(usize),
}

/// Canonical abstract key: blocks of sorted colors, blocks sorted, followed by
/// the same-state counter. Crashed processes sit in singleton blocks.
pub fn abstract_key(cluster: &Cluster, same_state: u32, caps: &Caps) -> StateKey {
    let mut s = color_config(cluster, caps);
    let _ = write!(s, "|s{same_state}");
    StateKey::from(s)
}

fn color_config(cluster: &Cluster, caps: &Caps) -> String {
    let mut blocks: HashMap<usize, Vec<Color>> = HashMap::new();
    for (p, &b) in cluster.processes().iter().zip(cluster.block_of()) {
        blocks.entry(b).or_default().push(Color::paint(p, caps));
    }
    let mut rendered: Vec<String> = blocks
        .into_values()
        .map(|mut colors| {
            colors.sort();
            let inner: Vec<String> = colors.iter().map(Color::to_string).collect();
            format!("{{{}}}", inner.join(","))
        })
        .collect();
    rendered.sort();
    rendered.concat()
}

/// Raft cluster as a partition MDP.
///
/// Actions: every multiset partition of the live colors (re-selecting the
/// current one is "stay"), crashing or starting a process of a given color,
/// and injecting a client request at the current leader.
#[derive(Debug)]
pub struct RaftEnv {
    params: RaftParams,
    caps: Caps,
    cluster: Cluster,
    same_state: u32,
    crash_used: u32,
    request_used: u32,
    config: String,
    key: StateKey,
    snapshot: SystemSnapshot,
    enabled: Vec<(ActionKey, RaftAction)>,
    monitor: SafetyMonitor,
    violations: Vec<Violation>,
    trace: Option<Vec<String>>,
    partitions: HashMap<Vec<usize>, Arc<Vec<Partition>>>,
}

impl RaftEnv {
    pub fn new(params: RaftParams) -> Result<Self> {
        params.validate()?;
        let caps = params.caps();
        let cluster = Cluster::new(params.nodes, params.timing());
        let mut env = Self {
            params,
            caps,
            cluster,
            same_state: 0,
            crash_used: 0,
            request_used: 0,
            config: String::new(),
            key: StateKey::new(""),
            snapshot: SystemSnapshot::default(),
            enabled: Vec::new(),
            monitor: SafetyMonitor::new(),
            violations: Vec::new(),
            trace: None,
            partitions: HashMap::new(),
        };
        env.reset();
        Ok(env)
    }

    pub fn params(&self) -> &RaftParams {
        &self.params
    }

    pub fn cluster(&self) -> &Cluster {
        &self.cluster
    }

    pub fn same_state(&self) -> u32 {
        self.same_state
    }

    pub fn state_key(&self) -> &StateKey {
        &self.key
    }

    /// Safety violations seen since construction or the last
    /// [`clear_violations`](Self::clear_violations). Checks restart with each
    /// episode, the list does not.
    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }

    pub fn clear_violations(&mut self) {
        self.violations.clear();
    }

    pub fn resolve(&self, action: &ActionKey) -> Option<&RaftAction> {
        self.enabled
            .binary_search_by(|(k, _)| k.cmp(action))
            .ok()
            .map(|i| &self.enabled[i].1)
    }

    /// Records one `action\tkey\tsafety` line per step while enabled.
    pub fn set_trace(&mut self, on: bool) {
        self.trace = on.then(Vec::new);
    }

    pub fn take_trace(&mut self) -> Vec<String> {
        self.trace.as_mut().map(std::mem::take).unwrap_or_default()
    }

    fn live_colors(&self) -> (Vec<Color>, Vec<Option<usize>>) {
        let painted: Vec<Color> = self
            .cluster
            .processes()
            .iter()
            .map(|p| Color::paint(p, &self.caps))
            .collect();
        let mut distinct: Vec<Color> = painted
            .iter()
            .zip(self.cluster.processes())
            .filter(|(_, p)| p.alive)
            .map(|(c, _)| c.clone())
            .collect();
        distinct.sort();
        distinct.dedup();
        let index = painted
            .iter()
            .zip(self.cluster.processes())
            .map(|(c, p)| p.alive.then(|| distinct.binary_search(c).unwrap()))
            .collect();
        (distinct, index)
    }

    fn partitions_for(&mut self, counts: Vec<usize>) -> Arc<Vec<Partition>> {
        self.partitions
            .entry(counts)
            .or_insert_with_key(|c| Arc::new(multiset_partitions(c)))
            .clone()
    }

    fn refresh(&mut self) {
        self.config = color_config(&self.cluster, &self.caps);
        self.key = StateKey::from(format!("{}|s{}", self.config, self.same_state));
        self.snapshot = SystemSnapshot::of(&self.cluster);
        self.enabled = self.enumerate_actions();
    }

    fn enumerate_actions(&mut self) -> Vec<(ActionKey, RaftAction)> {
        let (distinct, index) = self.live_colors();
        let k = distinct.len();
        let mut counts = vec![0; k];
        let mut current: HashMap<usize, Vec<usize>> = HashMap::new();
        for (pid, ci) in index.iter().enumerate() {
            if let Some(ci) = *ci {
                counts[ci] += 1;
                current
                    .entry(self.cluster.block_of()[pid])
                    .or_insert_with(|| vec![0; k])[ci] += 1;
            }
        }
        let current = canonical(current.into_values().collect());

        let mut actions = Vec::new();
        for blocks in self.partitions_for(counts).iter() {
            let rendered: Vec<String> = blocks
                .iter()
                .map(|b| {
                    let ids: Vec<String> = b
                        .iter()
                        .enumerate()
                        .flat_map(|(ci, &n)| std::iter::repeat_n(ci.to_string(), n))
                        .collect();
                    ids.join(".")
                })
                .collect();
            actions.push((
                ActionKey::from(format!("part:{}", rendered.join("|"))),
                RaftAction::Partition {
                    blocks: blocks.clone(),
                    stay: *blocks == current,
                },
            ));
        }

        let procs = self.cluster.processes();
        let crashed = procs.iter().filter(|p| !p.alive).count();
        if self.crash_used < self.params.max_crash_actions
            && crashed < self.params.max_concurrent_crashes
        {
            for (ci, color) in distinct.iter().enumerate() {
                let pid = index.iter().position(|&i| i == Some(ci)).unwrap();
                actions.push((
                    ActionKey::from(format!("crash:{color}")),
                    RaftAction::Crash(pid),
                ));
            }
        }
        let mut seen = Vec::new();
        for p in procs.iter().filter(|p| !p.alive) {
            let color = Color::paint(p, &self.caps);
            if !seen.contains(&color) {
                actions.push((
                    ActionKey::from(format!("start:{color}")),
                    RaftAction::Start(p.id),
                ));
                seen.push(color);
            }
        }
        if self.request_used < self.params.request_budget {
            let leader = procs
                .iter()
                .filter(|p| p.alive && p.role == Role::Leader)
                .min_by_key(|p| (std::cmp::Reverse(p.term), p.id));
            if let Some(l) = leader {
                actions.push((ActionKey::new("request"), RaftAction::Request(l.id)));
            }
        }
        actions.sort_by(|a, b| a.0.cmp(&b.0));
        actions
    }

    fn install(&mut self, blocks: &Partition) {
        let (_, index) = self.live_colors();
        let n = self.cluster.len();
        let mut block_of: Vec<usize> = (0..n).map(|pid| n + pid).collect();
        let mut queues: Vec<Vec<usize>> = vec![Vec::new(); blocks.first().map_or(0, Vec::len)];
        for (pid, ci) in index.iter().enumerate().rev() {
            if let Some(ci) = ci {
                queues[*ci].push(pid);
            }
        }
        for (bid, block) in blocks.iter().enumerate() {
            for (ci, &count) in block.iter().enumerate() {
                for _ in 0..count {
                    block_of[queues[ci].pop().unwrap()] = bid;
                }
            }
        }
        self.cluster.set_blocks(block_of);
    }

    fn isolate(&mut self, pid: usize) {
        let mut block_of = self.cluster.block_of().to_vec();
        block_of[pid] = block_of.len() + pid;
        self.cluster.set_blocks(block_of);
    }
}

impl Environment for RaftEnv {
    type Snapshot = SystemSnapshot;

    fn reset(&mut self) -> StateKey {
        self.cluster = Cluster::new(self.params.nodes, self.params.timing());
        self.same_state = 0;
        self.crash_used = 0;
        self.request_used = 0;
        self.monitor = SafetyMonitor::new();
        if let Some(t) = self.trace.as_mut() {
            t.clear();
        }
        self.refresh();
        self.key.clone()
    }

    fn actions(&self) -> Vec<ActionKey> {
        self.enabled.iter().map(|(k, _)| k.clone()).collect()
    }

    fn step(&mut self, action: &ActionKey) -> Result<Transition> {
        let resolved = self
            .resolve(action)
            .cloned()
            .ok_or_else(|| Error::DisabledAction {
                state: self.key.to_string(),
                action: action.to_string(),
            })?;
        let before = std::mem::take(&mut self.config);
        let mut stayed = false;
        match &resolved {
            RaftAction::Partition { blocks, stay } => {
                stayed = *stay;
                if !stay {
                    self.install(blocks);
                }
            }
            RaftAction::Crash(pid) => {
                self.cluster.crash(*pid);
                self.isolate(*pid);
                self.crash_used += 1;
            }
            RaftAction::Start(pid) => self.cluster.restart(*pid),
            RaftAction::Request(pid) => {
                self.cluster.client_request(*pid);
                self.request_used += 1;
            }
        }
        let mut found = Vec::new();
        for _ in 0..self.params.ticks {
            self.cluster.tick();
            found.extend(self.monitor.check(&self.cluster));
        }
        let after = color_config(&self.cluster, &self.caps);
        self.same_state = if stayed && after == before {
            (self.same_state + 1).min(self.params.max_same_state)
        } else {
            0
        };
        self.refresh();
        if let Some(trace) = self.trace.as_mut() {
            let safety = if found.is_empty() {
                "ok".to_string()
            } else {
                found
                    .iter()
                    .map(Violation::to_string)
                    .collect::<Vec<_>>()
                    .join(";")
            };
            trace.push(format!("{action}\t{}\t{safety}", self.key));
        }
        self.violations.extend(found);
        Ok(Transition {
            state: self.key.clone(),
            reward: 0.0,
        })
    }

    fn snapshot(&self) -> &SystemSnapshot {
        &self.snapshot
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env() -> RaftEnv {
        RaftEnv::new(RaftParams::default()).unwrap()
    }

    fn stay(env: &RaftEnv) -> ActionKey {
        env.enabled
            .iter()
            .find(|(_, a)| matches!(a, RaftAction::Partition { stay: true, .. }))
            .unwrap()
            .0
            .clone()
    }

    #[test]
    fn fresh_cluster_actions() {
        let e = env();
        let keys: Vec<String> = e.actions().iter().map(|k| k.to_string()).collect();
        assert_eq!(
            keys,
            ["crash:t0F[]c0vN+", "part:0.0.0", "part:0.0|0", "part:0|0|0"]
        );
        assert_eq!(stay(&e).as_str(), "part:0.0.0");
        assert_eq!(
            e.state_key().as_str(),
            "{t0F[]c0vN+,t0F[]c0vN+,t0F[]c0vN+}|s0"
        );
    }

    #[test]
    fn same_state_counts_unchanged_stays() {
        let mut e = env();
        let s = stay(&e);
        e.step(&s).unwrap();
        assert_eq!(e.same_state(), 1);
        e.step(&stay(&e)).unwrap();
        assert_eq!(e.same_state(), 2);
        e.step(&"part:0|0|0".into()).unwrap();
        assert_eq!(e.same_state(), 0);
    }

    #[test]
    fn crash_budget_and_concurrency() {
        let mut e = env();
        e.step(&"crash:t0F[]c0vN+".into()).unwrap();
        let keys: Vec<String> = e.actions().iter().map(|k| k.to_string()).collect();
        assert!(!keys.iter().any(|k| k.starts_with("crash:")));
        assert!(keys.contains(&"start:t0F[]c0vN-".to_string()));
        assert!(!e.cluster().processes()[0].alive);
        e.step(&"start:t0F[]c0vN-".into()).unwrap();
        for _ in 0..2 {
            let crash = e
                .actions()
                .into_iter()
                .find(|k| k.as_str().starts_with("crash:"))
                .unwrap();
            e.step(&crash).unwrap();
            let start = e
                .actions()
                .into_iter()
                .find(|k| k.as_str().starts_with("start:"))
                .unwrap();
            e.step(&start).unwrap();
        }
        assert!(!e.actions().iter().any(|k| k.as_str().starts_with("crash:")));
    }

    #[test]
    fn staying_elects_a_leader_and_accepts_requests() {
        let mut e = env();
        for _ in 0..8 {
            e.step(&stay(&e)).unwrap();
        }
        assert!(e
            .snapshot()
            .processes
            .iter()
            .any(|p| p.role == Role::Leader));
        assert!(e.actions().iter().any(|k| k.as_str() == "request"));
        e.step(&"request".into()).unwrap();
        for _ in 0..3 {
            e.step(&stay(&e)).unwrap();
        }
        assert!(e.snapshot().processes.iter().any(|p| p.commit_index >= 2));
        assert!(e.violations().is_empty());
    }

    #[test]
    fn disabled_action_rejected() {
        let mut e = env();
        assert!(matches!(
            e.step(&"request".into()),
            Err(Error::DisabledAction { .. })
        ));
    }

    #[test]
    fn relabeling_preserves_key() {
        let mut e = env();
        e.step(&"part:0.0|0".into()).unwrap();
        for _ in 0..6 {
            e.step(&stay(&e)).unwrap();
        }
        let caps = e.params().caps();
        let key = abstract_key(e.cluster(), 3, &caps);
        for perm in [[1, 2, 0], [2, 0, 1], [0, 2, 1]] {
            assert_eq!(abstract_key(&e.cluster().relabel(&perm), 3, &caps), key);
        }
    }

    #[test]
    fn trace_lines() {
        let mut e = env();
        e.set_trace(true);
        let s = stay(&e);
        e.step(&s).unwrap();
        let lines = e.take_trace();
        assert_eq!(lines.len(), 1);
        assert!(lines[0].starts_with("part:0.0.0\t{"));
        assert!(lines[0].ends_with("\tok"));
    }
}
