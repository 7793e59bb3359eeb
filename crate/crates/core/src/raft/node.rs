//! Tick-driven Raft processes and the partitioned network connecting them.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Follower,
    Candidate,
    Leader,
}

impl Role {
    pub fn tag(self) -> char {
        match self {
            Role::Follower => 'F',
            Role::Candidate => 'C',
            Role::Leader => 'L',
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "follower" => Some(Role::Follower),
            "candidate" => Some(Role::Candidate),
            "leader" => Some(Role::Leader),
            _ => None,
        }
    }
}

/// A log entry. Request 0 is the no-op a new leader appends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Entry {
    pub term: u64,
    pub request: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    RequestVote {
        last_log_index: usize,
        last_log_term: u64,
    },
    Vote {
        granted: bool,
    },
    AppendEntries {
        prev_index: usize,
        prev_term: u64,
        entries: Vec<Entry>,
        leader_commit: usize,
    },
    AppendReply {
        success: bool,
        match_index: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub from: usize,
    pub to: usize,
    pub term: u64,
    pub payload: Payload,
}

/// Election timeouts drawn deterministically per (process, term).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Timing {
    pub election_min: u32,
    pub election_max: u32,
    pub heartbeat_interval: u32,
    pub seed: u64,
}

impl Timing {
    pub fn election_timeout(&self, id: usize, term: u64) -> u32 {
        let span = u64::from(self.election_max - self.election_min) + 1;
        let h = crate::mdp::derive_seed(self.seed ^ ((id as u64) << 48), term);
        self.election_min + (h % span) as u32
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProcessState {
    pub id: usize,
    pub term: u64,
    pub role: Role,
    pub log: Vec<Entry>,
    pub commit_index: usize,
    pub voted_for: Option<usize>,
    pub alive: bool,
    pub election_timer: u32,
    pub heartbeat_timer: u32,
    pub inbox: VecDeque<Message>,
    votes: Vec<bool>,
    next_index: Vec<usize>,
    match_index: Vec<usize>,
}

impl ProcessState {
    fn new(id: usize, n: usize, timing: &Timing) -> Self {
        Self {
            id,
            term: 0,
            role: Role::Follower,
            log: Vec::new(),
            commit_index: 0,
            voted_for: None,
            alive: true,
            election_timer: timing.election_timeout(id, 0),
            heartbeat_timer: 0,
            inbox: VecDeque::new(),
            votes: vec![false; n],
            next_index: vec![1; n],
            match_index: vec![0; n],
        }
    }

    fn last_log_term(&self) -> u64 {
        self.log.last().map_or(0, |e| e.term)
    }

    fn term_at(&self, index: usize) -> u64 {
        if index == 0 {
            0
        } else {
            self.log[index - 1].term
        }
    }

    fn become_follower(&mut self, term: u64, timing: &Timing) {
        self.term = term;
        self.role = Role::Follower;
        self.voted_for = None;
        self.election_timer = timing.election_timeout(self.id, term);
    }
}

/// A set of Raft processes connected by a partitioned network.
///
/// Messages sent during a tick are delivered at the start of the next tick if
/// sender and receiver are in the same block and the receiver is alive;
/// everything else is dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    processes: Vec<ProcessState>,
    block_of: Vec<usize>,
    in_flight: Vec<Message>,
    timing: Timing,
    next_request: u64,
}

impl Cluster {
    pub fn new(nodes: usize, timing: Timing) -> Self {
        Self {
            processes: (0..nodes)
                .map(|id| ProcessState::new(id, nodes, &timing))
                .collect(),
            block_of: vec![0; nodes],
            in_flight: Vec::new(),
            timing,
            next_request: 0,
        }
    }

    pub fn processes(&self) -> &[ProcessState] {
        &self.processes
    }

    pub fn len(&self) -> usize {
        self.processes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.processes.is_empty()
    }

    pub fn block_of(&self) -> &[usize] {
        &self.block_of
    }

    pub fn set_blocks(&mut self, block_of: Vec<usize>) {
        assert_eq!(block_of.len(), self.processes.len());
        self.block_of = block_of;
    }

    pub fn in_flight(&self) -> &[Message] {
        &self.in_flight
    }

    fn majority(&self) -> usize {
        self.processes.len() / 2 + 1
    }

    fn connected(&self, a: usize, b: usize) -> bool {
        self.block_of[a] == self.block_of[b]
    }

    /// Stops a process: volatile state and its inbox are lost, the persistent
    /// term, vote, log and commit index are kept.
    pub fn crash(&mut self, id: usize) {
        let n = self.processes.len();
        let p = &mut self.processes[id];
        p.alive = false;
        p.role = Role::Follower;
        p.inbox.clear();
        p.votes = vec![false; n];
        p.heartbeat_timer = 0;
    }

    pub fn restart(&mut self, id: usize) {
        let timing = self.timing;
        let p = &mut self.processes[id];
        p.alive = true;
        p.role = Role::Follower;
        p.election_timer = timing.election_timeout(id, p.term);
    }

    /// Appends a client request at `leader`. Returns false if it is not a live leader.
    pub fn client_request(&mut self, leader: usize) -> bool {
        let p = &self.processes[leader];
        if !p.alive || p.role != Role::Leader {
            return false;
        }
        self.next_request += 1;
        let request = self.next_request;
        let p = &mut self.processes[leader];
        p.log.push(Entry {
            term: p.term,
            request,
        });
        p.match_index[leader] = p.log.len();
        self.advance_commit(leader);
        true
    }

    /// One unit of simulated time.
    pub fn tick(&mut self) {
        for msg in std::mem::take(&mut self.in_flight) {
            if self.connected(msg.from, msg.to) && self.processes[msg.to].alive {
                self.processes[msg.to].inbox.push_back(msg);
            }
        }
        let mut outbox = Vec::new();
        for id in 0..self.processes.len() {
            if !self.processes[id].alive {
                continue;
            }
            while let Some(msg) = self.processes[id].inbox.pop_front() {
                self.handle(id, msg, &mut outbox);
            }
            self.advance_timers(id, &mut outbox);
        }
        for msg in outbox {
            if self.connected(msg.from, msg.to) && self.processes[msg.to].alive {
                self.in_flight.push(msg);
            }
        }
    }

    fn advance_timers(&mut self, id: usize, out: &mut Vec<Message>) {
        let p = &mut self.processes[id];
        if p.role == Role::Leader {
            p.heartbeat_timer = p.heartbeat_timer.saturating_sub(1);
            if p.heartbeat_timer == 0 {
                p.heartbeat_timer = self.timing.heartbeat_interval;
                self.broadcast_append(id, out);
            }
        } else {
            p.election_timer = p.election_timer.saturating_sub(1);
            if p.election_timer == 0 {
                self.start_election(id, out);
            }
        }
    }

    fn start_election(&mut self, id: usize, out: &mut Vec<Message>) {
        let n = self.processes.len();
        let timing = self.timing;
        let p = &mut self.processes[id];
        p.term += 1;
        p.role = Role::Candidate;
        p.voted_for = Some(id);
        p.votes = vec![false; n];
        p.votes[id] = true;
        p.election_timer = timing.election_timeout(id, p.term);
        if self.majority() == 1 {
            self.become_leader(id, out);
            return;
        }
        let p = &self.processes[id];
        for peer in (0..n).filter(|&peer| peer != id) {
            out.push(Message {
                from: id,
                to: peer,
                term: p.term,
                payload: Payload::RequestVote {
                    last_log_index: p.log.len(),
                    last_log_term: p.last_log_term(),
                },
            });
        }
    }

    fn become_leader(&mut self, id: usize, out: &mut Vec<Message>) {
        let n = self.processes.len();
        let interval = self.timing.heartbeat_interval;
        let p = &mut self.processes[id];
        p.role = Role::Leader;
        p.next_index = vec![p.log.len() + 1; n];
        p.match_index = vec![0; n];
        p.log.push(Entry {
            term: p.term,
            request: 0,
        });
        p.match_index[id] = p.log.len();
        p.heartbeat_timer = interval;
        self.advance_commit(id);
        self.broadcast_append(id, out);
    }

    fn broadcast_append(&self, id: usize, out: &mut Vec<Message>) {
        let p = &self.processes[id];
        for peer in (0..self.processes.len()).filter(|&peer| peer != id) {
            let prev_index = p.next_index[peer] - 1;
            out.push(Message {
                from: id,
                to: peer,
                term: p.term,
                payload: Payload::AppendEntries {
                    prev_index,
                    prev_term: p.term_at(prev_index),
                    entries: p.log[prev_index..].to_vec(),
                    leader_commit: p.commit_index,
                },
            });
        }
    }

    fn advance_commit(&mut self, id: usize) {
        let majority = self.majority();
        let p = &mut self.processes[id];
        for index in (p.commit_index + 1..=p.log.len()).rev() {
            if p.log[index - 1].term != p.term {
                break;
            }
            let acks = p.match_index.iter().filter(|&&m| m >= index).count();
            if acks >= majority {
                p.commit_index = index;
                break;
            }
        }
    }

    fn handle(&mut self, id: usize, msg: Message, out: &mut Vec<Message>) {
        let timing = self.timing;
        let majority = self.majority();
        let p = &mut self.processes[id];
        if msg.term > p.term {
            p.become_follower(msg.term, &timing);
        }
        let reply = |term, payload| Message {
            from: id,
            to: msg.from,
            term,
            payload,
        };
        match msg.payload {
            Payload::RequestVote {
                last_log_index,
                last_log_term,
            } => {
                let up_to_date = last_log_term > p.last_log_term()
                    || (last_log_term == p.last_log_term() && last_log_index >= p.log.len());
                let granted =
                    msg.term == p.term && p.voted_for.is_none_or(|v| v == msg.from) && up_to_date;
                if granted {
                    p.voted_for = Some(msg.from);
                    p.election_timer = timing.election_timeout(id, p.term);
                }
                out.push(reply(p.term, Payload::Vote { granted }));
            }
            Payload::Vote { granted } => {
                if p.role == Role::Candidate && msg.term == p.term && granted {
                    p.votes[msg.from] = true;
                    if p.votes.iter().filter(|v| **v).count() >= majority {
                        self.become_leader(id, out);
                    }
                }
            }
            Payload::AppendEntries {
                prev_index,
                prev_term,
                entries,
                leader_commit,
            } => {
                if msg.term < p.term {
                    out.push(reply(
                        p.term,
                        Payload::AppendReply {
                            success: false,
                            match_index: 0,
                        },
                    ));
                    return;
                }
                p.role = Role::Follower;
                p.election_timer = timing.election_timeout(id, p.term);
                if prev_index > p.log.len() || p.term_at(prev_index) != prev_term {
                    let hint = p.log.len().min(prev_index.saturating_sub(1));
                    out.push(reply(
                        p.term,
                        Payload::AppendReply {
                            success: false,
                            match_index: hint,
                        },
                    ));
                    return;
                }
                for (offset, entry) in entries.iter().enumerate() {
                    let index = prev_index + offset + 1;
                    if index <= p.log.len() {
                        if p.log[index - 1].term != entry.term {
                            p.log.truncate(index - 1);
                            p.log.push(*entry);
                        }
                    } else {
                        p.log.push(*entry);
                    }
                }
                let last_new = prev_index + entries.len();
                if leader_commit > p.commit_index {
                    p.commit_index = p.commit_index.max(leader_commit.min(last_new));
                }
                out.push(reply(
                    p.term,
                    Payload::AppendReply {
                        success: true,
                        match_index: last_new,
                    },
                ));
            }
            Payload::AppendReply {
                success,
                match_index,
            } => {
                if p.role != Role::Leader || msg.term != p.term {
                    return;
                }
                if success {
                    p.match_index[msg.from] = p.match_index[msg.from].max(match_index);
                    p.next_index[msg.from] = p.match_index[msg.from] + 1;
                    self.advance_commit(id);
                } else {
                    let next = p.next_index[msg.from]
                        .saturating_sub(1)
                        .min(match_index + 1);
                    p.next_index[msg.from] = next.max(1);
                }
            }
        }
    }

    /// Same cluster with process `i` renamed to `perm[i]`.
    pub fn relabel(&self, perm: &[usize]) -> Self {
        let n = self.processes.len();
        assert_eq!(perm.len(), n);
        let permute_vec = |v: &Vec<usize>| {
            let mut out = vec![0; n];
            for (i, x) in v.iter().enumerate() {
                out[perm[i]] = *x;
            }
            out
        };
        let map_msg = |m: &Message| Message {
            from: perm[m.from],
            to: perm[m.to],
            ..m.clone()
        };
        let mut processes = self.processes.clone();
        for (i, p) in self.processes.iter().enumerate() {
            let mut votes = vec![false; n];
            for (j, v) in p.votes.iter().enumerate() {
                votes[perm[j]] = *v;
            }
            processes[perm[i]] = ProcessState {
                id: perm[i],
                voted_for: p.voted_for.map(|v| perm[v]),
                inbox: p.inbox.iter().map(map_msg).collect(),
                votes,
                next_index: permute_vec(&p.next_index),
                match_index: permute_vec(&p.match_index),
                ..p.clone()
            };
        }
        Self {
            processes,
            block_of: permute_vec(&self.block_of),
            in_flight: self.in_flight.iter().map(map_msg).collect(),
            timing: self.timing,
            next_request: self.next_request,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn timing() -> Timing {
        Timing {
            election_min: 10,
            election_max: 20,
            heartbeat_interval: 2,
            seed: 42,
        }
    }

    fn leaders(c: &Cluster) -> Vec<usize> {
        c.processes()
            .iter()
            .filter(|p| p.alive && p.role == Role::Leader)
            .map(|p| p.id)
            .collect()
    }

    #[test]
    fn connected_cluster_elects_one_leader() {
        let mut c = Cluster::new(3, timing());
        let first = (0..3)
            .map(|i| timing().election_timeout(i, 0))
            .min()
            .unwrap();
        for _ in 0..first - 1 {
            c.tick();
        }
        assert!(leaders(&c).is_empty());
        assert!(c.processes().iter().all(|p| p.term == 0));
        c.tick();
        assert!(c
            .processes()
            .iter()
            .any(|p| p.role == Role::Candidate && p.term == 1));
        // request vote -> vote -> leader
        c.tick();
        c.tick();
        let l = leaders(&c);
        assert_eq!(l.len(), 1);
        assert_eq!(c.processes()[l[0]].term, 1);
        // no-op replicated and committed on the leader after a round trip
        for _ in 0..4 {
            c.tick();
        }
        assert_eq!(c.processes()[l[0]].commit_index, 1);
    }

    #[test]
    fn isolated_leader_is_replaced() {
        let mut c = Cluster::new(3, timing());
        for _ in 0..40 {
            c.tick();
        }
        let old = leaders(&c)[0];
        let old_term = c.processes()[old].term;
        let blocks = (0..3).map(|i| usize::from(i == old)).collect();
        c.set_blocks(blocks);
        for _ in 0..60 {
            c.tick();
        }
        let new: Vec<usize> = leaders(&c).into_iter().filter(|&l| l != old).collect();
        assert_eq!(new.len(), 1);
        assert!(c.processes()[new[0]].term > old_term);
    }

    #[test]
    fn requests_commit_with_majority() {
        let mut c = Cluster::new(3, timing());
        for _ in 0..40 {
            c.tick();
        }
        let l = leaders(&c)[0];
        assert!(c.client_request(l));
        assert!(!c.client_request((l + 1) % 3));
        for _ in 0..8 {
            c.tick();
        }
        assert!(c
            .processes()
            .iter()
            .all(|p| p.commit_index == 2 && p.log.len() == 2));
    }

    #[test]
    fn single_node_elects_itself() {
        let mut c = Cluster::new(1, timing());
        for _ in 0..20 {
            c.tick();
        }
        assert_eq!(c.processes()[0].role, Role::Leader);
        assert_eq!(c.processes()[0].commit_index, 1);
    }

    #[test]
    fn crash_keeps_persistent_state() {
        let mut c = Cluster::new(3, timing());
        for _ in 0..40 {
            c.tick();
        }
        let before = c.processes()[1].clone();
        c.crash(1);
        let p = &c.processes()[1];
        assert!(!p.alive);
        assert_eq!(p.role, Role::Follower);
        assert_eq!(
            (p.term, &p.log, p.commit_index, p.voted_for),
            (
                before.term,
                &before.log,
                before.commit_index,
                before.voted_for
            )
        );
        c.restart(1);
        assert!(c.processes()[1].alive);
    }

    #[test]
    fn timeouts_are_in_range_and_deterministic() {
        let t = timing();
        for id in 0..5 {
            for term in 0..50 {
                let x = t.election_timeout(id, term);
                assert!((10..=20).contains(&x));
                assert_eq!(x, t.election_timeout(id, term));
            }
        }
    }
}
