use super::node::{Cluster, ProcessState, Role};

/// Identifier-free classification of a process's vote.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VoteClass {
    None,
    Own,
    Other,
}

impl VoteClass {
    pub fn of(p: &ProcessState) -> Self {
        match p.voted_for {
            None => VoteClass::None,
            Some(v) if v == p.id => VoteClass::Own,
            Some(_) => VoteClass::Other,
        }
    }

    pub fn tag(self) -> char {
        match self {
            VoteClass::None => 'N',
            VoteClass::Own => 'S',
            VoteClass::Other => 'O',
        }
    }
}

/// Uncapped read-only view of one process, for predicate evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcessView {
    pub term: u64,
    pub role: Role,
    pub log_terms: Vec<u64>,
    pub commit_index: usize,
    pub vote: VoteClass,
    pub alive: bool,
}

impl ProcessView {
    pub fn of(p: &ProcessState) -> Self {
        Self {
            term: p.term,
            role: p.role,
            log_terms: p.log.iter().map(|e| e.term).collect(),
            commit_index: p.commit_index,
            vote: VoteClass::of(p),
            alive: p.alive,
        }
    }

    pub fn committed_terms(&self) -> &[u64] {
        &self.log_terms[..self.commit_index]
    }
}

/// Per-process views of the whole cluster, indexed by process.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SystemSnapshot {
    pub processes: Vec<ProcessView>,
}

impl SystemSnapshot {
    pub fn of(cluster: &Cluster) -> Self {
        Self {
            processes: cluster.processes().iter().map(ProcessView::of).collect(),
        }
    }

    pub fn live(&self) -> impl Iterator<Item = &ProcessView> {
        self.processes.iter().filter(|p| p.alive)
    }
}
