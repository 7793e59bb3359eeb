use std::fmt;

use super::node::{ProcessState, Role};
use super::snapshot::VoteClass;

/// Bounds applied when abstracting a process into a [`Color`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    pub term: u64,
    pub log: usize,
    pub commit: usize,
}

/// Bounded, identifier-free abstraction of a process's local state.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Color {
    pub term: u64,
    pub role: Role,
    pub log: Vec<u64>,
    pub commit: usize,
    pub vote: VoteClass,
    pub alive: bool,
}

impl Color {
    pub fn paint(p: &ProcessState, caps: &Caps) -> Self {
        Self {
            term: p.term.min(caps.term),
            role: p.role,
            log: p
                .log
                .iter()
                .take(caps.log)
                .map(|e| e.term.min(caps.term))
                .collect(),
            commit: p.commit_index.min(caps.commit),
            vote: VoteClass::of(p),
            alive: p.alive,
        }
    }
}

/// `t<term><role>[<log terms>]c<commit>v<vote><+|->`, e.g. `t1L[1.1]c1vS+`.
impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}{}[", self.term, self.role.tag())?;
        for (i, t) in self.log.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{t}")?;
        }
        write!(
            f,
            "]c{}v{}{}",
            self.commit,
            self.vote.tag(),
            if self.alive { '+' } else { '-' }
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raft::node::{Cluster, Timing};

    fn cluster() -> Cluster {
        Cluster::new(
            2,
            Timing {
                election_min: 10,
                election_max: 20,
                heartbeat_interval: 2,
                seed: 1,
            },
        )
    }

    const CAPS: Caps = Caps {
        term: 5,
        log: 6,
        commit: 6,
    };

    #[test]
    fn identity_is_not_painted() {
        let c = cluster();
        let [a, b] = [&c.processes()[0], &c.processes()[1]];
        assert_ne!(a.id, b.id);
        assert_eq!(Color::paint(a, &CAPS), Color::paint(b, &CAPS));
        assert_eq!(Color::paint(a, &CAPS).to_string(), "t0F[]c0vN+");
    }

    #[test]
    fn caps_and_vote_class() {
        let c = cluster();
        let mut p = c.processes()[1].clone();
        p.term = 7;
        p.voted_for = Some(1);
        let color = Color::paint(&p, &CAPS);
        assert_eq!(color.term, 5);
        assert_eq!(color.vote, VoteClass::Own);
        p.voted_for = Some(0);
        assert_eq!(Color::paint(&p, &CAPS).vote, VoteClass::Other);
    }
}
