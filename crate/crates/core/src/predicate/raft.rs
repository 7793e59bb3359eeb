//! Predicate library over [`SystemSnapshot`]s of the Raft simulator.
//!
//! Role-based predicates and `allCommitted`/`logDiff` look at live processes
//! only. The remaining term and log predicates also read the persistent state
//! of crashed processes.

use super::{parse_call, Call, Predicate, PredicateSequence};
use crate::error::{Error, Result};
use crate::raft::{Role, SystemSnapshot};

pub type RaftPredicate = Predicate<SystemSnapshot>;

pub const KNOWN: &[&str] = &[
    "allCommitted(x)",
    "processesInTerm(n, t)",
    "committedEntriesInTerm(x, t)",
    "leaderInTerm(t)",
    "logDiff(x)",
    "logCommitDiff(x)",
    "processInRole(r)",
    "processInRoleTerm(r, t)",
    "allInTerm(t)",
    "termDiff(d)",
    "commitEntries(x)",
    "entryInTerm(t)",
    "oneLeaderOneCandidate",
];

fn positive(what: &str, v: i64) -> Result<usize> {
    if v >= 1 {
        Ok(v as usize)
    } else {
        Err(Error::Predicate(format!(
            "{what} must be positive, got {v}"
        )))
    }
}

fn term(what: &str, v: i64) -> Result<u64> {
    u64::try_from(v).map_err(|_| Error::Predicate(format!("{what} must be nonnegative, got {v}")))
}

fn spread<I: Iterator<Item = u64>>(values: I) -> u64 {
    let (mut lo, mut hi) = (u64::MAX, 0);
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    hi.saturating_sub(lo)
}

/// Every live process (and at least one) has commitIndex >= x.
pub fn all_committed(x: i64) -> Result<RaftPredicate> {
    let x = positive("allCommitted: x", x)?;
    Ok(Predicate::new(
        format!("allCommitted({x})"),
        move |s: &SystemSnapshot| {
            s.live().next().is_some() && s.live().all(|p| p.commit_index >= x)
        },
    ))
}

pub fn processes_in_term(n: i64, t: i64) -> Result<RaftPredicate> {
    let n = positive("processesInTerm: n", n)?;
    let t = term("processesInTerm: t", t)?;
    Ok(Predicate::new(
        format!("processesInTerm({n}, {t})"),
        move |s: &SystemSnapshot| s.processes.iter().filter(|p| p.term == t).count() >= n,
    ))
}

/// Some process in term t has at least x committed entries.
pub fn committed_entries_in_term(x: i64, t: i64) -> Result<RaftPredicate> {
    let x = positive("committedEntriesInTerm: x", x)?;
    let t = term("committedEntriesInTerm: t", t)?;
    Ok(Predicate::new(
        format!("committedEntriesInTerm({x}, {t})"),
        move |s: &SystemSnapshot| {
            s.processes
                .iter()
                .any(|p| p.term == t && p.commit_index >= x)
        },
    ))
}

pub fn leader_in_term(t: i64) -> Result<RaftPredicate> {
    let t = term("leaderInTerm: t", t)?;
    Ok(Predicate::new(
        format!("leaderInTerm({t})"),
        move |s: &SystemSnapshot| s.live().any(|p| p.role == Role::Leader && p.term == t),
    ))
}

/// Log lengths of two live processes differ by at least x.
pub fn log_diff(x: i64) -> Result<RaftPredicate> {
    let x = positive("logDiff: x", x)?;
    Ok(Predicate::new(
        format!("logDiff({x})"),
        move |s: &SystemSnapshot| spread(s.live().map(|p| p.log_terms.len() as u64)) >= x as u64,
    ))
}

pub fn log_commit_diff(x: i64) -> Result<RaftPredicate> {
    let x = positive("logCommitDiff: x", x)?;
    Ok(Predicate::new(
        format!("logCommitDiff({x})"),
        move |s: &SystemSnapshot| {
            spread(s.processes.iter().map(|p| p.commit_index as u64)) >= x as u64
        },
    ))
}

fn role_name(r: Role) -> &'static str {
    match r {
        Role::Follower => "follower",
        Role::Candidate => "candidate",
        Role::Leader => "leader",
    }
}

pub fn process_in_role(r: Role) -> RaftPredicate {
    Predicate::new(
        format!("processInRole({})", role_name(r)),
        move |s: &SystemSnapshot| s.live().any(|p| p.role == r),
    )
}

pub fn process_in_role_term(r: Role, t: i64) -> Result<RaftPredicate> {
    let t = term("processInRoleTerm: t", t)?;
    Ok(Predicate::new(
        format!("processInRoleTerm({}, {t})", role_name(r)),
        move |s: &SystemSnapshot| s.live().any(|p| p.role == r && p.term == t),
    ))
}

pub fn all_in_term(t: i64) -> Result<RaftPredicate> {
    let t = term("allInTerm: t", t)?;
    Ok(Predicate::new(
        format!("allInTerm({t})"),
        move |s: &SystemSnapshot| s.processes.iter().all(|p| p.term == t),
    ))
}

pub fn term_diff(d: i64) -> Result<RaftPredicate> {
    let d = positive("termDiff: d", d)?;
    Ok(Predicate::new(
        format!("termDiff({d})"),
        move |s: &SystemSnapshot| spread(s.processes.iter().map(|p| p.term)) >= d as u64,
    ))
}

/// Some process has at least x committed entries.
pub fn commit_entries(x: i64) -> Result<RaftPredicate> {
    let x = positive("commitEntries: x", x)?;
    Ok(Predicate::new(
        format!("commitEntries({x})"),
        move |s: &SystemSnapshot| s.processes.iter().any(|p| p.commit_index >= x),
    ))
}

/// Some log holds a committed entry from term t.
pub fn entry_in_term(t: i64) -> Result<RaftPredicate> {
    let t = term("entryInTerm: t", t)?;
    Ok(Predicate::new(
        format!("entryInTerm({t})"),
        move |s: &SystemSnapshot| s.processes.iter().any(|p| p.committed_terms().contains(&t)),
    ))
}

pub fn one_leader_one_candidate() -> RaftPredicate {
    Predicate::new("oneLeaderOneCandidate", |s: &SystemSnapshot| {
        s.live().any(|p| p.role == Role::Leader) && s.live().any(|p| p.role == Role::Candidate)
    })
}

fn role_arg(call: &Call, idx: usize) -> Result<Role> {
    let raw = &call.args[idx];
    Role::parse(raw).ok_or_else(|| Error::Predicate(format!("{}: unknown role `{raw}`", call.name)))
}

fn build(call: &Call) -> Result<RaftPredicate> {
    let arity = |n| call.expect_arity(n);
    match call.name.as_str() {
        "allCommitted" => arity(1).and_then(|_| all_committed(call.int_arg(0)?)),
        "processesInTerm" => {
            arity(2).and_then(|_| processes_in_term(call.int_arg(0)?, call.int_arg(1)?))
        }
        "committedEntriesInTerm" => {
            arity(2).and_then(|_| committed_entries_in_term(call.int_arg(0)?, call.int_arg(1)?))
        }
        "leaderInTerm" => arity(1).and_then(|_| leader_in_term(call.int_arg(0)?)),
        "logDiff" => arity(1).and_then(|_| log_diff(call.int_arg(0)?)),
        "logCommitDiff" => arity(1).and_then(|_| log_commit_diff(call.int_arg(0)?)),
        "processInRole" => arity(1).and_then(|_| Ok(process_in_role(role_arg(call, 0)?))),
        "processInRoleTerm" => {
            arity(2).and_then(|_| process_in_role_term(role_arg(call, 0)?, call.int_arg(1)?))
        }
        "allInTerm" => arity(1).and_then(|_| all_in_term(call.int_arg(0)?)),
        "termDiff" => arity(1).and_then(|_| term_diff(call.int_arg(0)?)),
        "commitEntries" => arity(1).and_then(|_| commit_entries(call.int_arg(0)?)),
        "entryInTerm" => arity(1).and_then(|_| entry_in_term(call.int_arg(0)?)),
        "oneLeaderOneCandidate" => arity(0).map(|_| one_leader_one_candidate()),
        other => Err(Error::Predicate(format!(
            "unknown predicate `{other}`; known: {}",
            KNOWN.join(", ")
        ))),
    }
}

/// Parses e.g. `logCommitDiff(3)` or `processInRole(leader)`.
pub fn parse_raft_predicate(text: &str) -> Result<RaftPredicate> {
    build(&parse_call(text)?)
}

/// Default waypoints leading to `target`.
pub fn default_waypoints(target: &str) -> Result<Vec<RaftPredicate>> {
    let call = parse_call(target)?;
    build(&call)?;
    let arg = |i| call.int_arg(i);
    Ok(match call.name.as_str() {
        "logCommitDiff" => vec![log_diff(1)?],
        "processesInTerm" if arg(1)? >= 2 => vec![processes_in_term(arg(0)?, arg(1)? - 1)?],
        "entryInTerm" => vec![processes_in_term(1, arg(0)?)?, leader_in_term(arg(0)?)?],
        "leaderInTerm" | "processInRoleTerm" => {
            vec![processes_in_term(1, arg(call.args.len() - 1)?)?]
        }
        "committedEntriesInTerm" => {
            let (x, t) = (arg(0)?, arg(1)?);
            let mut w = vec![leader_in_term(t)?];
            for i in 1..x {
                w.push(committed_entries_in_term(i, t)?);
            }
            w
        }
        "allCommitted" => (1..arg(0)?).map(all_committed).collect::<Result<_>>()?,
        "logDiff" => (1..arg(0)?).map(log_diff).collect::<Result<_>>()?,
        _ => Vec::new(),
    })
}

/// `[true, default waypoints.., target]`.
pub fn intermediate_sequence_for(
    target: &str,
    one_time: bool,
) -> Result<PredicateSequence<SystemSnapshot>> {
    let waypoints = default_waypoints(target)?;
    Ok(PredicateSequence::new(
        waypoints,
        parse_raft_predicate(target)?,
        one_time,
    ))
}

/// `[true, waypoints.., target]` from explicit predicate strings.
pub fn sequence_from(
    waypoints: &[String],
    target: &str,
    one_time: bool,
) -> Result<PredicateSequence<SystemSnapshot>> {
    let waypoints = waypoints
        .iter()
        .map(|w| parse_raft_predicate(w))
        .collect::<Result<_>>()?;
    Ok(PredicateSequence::new(
        waypoints,
        parse_raft_predicate(target)?,
        one_time,
    ))
}
