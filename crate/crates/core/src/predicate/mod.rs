//! Named boolean predicates over system snapshots and the ordered predicate
//! sequences that drive waypoint-guided exploration.

mod parse;
pub mod raft;

use std::fmt;
use std::sync::Arc;

pub use parse::{parse_call, Call};

/// A named, pure boolean function over snapshots of type `S`.
pub struct Predicate<S> {
    name: Arc<str>,
    eval: Arc<dyn Fn(&S) -> bool + Send + Sync>,
}

impl<S> Clone for Predicate<S> {
    fn clone(&self) -> Self {
        Self {
            name: self.name.clone(),
            eval: self.eval.clone(),
        }
    }
}

impl<S> fmt::Debug for Predicate<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Predicate({})", self.name)
    }
}

impl<S: 'static> Predicate<S> {
    pub fn new(name: impl Into<String>, eval: impl Fn(&S) -> bool + Send + Sync + 'static) -> Self {
        Self {
            name: Arc::from(name.into()),
            eval: Arc::new(eval),
        }
    }

    /// The constant-true predicate that heads every sequence.
    pub fn always() -> Self {
        Self::new("true", |_| true)
    }

    pub fn and(&self, other: &Predicate<S>) -> Self {
        let (p, q) = (self.eval.clone(), other.eval.clone());
        Self::new(format!("({} AND {})", self.name, other.name), move |s| {
            p(s) && q(s)
        })
    }

    pub fn or(&self, other: &Predicate<S>) -> Self {
        let (p, q) = (self.eval.clone(), other.eval.clone());
        Self::new(format!("({} OR {})", self.name, other.name), move |s| {
            p(s) || q(s)
        })
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(&self) -> Self {
        let p = self.eval.clone();
        Self::new(format!("(NOT {})", self.name), move |s| !p(s))
    }
}

impl<S> Predicate<S> {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, snapshot: &S) -> bool {
        (self.eval)(snapshot)
    }
}

/// `pred_1 .. pred_n` with `pred_1` the constant-true predicate and `pred_n`
/// the target. Indices handed out by this type are 1-based.
pub struct PredicateSequence<S> {
    predicates: Vec<Predicate<S>>,
    one_time: bool,
}

impl<S> Clone for PredicateSequence<S> {
    fn clone(&self) -> Self {
        Self {
            predicates: self.predicates.clone(),
            one_time: self.one_time,
        }
    }
}

impl<S> fmt::Debug for PredicateSequence<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PredicateSequence")
            .field("predicates", &self.names())
            .field("one_time", &self.one_time)
            .finish()
    }
}

impl<S: 'static> PredicateSequence<S> {
    /// `[true, waypoints.., target]`.
    pub fn new(waypoints: Vec<Predicate<S>>, target: Predicate<S>, one_time: bool) -> Self {
        let mut predicates = Vec::with_capacity(waypoints.len() + 2);
        predicates.push(Predicate::always());
        predicates.extend(waypoints);
        predicates.push(target);
        Self {
            predicates,
            one_time,
        }
    }

    /// The single-element sequence `[true]`.
    pub fn trivial() -> Self {
        Self {
            predicates: vec![Predicate::always()],
            one_time: false,
        }
    }
}

impl<S> PredicateSequence<S> {
    pub fn len(&self) -> usize {
        self.predicates.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn one_time(&self) -> bool {
        self.one_time
    }

    pub fn predicates(&self) -> &[Predicate<S>] {
        &self.predicates
    }

    pub fn target(&self) -> &Predicate<S> {
        self.predicates.last().expect("sequence is never empty")
    }

    pub fn names(&self) -> Vec<&str> {
        self.predicates.iter().map(Predicate::name).collect()
    }

    /// Highest 1-based index whose predicate holds; scans from `n` down.
    pub fn active_index(&self, snapshot: &S) -> usize {
        self.predicates
            .iter()
            .rposition(|p| p.eval(snapshot))
            .map_or(1, |i| i + 1)
    }
}

/// Per-episode active-predicate bookkeeping with one-time latching.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PredicateTracker {
    active: usize,
    reached: bool,
}

impl Default for PredicateTracker {
    fn default() -> Self {
        Self {
            active: 1,
            reached: false,
        }
    }
}

impl PredicateTracker {
    /// Episode start: active predicate of the initial state. Does not latch.
    pub fn start<S>(sequence: &PredicateSequence<S>, initial: &S) -> Self {
        Self {
            active: sequence.active_index(initial),
            reached: false,
        }
    }

    pub fn active(&self) -> usize {
        self.active
    }

    pub fn reached(&self) -> bool {
        self.reached
    }

    /// Records a move to `next` and returns `(active, next_active)`.
    pub fn advance<S>(&mut self, sequence: &PredicateSequence<S>, next: &S) -> (usize, usize) {
        let n = sequence.len();
        let next_active = if self.reached {
            n
        } else {
            let idx = sequence.active_index(next);
            if idx == n && sequence.one_time() {
                self.reached = true;
            }
            idx
        };
        let active = std::mem::replace(&mut self.active, next_active);
        (active, next_active)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pred(name: &str, f: fn(&u32) -> bool) -> Predicate<u32> {
        Predicate::new(name, f)
    }

    #[test]
    fn combinators() {
        let even = pred("even", |x| x % 2 == 0);
        let t = Predicate::<u32>::always();
        for x in 0..20 {
            assert_eq!(t.and(&even).eval(&x), even.eval(&x));
            assert_eq!(even.not().not().eval(&x), even.eval(&x));
            assert!(even.or(&even.not()).eval(&x));
        }
        assert_eq!(t.and(&even).name(), "(true AND even)");
        assert_eq!(even.not().name(), "(NOT even)");
    }

    fn seq(one_time: bool) -> PredicateSequence<u32> {
        PredicateSequence::new(
            vec![pred("ge2", |x| *x >= 2)],
            pred("three", |x| *x == 3 || *x == 5),
            one_time,
        )
    }

    #[test]
    fn active_index_scans_downward() {
        let s = seq(false);
        assert_eq!(s.active_index(&0), 1);
        assert_eq!(s.active_index(&2), 2);
        assert_eq!(s.active_index(&3), 3);
        let gap = PredicateSequence::new(
            vec![pred("never", |_| false)],
            pred("odd", |x| x % 2 == 1),
            false,
        );
        assert_eq!(gap.active_index(&1), 3);
    }

    #[test]
    fn tracker_latches_only_in_one_time_mode() {
        let s = seq(true);
        let mut t = PredicateTracker::start(&s, &0);
        assert_eq!(t.advance(&s, &3), (1, 3));
        assert!(t.reached());
        assert_eq!(t.advance(&s, &0), (3, 3));

        let s = seq(false);
        let mut t = PredicateTracker::start(&s, &0);
        assert_eq!(t.advance(&s, &3), (1, 3));
        assert_eq!(t.advance(&s, &2), (3, 2));
        assert!(!t.reached());
    }

    #[test]
    fn start_does_not_latch() {
        let s = seq(true);
        let t = PredicateTracker::start(&s, &3);
        assert_eq!(t.active(), 3);
        assert!(!t.reached());
    }

    #[test]
    fn never_beyond_base() {
        let s = seq(true);
        let mut t = PredicateTracker::start(&s, &0);
        for _ in 0..5 {
            assert_eq!(t.advance(&s, &1), (1, 1));
        }
    }
}
