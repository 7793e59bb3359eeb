use rand::RngCore;

use super::{blend, TraceStep};
use crate::error::Result;
use crate::mdp::{
    epsilon_greedy_pick_with, ActionKey, ActionSet, Agent, Observation, QTable, StateKey, TieBreak,
    VisitTable,
};
use crate::predicate::{PredicateSequence, PredicateTracker};

/// Exploration biased towards the target of a predicate sequence.
///
/// One Q-table (initialised to 1) and one visit table per predicate. Actions
/// are picked epsilon-greedily from the table of the currently active
/// predicate, the highest-indexed one that holds. At the end of an episode the
/// trace is swept backwards: steps that stay under one predicate (or start
/// under the target) get the plain exploration-bonus update, steps that change
/// predicate are additionally rewarded with `prog_reward` for moving up the
/// sequence and `gamma^d * final_reward` when the target is first reached `d`
/// steps later.
///
/// The target is detected from the pre-state predicate of each step, so an
/// episode whose only target state is its very last next-state does not count
/// as having reached it.
pub struct WaypointAgent<S> {
    sequence: PredicateSequence<S>,
    q: Vec<QTable>,
    visits: Vec<VisitTable>,
    alpha: f64,
    gamma: f64,
    epsilon: f64,
    tie_break: TieBreak,
    prog_reward: f64,
    final_reward: f64,
    tracker: PredicateTracker,
    trace: Vec<TraceStep>,
}

impl<S> std::fmt::Debug for WaypointAgent<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WaypointAgent")
            .field("sequence", &self.sequence)
            .field("alpha", &self.alpha)
            .field("gamma", &self.gamma)
            .field("epsilon", &self.epsilon)
            .field("active", &self.tracker.active())
            .finish_non_exhaustive()
    }
}

impl<S> WaypointAgent<S> {
    pub const DEFAULT_PROGRESS_REWARD: f64 = 2.0;
    pub const DEFAULT_FINAL_REWARD: f64 = 2.0;

    pub fn new(sequence: PredicateSequence<S>, alpha: f64, gamma: f64, epsilon: f64) -> Self {
        let n = sequence.len();
        Self {
            sequence,
            q: (0..n).map(|_| QTable::new(1.0)).collect(),
            visits: (0..n).map(|_| VisitTable::new()).collect(),
            alpha,
            gamma,
            epsilon,
            tie_break: TieBreak::Random,
            prog_reward: Self::DEFAULT_PROGRESS_REWARD,
            final_reward: Self::DEFAULT_FINAL_REWARD,
            tracker: PredicateTracker::default(),
            trace: Vec::new(),
        }
    }

    pub fn with_rewards(mut self, prog_reward: f64, final_reward: f64) -> Self {
        self.prog_reward = prog_reward;
        self.final_reward = final_reward;
        self
    }

    pub fn sequence(&self) -> &PredicateSequence<S> {
        &self.sequence
    }

    pub fn with_tie_break(mut self, tie_break: TieBreak) -> Self {
        self.tie_break = tie_break;
        self
    }

    /// Q-table of predicate `index` (1-based).
    pub fn q_table(&self, index: usize) -> &QTable {
        &self.q[index - 1]
    }

    pub fn q_tables(&self) -> &[QTable] {
        &self.q
    }

    pub fn visits(&self, index: usize) -> &VisitTable {
        &self.visits[index - 1]
    }

    pub fn active_predicate(&self) -> usize {
        self.tracker.active()
    }

    /// Upper bound on any stored value: `max(1, gamma * (prog + final))`.
    pub fn value_bound(&self) -> f64 {
        f64::max(1.0, self.gamma * (self.prog_reward + self.final_reward))
    }
}

impl<S> Agent<S> for WaypointAgent<S> {
    fn name(&self) -> &str {
        "WaypointRL"
    }

    fn new_episode(&mut self, initial: Observation<'_, S>) {
        self.trace.clear();
        self.tracker = PredicateTracker::start(&self.sequence, initial.snapshot);
    }

    fn pick(
        &mut self,
        state: Observation<'_, S>,
        actions: &ActionSet,
        rng: &mut dyn RngCore,
    ) -> Result<ActionKey> {
        let q = &self.q[self.tracker.active() - 1];
        epsilon_greedy_pick_with(
            actions,
            self.epsilon,
            |a| q.get(state.key, a),
            self.tie_break,
            rng,
        )
    }

    fn record_step(
        &mut self,
        state: &StateKey,
        action: &ActionKey,
        next: Observation<'_, S>,
        next_actions: &ActionSet,
        _reward: f64,
    ) {
        let (active, next_active) = self.tracker.advance(&self.sequence, next.snapshot);
        self.trace.push(TraceStep {
            state: state.clone(),
            action: action.clone(),
            next_state: next.key.clone(),
            next_actions: next_actions.clone(),
            active,
            next_active,
        });
    }

    fn process_episode(&mut self) {
        let n = self.sequence.len();
        let len = self.trace.len();
        // 0-based index of the first step that starts under the target.
        let reached_step = self.trace.iter().position(|s| s.active == n);

        for (i, step) in self.trace.iter().enumerate().rev() {
            let p = step.active - 1;
            let t = self.visits[p].increment(&step.state, &step.action);
            let bonus = 1.0 / t as f64;
            let q = self.q[p].get(&step.state, &step.action);

            let target = if step.active == step.next_active || step.active == n {
                if i + 1 < len {
                    let future = self.q[p]
                        .max_over(&step.next_state, &step.next_actions)
                        .unwrap_or(0.0);
                    bonus.max(self.gamma * future)
                } else {
                    bonus.max(0.0)
                }
            } else {
                let progress = if step.next_active > step.active {
                    self.prog_reward
                } else {
                    0.0
                };
                let final_bonus = match reached_step {
                    // d = reachedStep - i - 1 in 1-based terms; only future visits count.
                    Some(r) if i < r => self.gamma.powi((r - i - 1) as i32) * self.final_reward,
                    _ => 0.0,
                };
                bonus.max(self.gamma * (progress + final_bonus))
            };
            self.q[p].set(&step.state, &step.action, blend(self.alpha, q, target));
        }
    }
}
