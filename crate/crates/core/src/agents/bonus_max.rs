use rand::RngCore;

use super::{blend, TraceStep};
use crate::error::Result;
use crate::mdp::{
    epsilon_greedy_pick_with, ActionKey, ActionSet, Agent, Observation, QTable, StateKey, TieBreak,
    VisitTable,
};

/// Q-learning on a `1/visits` exploration bonus with max-propagation.
///
/// Values start at 1 and updates happen in one backward sweep over the episode
/// trace, using `max(bonus, gamma * max_a' Q(s', a'))` in place of the usual
/// sum. Values therefore stay in `[0, 1]`.
#[derive(Debug, Clone)]
pub struct BonusMaxAgent {
    q: QTable,
    visits: VisitTable,
    alpha: f64,
    gamma: f64,
    epsilon: f64,
    tie_break: TieBreak,
    trace: Vec<TraceStep>,
}

impl BonusMaxAgent {
    pub const DEFAULT_ALPHA: f64 = 0.2;
    pub const DEFAULT_GAMMA: f64 = 0.95;
    pub const DEFAULT_EPSILON: f64 = 0.05;

    pub fn new(alpha: f64, gamma: f64, epsilon: f64) -> Self {
        Self {
            q: QTable::new(1.0),
            visits: VisitTable::new(),
            alpha,
            gamma,
            epsilon,
            tie_break: TieBreak::Random,
            trace: Vec::new(),
        }
    }

    pub fn with_tie_break(mut self, tie_break: TieBreak) -> Self {
        self.tie_break = tie_break;
        self
    }

    pub fn q_table(&self) -> &QTable {
        &self.q
    }

    pub fn q_table_mut(&mut self) -> &mut QTable {
        &mut self.q
    }

    pub fn visits(&self) -> &VisitTable {
        &self.visits
    }

    pub fn visits_mut(&mut self) -> &mut VisitTable {
        &mut self.visits
    }

    /// Greedy-with-probability `1 - epsilon` choice over `Q(state, .)`.
    pub fn pick_action(
        &self,
        state: &StateKey,
        actions: &[ActionKey],
        rng: &mut dyn RngCore,
    ) -> Result<ActionKey> {
        epsilon_greedy_pick_with(
            actions,
            self.epsilon,
            |a| self.q.get(state, a),
            self.tie_break,
            rng,
        )
    }
}

impl<S> Agent<S> for BonusMaxAgent {
    fn name(&self) -> &str {
        "BonusMaxRL"
    }

    fn new_episode(&mut self, _initial: Observation<'_, S>) {
        self.trace.clear();
    }

    fn pick(
        &mut self,
        state: Observation<'_, S>,
        actions: &ActionSet,
        rng: &mut dyn RngCore,
    ) -> Result<ActionKey> {
        self.pick_action(state.key, actions, rng)
    }

    fn record_step(
        &mut self,
        state: &StateKey,
        action: &ActionKey,
        next: Observation<'_, S>,
        next_actions: &ActionSet,
        _reward: f64,
    ) {
        self.trace.push(TraceStep {
            state: state.clone(),
            action: action.clone(),
            next_state: next.key.clone(),
            next_actions: next_actions.clone(),
            active: 1,
            next_active: 1,
        });
    }

    fn process_episode(&mut self) {
        let last = self.trace.len();
        for (i, step) in self.trace.iter().enumerate().rev() {
            let t = self.visits.increment(&step.state, &step.action);
            let bonus = 1.0 / t as f64;
            let q = self.q.get(&step.state, &step.action);
            let target = if i + 1 < last {
                let future = self
                    .q
                    .max_over(&step.next_state, &step.next_actions)
                    .unwrap_or(0.0);
                bonus.max(self.gamma * future)
            } else {
                bonus.max(0.0)
            };
            self.q
                .set(&step.state, &step.action, blend(self.alpha, q, target));
        }
    }
}
