use std::collections::HashMap;

use rand::RngCore;

use super::blend;
use crate::error::Result;
use crate::mdp::{softmax_pick, ActionKey, ActionSet, Agent, Observation, QTable, StateKey};

/// Baseline: additive Q-learning where reaching `s'` is rewarded with minus
/// the number of times `s'` has been reached. Updates after every step and
/// samples actions with a softmax over Q-values.
#[derive(Debug, Clone)]
pub struct NegVisitsAgent {
    q: QTable,
    state_visits: HashMap<StateKey, u64>,
    alpha: f64,
    gamma: f64,
}

impl NegVisitsAgent {
    pub const DEFAULT_ALPHA: f64 = 0.3;
    pub const DEFAULT_GAMMA: f64 = 0.7;

    pub fn new(alpha: f64, gamma: f64) -> Self {
        Self {
            q: QTable::new(0.0),
            state_visits: HashMap::new(),
            alpha,
            gamma,
        }
    }

    pub fn q_table(&self) -> &QTable {
        &self.q
    }

    pub fn state_visits(&self, state: &StateKey) -> u64 {
        self.state_visits.get(state).copied().unwrap_or(0)
    }

    /// Counts the visit to `next` and applies the additive update to `Q(state, action)`.
    pub fn update(
        &mut self,
        state: &StateKey,
        action: &ActionKey,
        next: &StateKey,
        next_actions: &[ActionKey],
    ) {
        let visits = match self.state_visits.get_mut(next) {
            Some(v) => {
                *v += 1;
                *v
            }
            None => {
                self.state_visits.insert(next.clone(), 1);
                1
            }
        };
        let reward = -(visits as f64);
        let future = self.q.max_over(next, next_actions).unwrap_or(0.0);
        let q = self.q.get(state, action);
        self.q.set(
            state,
            action,
            blend(self.alpha, q, reward + self.gamma * future),
        );
    }
}

impl<S> Agent<S> for NegVisitsAgent {
    fn name(&self) -> &str {
        "NegRLVisits"
    }

    fn new_episode(&mut self, _initial: Observation<'_, S>) {}

    fn pick(
        &mut self,
        state: Observation<'_, S>,
        actions: &ActionSet,
        rng: &mut dyn RngCore,
    ) -> Result<ActionKey> {
        softmax_pick(actions, |a| self.q.get(state.key, a), rng)
    }

    fn record_step(
        &mut self,
        state: &StateKey,
        action: &ActionKey,
        next: Observation<'_, S>,
        next_actions: &ActionSet,
        _reward: f64,
    ) {
        self.update(state, action, next.key, next_actions);
    }

    fn process_episode(&mut self) {}
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_and_second_visit() {
        let mut agent = NegVisitsAgent::new(0.3, 0.7);
        let (s, a, n) = (StateKey::new("s"), ActionKey::new("a"), StateKey::new("n"));
        let next_actions = [ActionKey::new("b")];
        agent.update(&s, &a, &n, &next_actions);
        // 0.7 * 0 + 0.3 * (-1 + 0.7 * 0)
        assert!((agent.q_table().get(&s, &a) - (-0.3)).abs() < 1e-12);
        assert_eq!(agent.state_visits(&n), 1);

        let other = StateKey::new("o");
        agent.update(&other, &a, &n, &next_actions);
        assert_eq!(agent.state_visits(&n), 2);
        assert!((agent.q_table().get(&other, &a) - 0.3 * -2.0).abs() < 1e-12);
    }
}
