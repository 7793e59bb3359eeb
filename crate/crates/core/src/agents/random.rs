use rand::RngCore;

use crate::error::Result;
use crate::mdp::{uniform_pick, ActionKey, ActionSet, Agent, Observation, StateKey};

/// Picks uniformly among enabled actions and never learns.
#[derive(Debug, Clone, Default)]
pub struct RandomAgent;

impl RandomAgent {
    pub fn new() -> Self {
        Self
    }
}

impl<S> Agent<S> for RandomAgent {
    fn name(&self) -> &str {
        "Random"
    }

    fn new_episode(&mut self, _initial: Observation<'_, S>) {}

    fn pick(
        &mut self,
        _state: Observation<'_, S>,
        actions: &ActionSet,
        rng: &mut dyn RngCore,
    ) -> Result<ActionKey> {
        uniform_pick(actions, rng)
    }

    fn record_step(
        &mut self,
        _: &StateKey,
        _: &ActionKey,
        _: Observation<'_, S>,
        _: &ActionSet,
        _: f64,
    ) {
    }

    fn process_episode(&mut self) {}
}
