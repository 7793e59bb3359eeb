//! Exploration policies: uniform random, negative-visit Q-learning, the
//! max-propagating exploration bonus agent, and its waypoint-guided extension.

mod bonus_max;
mod neg_visits;
mod random;
mod waypoint;

pub use bonus_max::BonusMaxAgent;
pub use neg_visits::NegVisitsAgent;
pub use random::RandomAgent;
pub use waypoint::WaypointAgent;

use crate::mdp::{ActionKey, ActionSet, StateKey};

/// Step as retained by the learning agents until the end of an episode.
#[derive(Debug, Clone)]
struct TraceStep {
    state: StateKey,
    action: ActionKey,
    next_state: StateKey,
    next_actions: ActionSet,
    active: usize,
    next_active: usize,
}

/// `(1 - alpha) * q + alpha * target`
#[inline]
fn blend(alpha: f64, q: f64, target: f64) -> f64 {
    (1.0 - alpha) * q + alpha * target
}
