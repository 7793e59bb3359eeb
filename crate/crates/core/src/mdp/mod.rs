//! Episodic environment/agent contracts, the generic RL loop, and value tables.

mod keys;
mod pick;
mod record;
mod table;

use std::time::{Duration, Instant};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::predicate::{PredicateSequence, PredicateTracker};

pub use keys::{action_set, ActionKey, ActionSet, StateKey};
pub use pick::{
    epsilon_greedy_pick, epsilon_greedy_pick_with, greedy_pick, softmax_pick, uniform_pick,
    TieBreak,
};
pub use record::{EpisodeRecord, Step};
pub use table::{QTable, VisitTable};

/// Result of one environment transition.
#[derive(Debug, Clone)]
pub struct Transition {
    pub state: StateKey,
    /// Always zero for the environments in this crate; agents generate their
    /// own exploration bonuses.
    pub reward: f64,
}

/// An episodic MDP. `Snapshot` is the concrete view predicates evaluate.
pub trait Environment {
    type Snapshot;

    /// Returns to the initial state.
    fn reset(&mut self) -> StateKey;

    /// Enabled actions at the current state.
    fn actions(&self) -> Vec<ActionKey>;

    /// Fails with [`Error::DisabledAction`] when `action` is not enabled.
    fn step(&mut self, action: &ActionKey) -> Result<Transition>;

    fn snapshot(&self) -> &Self::Snapshot;
}

/// A state as seen by an agent: its key plus the concrete snapshot.
#[derive(Debug)]
pub struct Observation<'a, S> {
    pub key: &'a StateKey,
    pub snapshot: &'a S,
}

impl<S> Clone for Observation<'_, S> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<S> Copy for Observation<'_, S> {}

/// An exploration policy driven by [`run_experiment`].
pub trait Agent<S> {
    fn name(&self) -> &str;

    fn new_episode(&mut self, initial: Observation<'_, S>);

    fn pick(
        &mut self,
        state: Observation<'_, S>,
        actions: &ActionSet,
        rng: &mut dyn RngCore,
    ) -> Result<ActionKey>;

    /// `next_actions` are the actions enabled at `next`; agents that bootstrap
    /// from `max_a' Q(next, a')` need them.
    fn record_step(
        &mut self,
        state: &StateKey,
        action: &ActionKey,
        next: Observation<'_, S>,
        next_actions: &ActionSet,
        reward: f64,
    );

    fn process_episode(&mut self);
}

impl<S, A: Agent<S> + ?Sized> Agent<S> for Box<A> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn new_episode(&mut self, initial: Observation<'_, S>) {
        (**self).new_episode(initial)
    }
    fn pick(
        &mut self,
        state: Observation<'_, S>,
        actions: &ActionSet,
        rng: &mut dyn RngCore,
    ) -> Result<ActionKey> {
        (**self).pick(state, actions, rng)
    }
    fn record_step(
        &mut self,
        state: &StateKey,
        action: &ActionKey,
        next: Observation<'_, S>,
        next_actions: &ActionSet,
        reward: f64,
    ) {
        (**self).record_step(state, action, next, next_actions, reward)
    }
    fn process_episode(&mut self) {
        (**self).process_episode()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub episodes: usize,
    pub horizon: usize,
    pub seed: u64,
    pub time_budget: Option<Duration>,
}

impl RunConfig {
    /// A zero horizon is accepted (every episode is empty); zero episodes is not.
    pub fn new(episodes: usize, horizon: usize, seed: u64) -> Result<Self> {
        if episodes == 0 {
            return Err(Error::InvalidRun("episodes must be at least 1".into()));
        }
        Ok(Self {
            episodes,
            horizon,
            seed,
            time_budget: None,
        })
    }

    pub fn with_time_budget(mut self, budget: Duration) -> Self {
        self.time_budget = Some(budget);
        self
    }
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic sub-seed for item `index` (an episode, a trial) under `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    mix64(seed ^ mix64(index))
}

/// The generic RL loop: `K` episodes of at most `H` steps each.
///
/// Episode `k` draws agent randomness from an RNG seeded with
/// `derive_seed(config.seed, k)`. When `annotations` is given every step is
/// tagged with the active predicate before and after it (with one-time
/// latching); otherwise both tags are 1.
pub fn run_experiment<E, A>(
    env: &mut E,
    agent: &mut A,
    config: &RunConfig,
    annotations: Option<&PredicateSequence<E::Snapshot>>,
) -> Result<Vec<EpisodeRecord>>
where
    E: Environment,
    A: Agent<E::Snapshot> + ?Sized,
{
    let started = Instant::now();
    let mut records = Vec::with_capacity(config.episodes.min(1 << 16));
    let mut cumulative = 0u64;

    for k in 0..config.episodes {
        if let Some(budget) = config.time_budget {
            if started.elapsed() >= budget {
                log::info!("time budget exhausted after {k} episodes");
                break;
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, k as u64));

        let mut state = env.reset();
        let mut tracker = annotations.map(|seq| PredicateTracker::start(seq, env.snapshot()));
        let initial_active = tracker.map_or(1, |t| t.active());
        agent.new_episode(Observation {
            key: &state,
            snapshot: env.snapshot(),
        });

        let mut actions = action_set(env.actions());
        let mut steps = Vec::with_capacity(config.horizon.min(1024));
        let mut truncated = false;
        for _ in 0..config.horizon {
            if actions.is_empty() {
                truncated = true;
                break;
            }
            let action = agent.pick(
                Observation {
                    key: &state,
                    snapshot: env.snapshot(),
                },
                &actions,
                &mut rng,
            )?;
            let transition = env.step(&action)?;
            let next_actions = action_set(env.actions());
            let (active, next_active) = match (tracker.as_mut(), annotations) {
                (Some(t), Some(seq)) => t.advance(seq, env.snapshot()),
                _ => (1, 1),
            };
            agent.record_step(
                &state,
                &action,
                Observation {
                    key: &transition.state,
                    snapshot: env.snapshot(),
                },
                &next_actions,
                transition.reward,
            );
            steps.push(Step {
                state: std::mem::replace(&mut state, transition.state.clone()),
                action,
                next_state: transition.state,
                active,
                next_active,
                reward: transition.reward,
            });
            actions = next_actions;
        }
        agent.process_episode();

        cumulative += steps.len() as u64;
        let initial_state = steps.first().map_or(state, |s| s.state.clone());
        records.push(EpisodeRecord {
            index: k,
            initial_state,
            initial_active,
            steps,
            truncated,
            cumulative_timesteps: cumulative,
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{BonusMaxAgent, RandomAgent};

    /// Counter that moves forward or stays; terminal at `limit`.
    struct Line {
        pos: u32,
        limit: u32,
    }

    impl Environment for Line {
        type Snapshot = u32;
        fn reset(&mut self) -> StateKey {
            self.pos = 0;
            StateKey::new("0")
        }
        fn actions(&self) -> Vec<ActionKey> {
            if self.pos >= self.limit {
                vec![]
            } else {
                vec!["stay".into(), "fwd".into()]
            }
        }
        fn step(&mut self, action: &ActionKey) -> Result<Transition> {
            match action.as_str() {
                "fwd" if self.pos < self.limit => self.pos += 1,
                "stay" if self.pos < self.limit => {}
                _ => {
                    return Err(Error::DisabledAction {
                        state: self.pos.to_string(),
                        action: action.to_string(),
                    })
                }
            }
            Ok(Transition {
                state: StateKey::new(self.pos.to_string()),
                reward: 0.0,
            })
        }
        fn snapshot(&self) -> &u32 {
            &self.pos
        }
    }

    /// Counts every callback to check the loop contract.
    #[derive(Default)]
    struct Counting {
        new_episodes: usize,
        picks: usize,
        records: usize,
        processed: usize,
    }

    impl Agent<u32> for Counting {
        fn name(&self) -> &str {
            "counting"
        }
        fn new_episode(&mut self, _: Observation<'_, u32>) {
            self.new_episodes += 1;
        }
        fn pick(
            &mut self,
            _: Observation<'_, u32>,
            a: &ActionSet,
            _: &mut dyn RngCore,
        ) -> Result<ActionKey> {
            self.picks += 1;
            Ok(a[0].clone())
        }
        fn record_step(
            &mut self,
            _: &StateKey,
            _: &ActionKey,
            _: Observation<'_, u32>,
            _: &ActionSet,
            _: f64,
        ) {
            assert_eq!(self.records + 1, self.picks);
            self.records += 1;
        }
        fn process_episode(&mut self) {
            self.processed += 1;
        }
    }

    #[test]
    fn zero_horizon_still_processes() {
        let mut env = Line { pos: 0, limit: 10 };
        let mut agent = Counting::default();
        let records = run_experiment(
            &mut env,
            &mut agent,
            &RunConfig::new(1, 0, 3).unwrap(),
            None,
        )
        .unwrap();
        assert_eq!(records.len(), 1);
        assert!(records[0].steps.is_empty());
        assert_eq!(agent.processed, 1);
        assert_eq!(agent.new_episodes, 1);
    }

    #[test]
    fn loop_contract_and_early_termination() {
        let mut env = Line { pos: 0, limit: 3 };
        let mut agent = Counting::default();
        let config = RunConfig::new(4, 10, 0).unwrap();
        let records = run_experiment(&mut env, &mut agent, &config, None).unwrap();
        assert_eq!(agent.processed, 4);
        assert_eq!(agent.picks, agent.records);
        // "fwd" < "stay", so the first action is always fwd: 3 steps then stuck.
        for (k, r) in records.iter().enumerate() {
            assert_eq!(r.steps.len(), 3);
            assert!(r.truncated);
            assert_eq!(r.cumulative_timesteps, 3 * (k as u64 + 1));
            for w in r.steps.windows(2) {
                assert_eq!(w[0].next_state, w[1].state);
            }
            assert!(r.steps.iter().all(|s| s.active == 1 && s.next_active == 1));
        }
    }

    #[test]
    fn zero_episodes_rejected() {
        assert!(RunConfig::new(0, 5, 0).is_err());
    }

    #[test]
    fn disabled_action_is_an_error() {
        let mut env = Line { pos: 3, limit: 3 };
        assert!(matches!(
            env.step(&"fwd".into()),
            Err(Error::DisabledAction { .. })
        ));
    }

    #[test]
    fn same_seed_same_traces() {
        let config = RunConfig::new(20, 25, 99).unwrap();
        let run = || {
            let mut env = Line { pos: 0, limit: 100 };
            let mut agent = BonusMaxAgent::new(0.2, 0.95, 0.3);
            run_experiment(&mut env, &mut agent, &config, None).unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn random_episodes_use_distinct_subseeds() {
        let config = RunConfig::new(2, 25, 5).unwrap();
        let mut env = Line { pos: 0, limit: 100 };
        let mut agent = RandomAgent::new();
        let records = run_experiment(&mut env, &mut agent, &config, None).unwrap();
        assert_ne!(records[0].steps, records[1].steps);
    }

    #[test]
    fn time_budget_stops_early() {
        let config = RunConfig::new(1000, 5, 0)
            .unwrap()
            .with_time_budget(Duration::ZERO);
        let mut env = Line { pos: 0, limit: 100 };
        let records = run_experiment(&mut env, &mut RandomAgent::new(), &config, None).unwrap();
        assert!(records.is_empty());
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
        assert_ne!(derive_seed(1, 0), derive_seed(2, 0));
        assert_eq!(derive_seed(7, 3), derive_seed(7, 3));
    }
}
