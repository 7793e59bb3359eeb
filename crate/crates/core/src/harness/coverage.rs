use std::collections::HashSet;

use crate::mdp::{EpisodeRecord, StateKey};

/// `(cumulative_timestep, count)` samples, one per visited state.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CoverageSeries {
    pub points: Vec<(u64, usize)>,
}

impl CoverageSeries {
    pub fn final_count(&self) -> usize {
        self.points.last().map_or(0, |p| p.1)
    }
}

/// Distinct state keys seen so far, sampled at every visited state (the
/// initial state of each episode included).
pub fn unique_state_coverage(episodes: &[EpisodeRecord]) -> CoverageSeries {
    sampled(episodes, |_| true)
}

/// Distinct state keys annotated with predicate index `n`, i.e. states at or
/// after the target held (with latching) in their episode.
pub fn target_coverage(episodes: &[EpisodeRecord], n: usize) -> CoverageSeries {
    sampled(episodes, |active| active == n)
}

fn sampled(episodes: &[EpisodeRecord], keep: impl Fn(usize) -> bool) -> CoverageSeries {
    let mut seen: HashSet<&StateKey> = HashSet::new();
    let mut points = Vec::new();
    for ep in episodes {
        let start = ep.cumulative_timesteps - ep.steps.len() as u64;
        for (j, (key, active)) in ep.visited().enumerate() {
            if keep(active) {
                seen.insert(key);
            }
            points.push((start + j as u64, seen.len()));
        }
    }
    CoverageSeries { points }
}

/// One row of a `series_<agent>_<trial>.csv` file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeriesRow {
    pub episode: usize,
    pub cumulative_timesteps: u64,
    pub unique_states: usize,
    pub target_unique_states: usize,
}

/// Incremental per-episode coverage counter.
#[derive(Debug, Default)]
pub struct SeriesBuilder {
    unique: HashSet<StateKey>,
    target: HashSet<StateKey>,
    target_index: Option<usize>,
    rows: Vec<SeriesRow>,
}

impl SeriesBuilder {
    /// `target_index` is the annotation counted as target; `None` disables
    /// target coverage.
    pub fn new(target_index: Option<usize>) -> Self {
        Self {
            target_index,
            ..Self::default()
        }
    }

    pub fn push(&mut self, ep: &EpisodeRecord) {
        for (key, active) in ep.visited() {
            if !self.unique.contains(key) {
                self.unique.insert(key.clone());
            }
            if Some(active) == self.target_index && !self.target.contains(key) {
                self.target.insert(key.clone());
            }
        }
        self.rows.push(SeriesRow {
            episode: ep.index,
            cumulative_timesteps: ep.cumulative_timesteps,
            unique_states: self.unique.len(),
            target_unique_states: self.target.len(),
        });
    }

    pub fn unique_states(&self) -> usize {
        self.unique.len()
    }

    pub fn target_states(&self) -> usize {
        self.target.len()
    }

    pub fn rows(&self) -> &[SeriesRow] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<SeriesRow> {
        self.rows
    }
}

pub const SERIES_HEADER: &str =
    "trial,episode,cumulative_timesteps,unique_states,target_unique_states";

/// Every `stride`-th episode plus the last one.
pub fn series_csv(trial: usize, rows: &[SeriesRow], stride: usize) -> String {
    let mut out = String::from(SERIES_HEADER);
    out.push('\n');
    let last = rows.len().saturating_sub(1);
    for (i, r) in rows.iter().enumerate() {
        if i % stride == 0 || i == last {
            out.push_str(&format!(
                "{trial},{},{},{},{}\n",
                r.episode, r.cumulative_timesteps, r.unique_states, r.target_unique_states
            ));
        }
    }
    out
}
