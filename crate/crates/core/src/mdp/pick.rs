//! Action-selection primitives shared by the agents.

use rand::Rng;

use super::keys::ActionKey;
use crate::error::{Error, Result};

/// Action with the highest value; ties go to the lowest key.
pub fn greedy_pick(actions: &[ActionKey], value: impl Fn(&ActionKey) -> f64) -> Result<ActionKey> {
    let mut best: Option<(&ActionKey, f64)> = None;
    for action in actions {
        let v = value(action);
        best = match best {
            None => Some((action, v)),
            Some((b, bv)) if v > bv || (v == bv && action < b) => Some((action, v)),
            keep => keep,
        };
    }
    best.map(|(a, _)| a.clone()).ok_or(Error::NoEnabledActions)
}

/// How greedy selection resolves equal values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    /// Lowest action key wins.
    LowestKey,
    /// Uniform among the maximal actions, drawn from the episode RNG. Runs
    /// stay reproducible per seed.
    #[default]
    Random,
}

/// With probability `epsilon` a uniformly random action, otherwise the
/// greedy action with ties to the lowest key.
pub fn epsilon_greedy_pick<R: Rng + ?Sized>(
    actions: &[ActionKey],
    epsilon: f64,
    value: impl Fn(&ActionKey) -> f64,
    rng: &mut R,
) -> Result<ActionKey> {
    epsilon_greedy_pick_with(actions, epsilon, value, TieBreak::LowestKey, rng)
}

/// [`epsilon_greedy_pick`] with a choice of tie-breaking.
///
/// Always draws one uniform sample for the coin flip. A second draw happens
/// when exploring, or for [`TieBreak::Random`] when several actions tie. Agents
/// sharing this routine therefore consume the RNG identically.
pub fn epsilon_greedy_pick_with<R: Rng + ?Sized>(
    actions: &[ActionKey],
    epsilon: f64,
    value: impl Fn(&ActionKey) -> f64,
    tie_break: TieBreak,
    rng: &mut R,
) -> Result<ActionKey> {
    if actions.is_empty() {
        return Err(Error::NoEnabledActions);
    }
    let x: f64 = rng.gen();
    if x < epsilon {
        return uniform_pick(actions, rng);
    }
    match tie_break {
        TieBreak::LowestKey => greedy_pick(actions, value),
        TieBreak::Random => {
            let values: Vec<f64> = actions.iter().map(&value).collect();
            let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut best: Vec<&ActionKey> = actions
                .iter()
                .zip(&values)
                .filter(|(_, v)| **v == max)
                .map(|(a, _)| a)
                .collect();
            if best.len() == 1 {
                return Ok(best[0].clone());
            }
            // Independent of the order actions were listed in.
            best.sort();
            Ok(best[rng.gen_range(0..best.len())].clone())
        }
    }
}

pub fn uniform_pick<R: Rng + ?Sized>(actions: &[ActionKey], rng: &mut R) -> Result<ActionKey> {
    if actions.is_empty() {
        return Err(Error::NoEnabledActions);
    }
    Ok(actions[rng.gen_range(0..actions.len())].clone())
}

/// Samples `a` with probability `exp(Q(a)) / sum exp(Q(a'))`.
pub fn softmax_pick<R: Rng + ?Sized>(
    actions: &[ActionKey],
    value: impl Fn(&ActionKey) -> f64,
    rng: &mut R,
) -> Result<ActionKey> {
    if actions.is_empty() {
        return Err(Error::NoEnabledActions);
    }
    let values: Vec<f64> = actions.iter().map(&value).collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = values.iter().map(|v| (v - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    let mut x = rng.gen::<f64>() * total;
    for (action, w) in actions.iter().zip(&weights) {
        if x < *w {
            return Ok(action.clone());
        }
        x -= w;
    }
    // Rounding can leave x marginally above the last weight.
    let last = weights
        .iter()
        .rposition(|w| *w > 0.0)
        .unwrap_or(actions.len() - 1);
    Ok(actions[last].clone())
}
