use std::fmt::Write as _;

use super::keys::{ActionKey, StateKey};
use crate::error::{Error, Result};

/// One transition with the active predicate before and after it (1-based).
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub state: StateKey,
    pub action: ActionKey,
    pub next_state: StateKey,
    pub active: usize,
    pub next_active: usize,
    pub reward: f64,
}

/// Outcome of one episode of [`run_experiment`](super::run_experiment).
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    pub index: usize,
    pub initial_state: StateKey,
    pub initial_active: usize,
    pub steps: Vec<Step>,
    /// The episode stopped before the horizon because no action was enabled.
    pub truncated: bool,
    /// Total steps taken up to and including this episode.
    pub cumulative_timesteps: u64,
}

impl EpisodeRecord {
    /// Visited states in order: the initial state then every next-state.
    pub fn visited(&self) -> impl Iterator<Item = (&StateKey, usize)> {
        std::iter::once((&self.initial_state, self.initial_active))
            .chain(self.steps.iter().map(|s| (&s.next_state, s.next_active)))
    }

    /// Tab-separated log line. With `trace`, the full step sequence follows the
    /// header fields and the line can be read back by [`Self::from_log_line`].
    pub fn to_log_line(&self, trace: bool) -> String {
        let mut line = format!(
            "episode\t{}\tsteps\t{}\ttruncated\t{}\tcumulative\t{}",
            self.index,
            self.steps.len(),
            u8::from(self.truncated),
            self.cumulative_timesteps
        );
        if trace {
            let _ = write!(
                line,
                "\tinit\t{}\t{}",
                escape(self.initial_state.as_str()),
                self.initial_active
            );
            for step in &self.steps {
                let _ = write!(
                    line,
                    "\tstep\t{}\t{}\t{}\t{}",
                    escape(step.action.as_str()),
                    escape(step.next_state.as_str()),
                    step.next_active,
                    step.reward
                );
            }
        }
        line
    }

    pub fn from_log_line(line: &str) -> Result<Self> {
        let mut fields = Fields(line.trim_end_matches(['\n', '\r']).split('\t'));
        let index = parse_num(fields.labelled("episode")?)?;
        let n_steps: usize = parse_num(fields.labelled("steps")?)?;
        let truncated = fields.labelled("truncated")? == "1";
        let cumulative_timesteps = parse_num(fields.labelled("cumulative")?)?;
        let initial_state = StateKey::from(unescape(fields.labelled("init")?)?);
        let initial_active = parse_num(fields.next("initial active")?)?;

        let mut steps = Vec::with_capacity(n_steps);
        let mut state = initial_state.clone();
        let mut active = initial_active;
        for _ in 0..n_steps {
            let action = ActionKey::from(unescape(fields.labelled("step")?)?);
            let next_state = StateKey::from(unescape(fields.next("next state")?)?);
            let next_active = parse_num(fields.next("next active")?)?;
            let reward = parse_num(fields.next("reward")?)?;
            steps.push(Step {
                state: std::mem::replace(&mut state, next_state.clone()),
                action,
                next_state,
                active,
                next_active,
                reward,
            });
            active = next_active;
        }
        if let Some(extra) = fields.0.next() {
            return Err(Error::Log(format!("trailing field `{extra}`")));
        }
        Ok(Self {
            index,
            initial_state,
            initial_active,
            steps,
            truncated,
            cumulative_timesteps,
        })
    }
}

struct Fields<'a>(std::str::Split<'a, char>);

impl<'a> Fields<'a> {
    fn next(&mut self, what: &str) -> Result<&'a str> {
        self.0
            .next()
            .ok_or_else(|| Error::Log(format!("missing {what}")))
    }

    /// A `label<TAB>value` pair; returns the value.
    fn labelled(&mut self, label: &str) -> Result<&'a str> {
        let got = self.next(label)?;
        if got != label {
            return Err(Error::Log(format!("expected `{label}`, found `{got}`")));
        }
        self.next(label)
    }
}

fn parse_num<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::Log(format!("`{s}` is not a number")))
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out
}

fn unescape(s: &str) -> Result<String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            other => return Err(Error::Log(format!("bad escape `\\{other:?}`"))),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn record(keys: &[String], actions: &[String]) -> EpisodeRecord {
        let steps = actions
            .iter()
            .enumerate()
            .map(|(i, a)| Step {
                state: StateKey::new(&keys[i]),
                action: ActionKey::new(a),
                next_state: StateKey::new(&keys[i + 1]),
                active: 1 + i % 2,
                next_active: 1 + (i + 1) % 2,
                reward: 0.0,
            })
            .collect();
        EpisodeRecord {
            index: 4,
            initial_state: StateKey::new(&keys[0]),
            initial_active: 1,
            steps,
            truncated: false,
            cumulative_timesteps: 40,
        }
    }

    #[test]
    fn header_only_line() {
        let r = record(&["a".into(), "b".into()], &["x".into()]);
        assert_eq!(
            r.to_log_line(false),
            "episode\t4\tsteps\t1\ttruncated\t0\tcumulative\t40"
        );
        assert!(EpisodeRecord::from_log_line(&r.to_log_line(false)).is_err());
    }

    proptest! {
        #[test]
        fn log_line_round_trips(
            keys in prop::collection::vec("[ -~\t\\\\]{0,12}", 1..8),
            seed in any::<u64>(),
        ) {
            let actions: Vec<String> = (1..keys.len()).map(|i| format!("a{}\t{}", i, seed % 7)).collect();
            let r = record(&keys, &actions);
            let back = EpisodeRecord::from_log_line(&r.to_log_line(true)).unwrap();
            prop_assert_eq!(back, r);
        }
    }
}
