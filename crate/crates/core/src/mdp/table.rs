use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use super::keys::{ActionKey, StateKey};

/// Lazily defaulted map from (state, action) to a real value.
#[derive(Debug, Clone)]
pub struct QTable {
    rows: HashMap<StateKey, HashMap<ActionKey, f64>>,
    default_value: f64,
}

impl QTable {
    pub fn new(default_value: f64) -> Self {
        Self {
            rows: HashMap::new(),
            default_value,
        }
    }

    pub fn default_value(&self) -> f64 {
        self.default_value
    }

    /// Stored value for `(state, action)`, or the default. Never inserts.
    pub fn get(&self, state: &StateKey, action: &ActionKey) -> f64 {
        self.rows
            .get(state)
            .and_then(|row| row.get(action))
            .copied()
            .unwrap_or(self.default_value)
    }

    pub fn set(&mut self, state: &StateKey, action: &ActionKey, value: f64) {
        debug_assert!(value.is_finite(), "non-finite Q value {value}");
        if let Some(row) = self.rows.get_mut(state) {
            if let Some(slot) = row.get_mut(action) {
                *slot = value;
            } else {
                row.insert(action.clone(), value);
            }
        } else {
            self.rows
                .entry(state.clone())
                .or_default()
                .insert(action.clone(), value);
        }
    }

    /// Maximum value over `actions` at `state`; `None` when `actions` is empty.
    pub fn max_over(&self, state: &StateKey, actions: &[ActionKey]) -> Option<f64> {
        let row = self.rows.get(state);
        actions
            .iter()
            .map(|a| {
                row.and_then(|r| r.get(a))
                    .copied()
                    .unwrap_or(self.default_value)
            })
            .reduce(f64::max)
    }

    /// Number of explicitly stored entries.
    pub fn len(&self) -> usize {
        self.rows.values().map(HashMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows.values().flat_map(|row| row.values().copied())
    }

    /// Sorted `state<TAB>action<TAB>value` dump, one entry per line.
    pub fn dump(&self) -> String {
        let sorted: BTreeMap<(&StateKey, &ActionKey), f64> = self
            .rows
            .iter()
            .flat_map(|(s, row)| row.iter().map(move |(a, v)| ((s, a), *v)))
            .collect();
        let mut out = String::new();
        for ((s, a), v) in sorted {
            let _ = writeln!(out, "{s}\t{a}\t{v}");
        }
        out
    }
}

/// Visit counts per (state, action).
#[derive(Debug, Clone, Default)]
pub struct VisitTable {
    rows: HashMap<StateKey, HashMap<ActionKey, u64>>,
}

impl VisitTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, state: &StateKey, action: &ActionKey) -> u64 {
        self.rows
            .get(state)
            .and_then(|row| row.get(action))
            .copied()
            .unwrap_or(0)
    }

    /// Increments the count and returns the new value.
    pub fn increment(&mut self, state: &StateKey, action: &ActionKey) -> u64 {
        let row = match self.rows.get_mut(state) {
            Some(row) => row,
            None => self.rows.entry(state.clone()).or_default(),
        };
        match row.get_mut(action) {
            Some(count) => {
                *count += 1;
                *count
            }
            None => {
                row.insert(action.clone(), 1);
                1
            }
        }
    }

    pub fn total(&self) -> u64 {
        self.rows.values().flat_map(HashMap::values).sum()
    }

    pub fn dump(&self) -> String {
        let sorted: BTreeMap<(&StateKey, &ActionKey), u64> = self
            .rows
            .iter()
            .flat_map(|(s, row)| row.iter().map(move |(a, v)| ((s, a), *v)))
            .collect();
        let mut out = String::new();
        for ((s, a), v) in sorted {
            let _ = writeln!(out, "{s}\t{a}\t{v}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_defaults_and_isolation() {
        let mut q = QTable::new(1.0);
        let s = StateKey::new("s");
        let a = ActionKey::new("a");
        let b = ActionKey::new("b");
        assert_eq!(q.get(&s, &a), 1.0);
        assert!(q.is_empty(), "lookup must not insert");
        q.set(&s, &a, 0.5);
        assert_eq!(q.get(&s, &a), 0.5);
        assert_eq!(q.get(&s, &b), 1.0);
        assert_eq!(q.len(), 1);
    }

    #[test]
    fn max_over_uses_defaults() {
        let mut q = QTable::new(1.0);
        let s = StateKey::new("s");
        let a = ActionKey::new("a");
        let b = ActionKey::new("b");
        q.set(&s, &a, 0.25);
        assert_eq!(q.max_over(&s, std::slice::from_ref(&a)), Some(0.25));
        assert_eq!(q.max_over(&s, &[a, b]), Some(1.0));
        assert_eq!(q.max_over(&s, &[]), None);
    }

    #[test]
    fn visits_count_up() {
        let mut v = VisitTable::new();
        let s = StateKey::new("s");
        let a = ActionKey::new("a");
        assert_eq!(v.increment(&s, &a), 1);
        assert_eq!(v.increment(&s, &a), 2);
        assert_eq!(v.get(&s, &a), 2);
        assert_eq!(v.total(), 2);
        assert_eq!(v.dump(), "s\ta\t2\n");
    }

    #[test]
    fn dump_is_sorted() {
        let mut q = QTable::new(0.0);
        q.set(&"z".into(), &"a".into(), 1.5);
        q.set(&"a".into(), &"b".into(), -2.0);
        q.set(&"a".into(), &"a".into(), 0.1);
        assert_eq!(q.dump(), "a\ta\t0.1\na\tb\t-2\nz\ta\t1.5\n");
    }
}
