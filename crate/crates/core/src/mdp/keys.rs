use std::borrow::Borrow;
use std::fmt;
use std::sync::Arc;

macro_rules! key_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(Arc<str>);

        impl $name {
            pub fn new(key: impl AsRef<str>) -> Self {
                Self(Arc::from(key.as_ref()))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(Arc::from(s))
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self::new(s)
            }
        }

        impl Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}({:?})", stringify!($name), &*self.0)
            }
        }
    };
}

key_type!(
    /// Canonical encoding of an (abstract) environment state. Environments are
    /// responsible for making equal states encode to identical strings.
    StateKey
);

key_type!(
    /// Canonical encoding of an action. Ordering of keys is the tie-break order
    /// used by greedy action selection.
    ActionKey
);

/// Enabled actions at a state, sorted by key and deduplicated.
pub type ActionSet = Arc<[ActionKey]>;

/// Sorts and deduplicates `actions` into an [`ActionSet`].
pub fn action_set(mut actions: Vec<ActionKey>) -> ActionSet {
    actions.sort_unstable();
    actions.dedup();
    actions.into()
}
