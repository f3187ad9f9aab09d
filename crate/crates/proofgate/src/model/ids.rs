//! String newtypes for domain identifiers.

use serde::{Deserialize, Serialize};
use std::fmt;

macro_rules! string_id {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(
            Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
        )]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(s: impl Into<String>) -> Self {
                Self(s.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_string())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }
    };
}

string_id! {
    /// Unique identifier of a proposed intent; one evidence record exists per id.
    IntentId
}

string_id! {
    /// Identifier of a mutable resource (instance, service config, ...).
    ResourceId
}

string_id! {
    /// Canonical action-class name, e.g. `TerminateInstance`.
    ActionClass
}

string_id! {
    /// Identifier of a registered evaluator.
    EvaluatorId
}

string_id! {
    /// Identifier of a governance profile (low / high / protected / break_glass).
    ProfileId
}
