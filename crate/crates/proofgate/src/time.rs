//! Logical time.
//!
//! All pipeline timestamps are integers supplied by an injected clock so
//! that runs are reproducible. One tick corresponds to one second in the
//! fixture vocabulary (a 5-minute validity window is 300 ticks).

use serde::{Deserialize, Serialize};
use std::fmt;

/// A logical timestamp.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct LogicalTime(pub u64);

impl LogicalTime {
    pub const ZERO: LogicalTime = LogicalTime(0);

    pub fn ticks(self) -> u64 {
        self.0
    }

    /// Saturating addition of a tick count.
    pub fn plus(self, ticks: u64) -> LogicalTime {
        LogicalTime(self.0.saturating_add(ticks))
    }

    /// Age of `earlier` as seen from `self`; zero if `earlier` is in the future.
    pub fn age_of(self, earlier: LogicalTime) -> u64 {
        self.0.saturating_sub(earlier.0)
    }
}

impl fmt::Display for LogicalTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}", self.0)
    }
}

/// Monotonic pipeline clock.
#[derive(Debug, Clone)]
pub struct LogicalClock {
    now: LogicalTime,
}

impl LogicalClock {
    pub fn starting_at(t: LogicalTime) -> Self {
        Self { now: t }
    }

    pub fn now(&self) -> LogicalTime {
        self.now
    }

    /// Advance by `ticks` and return the new time.
    pub fn advance(&mut self, ticks: u64) -> LogicalTime {
        self.now = self.now.plus(ticks);
        self.now
    }

    /// Jump forward to an absolute time; the clock never moves backwards.
    pub fn advance_to(&mut self, t: LogicalTime) -> LogicalTime {
        if t > self.now {
            self.now = t;
        }
        self.now
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clock_is_monotonic() {
        let mut clock = LogicalClock::starting_at(LogicalTime(10));
        clock.advance(5);
        assert_eq!(clock.now(), LogicalTime(15));
        clock.advance_to(LogicalTime(3));
        assert_eq!(clock.now(), LogicalTime(15), "clock must not move backwards");
    }

    #[test]
    fn age_saturates_at_zero() {
        assert_eq!(LogicalTime(5).age_of(LogicalTime(9)), 0);
        assert_eq!(LogicalTime(9).age_of(LogicalTime(5)), 4);
    }
}
