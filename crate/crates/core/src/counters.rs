//! Per-trial instrumentation counters.
//!
//! A [`TrialCounters`] handle is created once per trial and cloned into every
//! component that performs collision checks or nearest-neighbor queries. Clones
//! share the same underlying counts; distinct trials never share a handle.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

#[derive(Debug, Default)]
struct Inner {
    collision_checks: AtomicU64,
    nn_lookups: AtomicU64,
}

/// Shared handle to the collision-check and nearest-neighbor counters of one trial.
#[derive(Debug, Clone, Default)]
pub struct TrialCounters {
    inner: Arc<Inner>,
}

/// Frozen copy of the counters at some instant.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterSnapshot {
    pub collision_checks: u64,
    pub nn_lookups: u64,
}

impl TrialCounters {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn record_collision_check(&self) {
        self.inner.collision_checks.fetch_add(1, Ordering::Relaxed);
    }

    #[inline]
    pub fn record_nn_lookup(&self) {
        self.inner.nn_lookups.fetch_add(1, Ordering::Relaxed);
    }

    pub fn collision_checks(&self) -> u64 {
        self.inner.collision_checks.load(Ordering::Relaxed)
    }

    pub fn nn_lookups(&self) -> u64 {
        self.inner.nn_lookups.load(Ordering::Relaxed)
    }

    pub fn snapshot(&self) -> CounterSnapshot {
        CounterSnapshot {
            collision_checks: self.collision_checks(),
            nn_lookups: self.nn_lookups(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clones_share_counts() {
        let a = TrialCounters::new();
        let b = a.clone();
        a.record_collision_check();
        b.record_collision_check();
        b.record_nn_lookup();
        assert_eq!(
            a.snapshot(),
            CounterSnapshot {
                collision_checks: 2,
                nn_lookups: 1
            }
        );
    }

    #[test]
    fn separate_trials_are_isolated() {
        let a = TrialCounters::new();
        let b = TrialCounters::new();
        a.record_nn_lookup();
        assert_eq!(b.nn_lookups(), 0);
    }
}
