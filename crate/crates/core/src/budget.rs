//! Search limits shared by the explicit-state procedures.

use core::time::Duration;

/// Source of elapsed time. The core crate has no access to a system clock,
/// so callers that want wall-time limits supply one.
pub trait Clock {
    fn elapsed(&self) -> Duration;
}

/// A clock that never advances; wall-time limits are then never hit.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn elapsed(&self) -> Duration {
        Duration::ZERO
    }
}

/// Limits for a single explicit-state search.
#[derive(Clone, Copy)]
pub struct SearchLimits<'a> {
    /// Maximum number of stored nodes (configurations or markings).
    pub node_cap: usize,
    /// Optional wall-time limit, measured on `clock`.
    pub deadline: Option<(&'a dyn Clock, Duration)>,
}

impl core::fmt::Debug for SearchLimits<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("SearchLimits")
            .field("node_cap", &self.node_cap)
            .field("deadline", &self.deadline.map(|(_, d)| d))
            .finish()
    }
}

pub const DEFAULT_NODE_CAP: usize = 1_000_000;

impl Default for SearchLimits<'_> {
    fn default() -> Self {
        SearchLimits {
            node_cap: DEFAULT_NODE_CAP,
            deadline: None,
        }
    }
}

impl<'a> SearchLimits<'a> {
    pub fn with_node_cap(node_cap: usize) -> Self {
        SearchLimits {
            node_cap,
            deadline: None,
        }
    }

    pub fn expired(&self) -> bool {
        match self.deadline {
            Some((clock, limit)) => clock.elapsed() >= limit,
            None => false,
        }
    }
}
