//! Std companion to the core library: instance files, Solomon loading,
//! wall-clock solver limits, and the benchmark harness.

pub mod formats;
pub mod harness;

use std::time::Instant;

use oprd_core::StopCheck;

/// Deterministic node budget combined with a wall-clock safety cap.
pub struct SolverLimit {
    remaining_nodes: u64,
    deadline: Option<Instant>,
}

impl SolverLimit {
    pub fn new(node_budget: u64, wall_seconds: Option<f64>) -> Self {
        Self {
            remaining_nodes: node_budget,
            deadline: wall_seconds.map(|s| Instant::now() + std::time::Duration::from_secs_f64(s)),
        }
    }
}

impl StopCheck for SolverLimit {
    fn should_stop(&mut self) -> bool {
        if self.remaining_nodes == 0 {
            return true;
        }
        self.remaining_nodes -= 1;
        // Polling the clock every node would dominate the search.
        if self.remaining_nodes.is_multiple_of(1024) {
            if let Some(d) = self.deadline {
                if Instant::now() >= d {
                    return true;
                }
            }
        }
        false
    }
}
