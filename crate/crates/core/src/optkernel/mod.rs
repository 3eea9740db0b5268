//! Exact combinatorial kernels over the travel-time matrix.
//!
//! Everything here works in matrix node space: node 0 is the depot, nodes
//! 1..=n are customers. Callers that think in customer ids translate at the
//! boundary. All solvers are deterministic: fixed iteration orders, strict
//! improvement updates, integer arithmetic on tour lengths.

mod gsec;
mod op;
mod trips;
mod tsp;

pub use gsec::{separate_gsec, GsecCut};
pub use op::solve_op;
pub use trips::{solve_oprd_perfect, ub_trips, Trip, TripsResult};
pub use tsp::{heuristic_tour, solve_tsp, TourTable, MAX_TABLE_NODES};

use alloc::vec::Vec;

use crate::Time;

/// Closed route: depot, the listed nodes in order, depot again.
#[derive(Debug, Clone, PartialEq)]
pub struct Tour {
    /// Matrix node indices, depot implicit at both ends.
    pub nodes: Vec<usize>,
    pub duration: Time,
}

impl Tour {
    pub fn empty() -> Self {
        Tour {
            nodes: Vec::new(),
            duration: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    /// Search stopped early; `bound` is still a valid upper bound.
    IncumbentWithBound,
}

/// Result of a single-tour maximization (orienteering).
#[derive(Debug, Clone, PartialEq)]
pub struct OpResult {
    pub value: u32,
    pub tour: Tour,
    pub status: SolveStatus,
    pub bound: u32,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum KernelError {
    #[error("tour over an empty node set (represent waiting explicitly)")]
    EmptyNodeSet,
    #[error("exact solver limited to {limit} nodes, got {got}")]
    TooLarge { limit: usize, got: usize },
    #[error("warm-start schedule infeasible: {0}")]
    InvalidWarmStart(&'static str),
}

/// Exact tour length of a node sequence including both depot legs.
pub(crate) fn route_duration(travel: &crate::instance::TravelMatrix, nodes: &[usize]) -> u32 {
    if nodes.is_empty() {
        return 0;
    }
    let mut total = travel.at(0, nodes[0]);
    for w in nodes.windows(2) {
        total += travel.at(w[0], w[1]);
    }
    total + travel.at(nodes[nodes.len() - 1], 0)
}
