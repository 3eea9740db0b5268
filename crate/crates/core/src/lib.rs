//! Core library for same-day parcel dispatch with stochastic and dynamic
//! release dates.
//!
//! A single uncapacitated vehicle serves customers from a depot. Parcels
//! arrive at the depot over the day at uncertain times (release dates) and
//! everything must be back at the depot by a common deadline. The crate
//! provides:
//!
//! * [`instance`] — problem data: Solomon-layout parsing, seeded instance
//!   generation, integer travel-time matrices.
//! * [`uncertainty`] — release-date estimate tracking and Monte-Carlo
//!   scenario sampling.
//! * [`mdp`] — the decision process itself: states, actions, transitions,
//!   and the simulation loop.
//! * [`batch`] — the backward batch construction used to value future
//!   states, with its optimal-count formula and a brute-force oracle.
//! * [`optkernel`] — exact solvers: TSP, unit-prize orienteering, the
//!   direct-trip bound, and the perfect-information multi-trip problem.
//! * [`policies`] — the dispatch policies (two look-ahead policies built on
//!   scenario sampling plus two myopic baselines) and the provably-optimal
//!   immediate-dispatch check.
//! * [`oracles`] — brute-force reference implementations the test suites
//!   check the solvers against.
//!
//! The crate is `no_std` (with `alloc`); anything that touches files,
//! clocks, or threads lives in the companion CLI crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod batch;
pub mod instance;
pub mod mdp;
pub mod optkernel;
pub mod oracles;
pub mod policies;
pub mod uncertainty;

mod rng;

pub use rng::{sample_normal, uniform_01};

/// Time values (clock readings, durations, release dates) in problem units.
pub type Time = f64;

/// Deterministic stop condition for the exact solvers.
///
/// Wall-clock limits live in the std companion crate; the core solvers only
/// ever poll this trait. A node budget keeps results reproducible even when
/// a limit fires.
pub trait StopCheck {
    fn should_stop(&mut self) -> bool;
}

/// Never stops; solvers run to proven optimality.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoLimit;

impl StopCheck for NoLimit {
    fn should_stop(&mut self) -> bool {
        false
    }
}

/// Stops after a fixed number of polls. Polls happen once per search node,
/// so equal budgets give bit-identical results on every platform.
#[derive(Debug, Clone, Copy)]
pub struct NodeBudget {
    remaining: u64,
}

impl NodeBudget {
    pub fn new(nodes: u64) -> Self {
        Self { remaining: nodes }
    }
}

impl StopCheck for NodeBudget {
    fn should_stop(&mut self) -> bool {
        if self.remaining == 0 {
            return true;
        }
        self.remaining -= 1;
        false
    }
}
