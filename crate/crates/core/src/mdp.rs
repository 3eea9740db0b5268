//! The decision process: states, actions, transitions, and the simulation
//! loop.
//!
//! A decision epoch occurs when a parcel reaches the depot while the
//! vehicle is idle, when the vehicle returns from a route, or after a
//! maximum wait of `phi` time units. The policy then either waits or
//! dispatches a route over currently available parcels. No preemptive
//! return: parcels arriving mid-route accumulate until the vehicle is back.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_core::RngCore;
use serde::{Deserialize, Serialize};

use crate::instance::{CustomerId, Instance, TravelMatrix};
use crate::uncertainty::{update_estimates, Estimate, EstimateSet};
use crate::Time;

/// What a policy is allowed to see: everything except true release dates.
#[derive(Clone, Copy)]
pub struct ProblemView<'a> {
    pub travel: &'a TravelMatrix,
    pub deadline: Time,
    instance: &'a Instance,
}

impl<'a> ProblemView<'a> {
    pub fn new(instance: &'a Instance) -> Self {
        Self {
            travel: &instance.travel,
            deadline: instance.deadline,
            instance,
        }
    }

    pub fn node_of(&self, id: CustomerId) -> usize {
        self.instance.node_of(id)
    }

    pub fn id_of(&self, node: usize) -> CustomerId {
        self.instance.id_of(node)
    }

    pub fn coords_of(&self, id: CustomerId) -> (f64, f64) {
        let c = self.instance.customer(id);
        (c.x, c.y)
    }

    /// Exact duration of a route (depot legs included) in id space.
    pub fn route_duration(&self, route: &[CustomerId]) -> Time {
        if route.is_empty() {
            return 0.0;
        }
        let mut total = self.travel.time(0, self.node_of(route[0]));
        for w in route.windows(2) {
            total += self.travel.time(self.node_of(w[0]), self.node_of(w[1]));
        }
        total + self.travel.time(self.node_of(route[route.len() - 1]), 0)
    }
}

/// Observable decision-epoch information.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: Time,
    /// Parcels at the depot, ready to load.
    pub known: BTreeSet<CustomerId>,
    /// Release estimates for parcels still under way.
    pub unknown: EstimateSet,
    pub served: BTreeSet<CustomerId>,
    pub epoch: u32,
}

impl State {
    pub fn unserved_count(&self) -> usize {
        self.known.len() + self.unknown.len()
    }

    pub fn unserved_ids(&self) -> Vec<CustomerId> {
        self.known
            .iter()
            .copied()
            .chain(self.unknown.ids())
            .collect()
    }
}

/// Wait at the depot, or dispatch an ordered route over known parcels now.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Action {
    Wait,
    Dispatch(Vec<CustomerId>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionOutcome {
    pub next: State,
    /// Parcels delivered by this action.
    pub reward: u32,
    pub elapsed: Time,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MdpError {
    #[error("dispatch route is empty")]
    EmptyRoute,
    #[error("dispatch contains unavailable or duplicate customer {0}")]
    NotKnown(CustomerId),
    #[error("route returns at {ret} after the deadline {deadline}")]
    DeadlineViolated { ret: Time, deadline: Time },
    #[error("policy failed: {0}")]
    Policy(String),
}

/// First decision epoch: clock 0, parcels with release 0 already known.
pub fn initial_state(instance: &Instance) -> State {
    let mut known = BTreeSet::new();
    let mut entries = alloc::collections::BTreeMap::new();
    for c in &instance.customers {
        if c.true_release <= 0.0 {
            known.insert(c.id);
        } else {
            entries.insert(
                c.id,
                Estimate {
                    mean: c.estimate_mean,
                    std: c.estimate_std,
                },
            );
        }
    }
    State {
        t: 0.0,
        known,
        unknown: EstimateSet {
            as_of: 0.0,
            entries,
        },
        served: BTreeSet::new(),
        epoch: 0,
    }
}

/// Advance the world one epoch.
///
/// Dispatch: the clock moves by the exact route duration, served parcels
/// leave `known`, and everything released in (t_e, t_{e+1}] becomes known
/// (closed right end). Wait: the clock moves to the earlier of the next
/// arrival and t_e + phi, clamped to the deadline (terminal). Dynamic
/// estimates are refreshed to the new clock either way.
pub fn apply_action(
    instance: &Instance,
    state: &State,
    action: &Action,
    phi: Time,
    update_rate: f64,
) -> Result<TransitionOutcome, MdpError> {
    let deadline = instance.deadline;
    let (t_next, reward, route_set): (Time, u32, BTreeSet<CustomerId>) = match action {
        Action::Wait => {
            let next_arrival = state
                .unknown
                .ids()
                .map(|id| instance.customer(id).true_release)
                .fold(f64::INFINITY, f64::min);
            let t = (state.t + phi).min(next_arrival).min(deadline);
            (t, 0, BTreeSet::new())
        }
        Action::Dispatch(route) => {
            if route.is_empty() {
                return Err(MdpError::EmptyRoute);
            }
            let mut set = BTreeSet::new();
            for &id in route {
                if !state.known.contains(&id) || !set.insert(id) {
                    return Err(MdpError::NotKnown(id));
                }
            }
            let view = ProblemView::new(instance);
            let ret = state.t + view.route_duration(route);
            if ret > deadline {
                return Err(MdpError::DeadlineViolated { ret, deadline });
            }
            (ret, route.len() as u32, set)
        }
    };

    let mut known = &state.known - &route_set;
    let mut served = state.served.clone();
    served.extend(route_set.iter().copied());
    // Parcels released in (t_e, t_next] surface now, in id order.
    for id in state.unknown.ids() {
        if instance.customer(id).true_release <= t_next {
            known.insert(id);
        }
    }
    let unknown = update_estimates(instance, &state.unknown, t_next, update_rate);

    Ok(TransitionOutcome {
        next: State {
            t: t_next,
            known,
            unknown,
            served,
            epoch: state.epoch + 1,
        },
        reward,
        elapsed: t_next - state.t,
    })
}

/// Extra signals a policy can attach to a decision.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionInfo {
    /// The provably-optimal immediate-dispatch condition fired.
    pub pc_fired: bool,
}

/// A dispatch rule. `decide` must return a feasible action: route inside
/// `state.known`, return before the deadline.
pub trait Policy {
    fn id(&self) -> &str;
    fn decide(
        &mut self,
        view: &ProblemView<'_>,
        state: &State,
        rng: &mut dyn RngCore,
    ) -> Result<(Action, DecisionInfo), MdpError>;
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    /// Maximum waiting time between decision epochs.
    pub phi: Time,
    /// Interpolation rate for dynamic estimate updates.
    pub update_rate: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            phi: 10.0,
            update_rate: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStep {
    pub epoch: u32,
    pub t: Time,
    pub action: Action,
    pub reward: u32,
    /// Wall-clock milliseconds spent deciding (0 without a clock).
    pub decide_ms: u64,
    pub pc_fired: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub instance: String,
    pub policy: String,
    pub seed: u64,
    pub total_served: u32,
    pub final_time: Time,
    pub trajectory: Vec<TrajectoryStep>,
}

/// Run one full day under a policy. Deterministic given the seed (the
/// optional `clock` only feeds the decide_ms log column).
pub fn simulate(
    instance: &Instance,
    policy: &mut dyn Policy,
    seed: u64,
    config: &SimConfig,
    mut clock: Option<&mut dyn FnMut() -> u64>,
) -> Result<SimulationResult, MdpError> {
    let view = ProblemView::new(instance);
    // A labeled stream: scenario sampling never shares draws with
    // instance generation.
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x53CE_4A21_0000_0001);
    let mut state = initial_state(instance);
    let mut trajectory = Vec::new();
    let mut total = 0u32;

    while state.t < instance.deadline {
        // Nothing at the depot and nothing under way: the day is over.
        if state.known.is_empty() && state.unknown.is_empty() {
            break;
        }
        let started = clock.as_mut().map(|c| c());
        let (action, info) = policy.decide(&view, &state, &mut rng)?;
        let decide_ms = match (started, clock.as_mut()) {
            (Some(s), Some(c)) => c().saturating_sub(s),
            _ => 0,
        };
        let outcome = apply_action(instance, &state, &action, config.phi, config.update_rate)?;
        total += outcome.reward;
        trajectory.push(TrajectoryStep {
            epoch: state.epoch,
            t: state.t,
            action,
            reward: outcome.reward,
            decide_ms,
            pc_fired: info.pc_fired,
        });
        state = outcome.next;
    }

    debug_assert_eq!(total as usize, state.served.len());
    Ok(SimulationResult {
        instance: instance.label(),
        policy: String::from(policy.id()),
        seed,
        total_served: total,
        final_time: state.t,
        trajectory,
    })
}
