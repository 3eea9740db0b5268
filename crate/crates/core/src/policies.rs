//! Dispatch policies.
//!
//! Two look-ahead policies share the same machinery: sample release-date
//! scenarios, build a batch plan per scenario, and trade the immediate
//! route's reward against discounted future batch capacity. The per-epoch
//! optimization is exact: with unit prizes, the objective for a route-0
//! choice depends only on its cardinality q and its minimum tour length
//! f(q) (batch executability is a prefix of the backward index and spare
//! filling is a count), and f comes from one subset dynamic program over
//! the known parcels.
//!
//! * `pfa`: solve each scenario separately, then vote on route-0 membership.
//! * `vfa`: one two-stage optimization whose second stage averages the
//!   scenarios.
//! * `me` / `mh`: dispatch-now baselines (exact orienteering / nearest
//!   neighbor).
//!
//! Both look-ahead policies first run the provably-optimal immediate
//! dispatch check (`pc_check`) and short-circuit when it fires.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use rand_core::RngCore;

use crate::batch::{bounding_box_area, build_batches, daganzo_duration, BatchPlan};
use crate::instance::CustomerId;
use crate::mdp::{Action, DecisionInfo, MdpError, Policy, ProblemView, State};
use crate::optkernel::{solve_op, solve_tsp, TourTable, MAX_TABLE_NODES};
use crate::uncertainty::{sample_scenarios, Scenario};
use crate::Time;

/// Objective values within this distance count as tied.
const VALUE_EPS: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct PolicyConfig {
    /// Capacity of a future batch route.
    pub rho: u32,
    /// Scenarios sampled per decision epoch.
    pub n_scenarios: usize,
    /// Discount on the future-reward term.
    pub gamma: f64,
    /// Maximum wait between decision epochs.
    pub phi: Time,
    /// Wall-clock caps in seconds, kept for the CLI surface; the exact
    /// per-epoch solves finish in microseconds at supported sizes, so they
    /// are safety nets rather than active controls.
    pub det_time_limit: f64,
    pub sto_time_limit: f64,
    pub myopic_time_limit: f64,
    /// Skip the dispatch check while known parcels are scarce and plenty of
    /// time remains.
    pub pc_known_frac: f64,
    pub pc_time_frac: f64,
    pub pc_enabled: bool,
    /// Exact-TSP size bound.
    pub exact_cap: usize,
    /// Fixed batch duration (tests); otherwise the continuous approximation
    /// over the unserved bounding box is used.
    pub t_d_override: Option<Time>,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self {
            rho: 15,
            n_scenarios: 30,
            gamma: 0.9,
            phi: 10.0,
            det_time_limit: 300.0,
            sto_time_limit: 600.0,
            myopic_time_limit: 600.0,
            pc_known_frac: 0.25,
            pc_time_frac: 0.75,
            pc_enabled: true,
            exact_cap: 18,
            t_d_override: None,
        }
    }
}

/// Batch usage chosen for one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchUsage {
    pub index: u32,
    pub executed: bool,
    /// Known parcels assigned to this batch's spare capacity.
    pub assigned_known: Vec<CustomerId>,
}

/// Optimal single-scenario decision: the immediate route plus planned
/// batch usage.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSolution {
    pub route0: BTreeSet<CustomerId>,
    pub objective: f64,
    pub batch_usage: Vec<BatchUsage>,
}

/// Per-epoch machinery shared by every scenario evaluation: the known
/// parcels in id order and the subset tour table over them.
pub struct EpochKit {
    known_ids: Vec<CustomerId>,
    nodes: Vec<usize>,
    table: TourTable,
    /// Table bit of the i-th known id (ids ascending).
    id_bits: Vec<u32>,
}

impl EpochKit {
    pub fn build(view: &ProblemView<'_>, state: &State) -> Result<Self, MdpError> {
        let known_ids: Vec<CustomerId> = state.known.iter().copied().collect();
        if known_ids.len() > MAX_TABLE_NODES {
            return Err(MdpError::Policy(alloc::format!(
                "{} known parcels exceed the exact dispatch bound {}",
                known_ids.len(),
                MAX_TABLE_NODES
            )));
        }
        let nodes: Vec<usize> = known_ids.iter().map(|&id| view.node_of(id)).collect();
        let table = TourTable::build(view.travel, &nodes)
            .map_err(|e| MdpError::Policy(alloc::format!("{e}")))?;
        // Table bit per known parcel, in ascending-id order; node order and
        // id order need not agree when the source file shuffles ids.
        let id_bits: Vec<u32> = nodes
            .iter()
            .map(|&node| 1u32 << table.bit_of(node).expect("node in table"))
            .collect();
        Ok(Self {
            known_ids,
            nodes,
            table,
            id_bits,
        })
    }

    fn n(&self) -> usize {
        self.known_ids.len()
    }

    /// Minimum closed-tour length over any q of the known parcels.
    fn min_len_of(&self, q: usize) -> Option<u32> {
        self.table.best_of_count(q).map(|(len, _)| len)
    }

    fn ids_of_mask(&self, mask: u32) -> BTreeSet<CustomerId> {
        self.table
            .mask_nodes(mask)
            .into_iter()
            .map(|node| {
                let pos = self.nodes.iter().position(|&v| v == node).expect("node");
                self.known_ids[pos]
            })
            .collect()
    }
}

/// Executable-prefix view of a batch plan: batch k is usable only when it
/// starts after route 0 returns, and usable batches form a prefix because
/// start times decrease with the backward index.
struct PlanIndex {
    tau_starts: Vec<Time>,
    cum_rho: Vec<u32>,
    cum_spare: Vec<u32>,
}

impl PlanIndex {
    fn build(plan: &BatchPlan, rho: u32) -> Self {
        let mut tau_starts = Vec::with_capacity(plan.batches.len());
        let mut cum_rho = Vec::with_capacity(plan.batches.len() + 1);
        let mut cum_spare = Vec::with_capacity(plan.batches.len() + 1);
        cum_rho.push(0);
        cum_spare.push(0);
        for b in &plan.batches {
            tau_starts.push(b.tau_start);
            cum_rho.push(cum_rho.last().unwrap() + b.rho_unknown);
            let spare = if plan.spare.contains(&b.index) {
                rho - b.rho_unknown
            } else {
                0
            };
            cum_spare.push(cum_spare.last().unwrap() + spare);
        }
        Self {
            tau_starts,
            cum_rho,
            cum_spare,
        }
    }

    /// Future value given route 0 ends at `tau_end` with `free` knowns left
    /// over: executed batch fill plus spare slots they can absorb.
    fn future(&self, tau_end: Time, free: u32) -> f64 {
        let mut p = 0;
        while p < self.tau_starts.len() && self.tau_starts[p] >= tau_end {
            p += 1;
        }
        (self.cum_rho[p] + free.min(self.cum_spare[p])) as f64
    }

    fn executable(&self, tau_end: Time) -> usize {
        let mut p = 0;
        while p < self.tau_starts.len() && self.tau_starts[p] >= tau_end {
            p += 1;
        }
        p
    }
}

/// Jointly optimal route-0 choice for a weighted scenario collection:
/// returns (subset mask over the kit's bits, objective value). Ties go to
/// the larger route, then the lexicographically smallest id set.
fn select_route0(
    kit: &EpochKit,
    plans: &[(f64, PlanIndex)],
    gamma: f64,
    t: Time,
    budget: Time,
) -> (u32, f64) {
    let n = kit.n();
    let value_at = |q: usize, len: u32| -> f64 {
        let tau_end = t + len as Time;
        let free = (n - q) as u32;
        let future: f64 = plans.iter().map(|(w, p)| w * p.future(tau_end, free)).sum();
        q as f64 + gamma * future
    };

    let mut best_q = 0usize;
    let mut best_value = value_at(0, 0);
    for q in 1..=n {
        let Some(len) = kit.min_len_of(q) else {
            continue;
        };
        if len as Time > budget {
            continue;
        }
        let value = value_at(q, len);
        if value > best_value - VALUE_EPS {
            best_q = q;
            best_value = best_value.max(value);
        }
    }
    if best_q == 0 {
        return (0, best_value);
    }
    // Among size-q* routes, accept the lexicographically smallest id set
    // whose own tour length still attains the optimum.
    let mask = first_combination(n, best_q, |positions| {
        let mask = positions.iter().fold(0u32, |m, &i| m | kit.id_bits[i]);
        let len = kit.table.len_of(mask);
        if (len as Time) <= budget && value_at(best_q, len) > best_value - VALUE_EPS {
            Some(mask)
        } else {
            None
        }
    })
    .expect("the optimal mask exists");
    (mask, best_value)
}

/// Enumerate q-element combinations of 0..n in lexicographic order (the
/// positions index ids ascending) and return the first accepted value.
fn first_combination(n: usize, q: usize, accept: impl Fn(&[usize]) -> Option<u32>) -> Option<u32> {
    debug_assert!(q >= 1 && q <= n);
    let mut idx: Vec<usize> = (0..q).collect();
    loop {
        if let Some(mask) = accept(&idx) {
            return Some(mask);
        }
        // Next combination.
        let mut i = q;
        loop {
            if i == 0 {
                return None;
            }
            i -= 1;
            if idx[i] != i + n - q {
                break;
            }
            if i == 0 {
                return None;
            }
        }
        idx[i] += 1;
        for j in i + 1..q {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Exact optimum of the single-scenario dispatch model: route 0 over known
/// parcels plus discounted batch usage for this scenario's plan.
pub fn det_ilp_solve(
    view: &ProblemView<'_>,
    state: &State,
    plan: &BatchPlan,
    config: &PolicyConfig,
    kit: &EpochKit,
) -> ScenarioSolution {
    let budget = view.deadline - state.t;
    let index = PlanIndex::build(plan, config.rho);
    let plans = [(1.0, index)];
    let (mask, objective) = select_route0(kit, &plans, config.gamma, state.t, budget);
    let route0 = kit.ids_of_mask(mask);

    // Reconstruct z and w for the chosen route.
    let tau_end = state.t + kit.table.len_of(mask) as Time;
    let executable = plans[0].1.executable(tau_end);
    let mut free: Vec<CustomerId> = kit
        .known_ids
        .iter()
        .copied()
        .filter(|id| !route0.contains(id))
        .collect();
    let mut batch_usage = Vec::with_capacity(plan.batches.len());
    for b in &plan.batches {
        let executed = (b.index as usize) <= executable;
        let mut assigned_known = Vec::new();
        if executed && plan.spare.contains(&b.index) {
            let cap = (config.rho - b.rho_unknown) as usize;
            let take = cap.min(free.len());
            assigned_known = free.drain(..take).collect();
        }
        batch_usage.push(BatchUsage {
            index: b.index,
            executed,
            assigned_known,
        });
    }

    ScenarioSolution {
        route0,
        objective,
        batch_usage,
    }
}

/// Vote on route-0 membership across scenario solutions: a parcel is
/// dispatched when at least half the scenarios dispatch it (inclusive).
/// The result is re-sequenced by an exact TSP; if votes from different
/// scenarios combine into a route that misses the deadline, the set is
/// repaired by an orienteering solve over the voted parcels.
pub fn consensus(
    solutions: &[ScenarioSolution],
    view: &ProblemView<'_>,
    state: &State,
    config: &PolicyConfig,
) -> Action {
    let total = solutions.len();
    debug_assert!(total >= 1);
    let mut voted: Vec<CustomerId> = state
        .known
        .iter()
        .copied()
        .filter(|id| {
            let votes = solutions.iter().filter(|s| s.route0.contains(id)).count();
            2 * votes >= total
        })
        .collect();
    voted.sort_unstable();
    if voted.is_empty() {
        return Action::Wait;
    }
    let budget = view.deadline - state.t;
    let nodes: Vec<usize> = voted.iter().map(|&id| view.node_of(id)).collect();
    if nodes.len() <= config.exact_cap {
        if let Ok(tour) = solve_tsp(view.travel, &nodes, config.exact_cap) {
            if tour.duration <= budget {
                return Action::Dispatch(tour.nodes.iter().map(|&v| view.id_of(v)).collect());
            }
        }
    }
    // Deadline repair: keep as many voted parcels as still fit.
    let op = solve_op(view.travel, &nodes, budget);
    if op.value == 0 {
        return Action::Wait;
    }
    Action::Dispatch(op.tour.nodes.iter().map(|&v| view.id_of(v)).collect())
}

/// Sufficient-optimality dispatch check.
///
/// When the orienteering optimum over all unserved parcels (release dates
/// ignored) is attainable using known parcels alone, dispatching that route
/// immediately is provably optimal. Skipped while known parcels are below
/// `pc_known_frac` of the unserved and more than `pc_time_frac` of the day
/// remains.
pub fn pc_check(view: &ProblemView<'_>, state: &State, config: &PolicyConfig) -> Option<Action> {
    if !config.pc_enabled || state.known.is_empty() {
        return None;
    }
    let budget = view.deadline - state.t;
    if budget <= 0.0 {
        return None;
    }
    let unserved = state.unserved_ids();
    if (state.known.len() as f64) < config.pc_known_frac * unserved.len() as f64
        && budget > config.pc_time_frac * view.deadline
    {
        return None;
    }
    let all_nodes: Vec<usize> = unserved.iter().map(|&id| view.node_of(id)).collect();
    let best_overall = solve_op(view.travel, &all_nodes, budget).value;
    if best_overall == 0 || best_overall as usize > state.known.len() {
        return None;
    }
    let known_nodes: Vec<usize> = state.known.iter().map(|&id| view.node_of(id)).collect();
    let op_known = solve_op(view.travel, &known_nodes, budget);
    if op_known.value == best_overall {
        return Some(Action::Dispatch(
            op_known.tour.nodes.iter().map(|&v| view.id_of(v)).collect(),
        ));
    }
    None
}

/// Batch duration for the epoch: the continuous approximation over the
/// bounding box of unserved customers, floored at the cheapest unserved
/// round trip so a batch can never be shorter than any real route.
pub fn epoch_batch_duration(view: &ProblemView<'_>, state: &State, config: &PolicyConfig) -> Time {
    if let Some(t_d) = config.t_d_override {
        return t_d;
    }
    let unserved = state.unserved_ids();
    let points: Vec<(f64, f64)> = unserved.iter().map(|&id| view.coords_of(id)).collect();
    let area = bounding_box_area(&points);
    let daganzo = daganzo_duration(area, config.rho).unwrap_or(0.0);
    let min_roundtrip = unserved
        .iter()
        .map(|&id| view.travel.roundtrip(view.node_of(id)))
        .fold(f64::INFINITY, f64::min);
    if min_roundtrip.is_finite() {
        daganzo.max(min_roundtrip)
    } else {
        daganzo.max(1.0)
    }
}

fn sample_epoch_scenarios(state: &State, count: usize, rng: &mut dyn RngCore) -> Vec<Scenario> {
    sample_scenarios(&state.unknown, state.t, count, rng)
}

/// Policy-function approximation: per-scenario exact solves followed by a
/// consensus vote.
pub fn pfa_decide(
    view: &ProblemView<'_>,
    state: &State,
    config: &PolicyConfig,
    rng: &mut dyn RngCore,
) -> Result<(Action, DecisionInfo), MdpError> {
    if let Some(action) = pc_check(view, state, config) {
        return Ok((action, DecisionInfo { pc_fired: true }));
    }
    let scenarios = sample_epoch_scenarios(state, config.n_scenarios, rng);
    if state.known.is_empty() {
        return Ok((Action::Wait, DecisionInfo::default()));
    }
    let kit = EpochKit::build(view, state)?;
    let t_d = epoch_batch_duration(view, state, config);
    let solutions: Vec<ScenarioSolution> = scenarios
        .iter()
        .map(|scenario| {
            let plan = build_batches(
                state.t,
                &state.known,
                &scenario.realized,
                view.deadline,
                config.rho,
                t_d,
            );
            det_ilp_solve(view, state, &plan, config, &kit)
        })
        .collect();
    Ok((
        consensus(&solutions, view, state, config),
        DecisionInfo::default(),
    ))
}

/// Value-function approximation: one two-stage optimization whose second
/// stage averages batch usage over all scenarios.
pub fn vfa_decide(
    view: &ProblemView<'_>,
    state: &State,
    config: &PolicyConfig,
    rng: &mut dyn RngCore,
) -> Result<(Action, DecisionInfo), MdpError> {
    if let Some(action) = pc_check(view, state, config) {
        return Ok((action, DecisionInfo { pc_fired: true }));
    }
    let scenarios = sample_epoch_scenarios(state, config.n_scenarios, rng);
    if state.known.is_empty() {
        return Ok((Action::Wait, DecisionInfo::default()));
    }
    let kit = EpochKit::build(view, state)?;
    let t_d = epoch_batch_duration(view, state, config);
    let plans: Vec<(f64, PlanIndex)> = scenarios
        .iter()
        .map(|scenario| {
            let plan = build_batches(
                state.t,
                &state.known,
                &scenario.realized,
                view.deadline,
                config.rho,
                t_d,
            );
            (scenario.probability, PlanIndex::build(&plan, config.rho))
        })
        .collect();
    let budget = view.deadline - state.t;
    let (mask, _) = select_route0(&kit, &plans, config.gamma, state.t, budget);
    if mask == 0 {
        return Ok((Action::Wait, DecisionInfo::default()));
    }
    let tour = kit.table.tour_of(view.travel, mask);
    Ok((
        Action::Dispatch(tour.nodes.iter().map(|&v| view.id_of(v)).collect()),
        DecisionInfo::default(),
    ))
}

/// Myopic exact baseline: serve every available parcel if a tour fits,
/// otherwise as many as an exact orienteering solve allows.
pub fn me_decide(view: &ProblemView<'_>, state: &State, config: &PolicyConfig) -> Action {
    if state.known.is_empty() {
        return Action::Wait;
    }
    let budget = view.deadline - state.t;
    let nodes: Vec<usize> = state.known.iter().map(|&id| view.node_of(id)).collect();
    if nodes.len() <= config.exact_cap {
        if let Ok(tour) = solve_tsp(view.travel, &nodes, config.exact_cap) {
            if tour.duration <= budget {
                return Action::Dispatch(tour.nodes.iter().map(|&v| view.id_of(v)).collect());
            }
        }
    }
    let op = solve_op(view.travel, &nodes, budget);
    if op.value == 0 {
        return Action::Wait;
    }
    Action::Dispatch(op.tour.nodes.iter().map(|&v| view.id_of(v)).collect())
}

/// Myopic heuristic baseline: repeatedly visit the nearest available
/// parcel (ties by id) while the extension plus the return leg still meets
/// the deadline.
pub fn mh_decide(view: &ProblemView<'_>, state: &State) -> Action {
    if state.known.is_empty() {
        return Action::Wait;
    }
    let budget = view.deadline - state.t;
    let mut remaining: Vec<CustomerId> = state.known.iter().copied().collect();
    let mut route = Vec::new();
    let mut len = 0.0;
    let mut cur = 0usize;
    while !remaining.is_empty() {
        let mut pick = 0;
        for (i, &id) in remaining.iter().enumerate() {
            let (di, dp) = (
                view.travel.at(cur, view.node_of(id)),
                view.travel.at(cur, view.node_of(remaining[pick])),
            );
            if di < dp || (di == dp && id < remaining[pick]) {
                pick = i;
            }
        }
        let id = remaining[pick];
        let node = view.node_of(id);
        let extended = len + view.travel.time(cur, node) + view.travel.time(node, 0);
        if extended > budget {
            break;
        }
        len += view.travel.time(cur, node);
        cur = node;
        route.push(id);
        remaining.remove(pick);
    }
    if route.is_empty() {
        Action::Wait
    } else {
        Action::Dispatch(route)
    }
}

/// Named policy wrappers for the simulation loop.
pub struct Pfa(pub PolicyConfig);
pub struct Vfa(pub PolicyConfig);
pub struct MyopicExact(pub PolicyConfig);
pub struct MyopicGreedy;

impl Policy for Pfa {
    fn id(&self) -> &str {
        "pfa"
    }
    fn decide(
        &mut self,
        view: &ProblemView<'_>,
        state: &State,
        rng: &mut dyn RngCore,
    ) -> Result<(Action, DecisionInfo), MdpError> {
        pfa_decide(view, state, &self.0, rng)
    }
}

impl Policy for Vfa {
    fn id(&self) -> &str {
        "vfa"
    }
    fn decide(
        &mut self,
        view: &ProblemView<'_>,
        state: &State,
        rng: &mut dyn RngCore,
    ) -> Result<(Action, DecisionInfo), MdpError> {
        vfa_decide(view, state, &self.0, rng)
    }
}

impl Policy for MyopicExact {
    fn id(&self) -> &str {
        "me"
    }
    fn decide(
        &mut self,
        view: &ProblemView<'_>,
        state: &State,
        _rng: &mut dyn RngCore,
    ) -> Result<(Action, DecisionInfo), MdpError> {
        Ok((me_decide(view, state, &self.0), DecisionInfo::default()))
    }
}

impl Policy for MyopicGreedy {
    fn id(&self) -> &str {
        "mh"
    }
    fn decide(
        &mut self,
        view: &ProblemView<'_>,
        state: &State,
        _rng: &mut dyn RngCore,
    ) -> Result<(Action, DecisionInfo), MdpError> {
        Ok((mh_decide(view, state), DecisionInfo::default()))
    }
}

/// Build a policy by its CLI name.
pub fn policy_by_name(name: &str, config: &PolicyConfig) -> Option<alloc::boxed::Box<dyn Policy>> {
    match name {
        "pfa" => Some(alloc::boxed::Box::new(Pfa(config.clone()))),
        "vfa" => Some(alloc::boxed::Box::new(Vfa(config.clone()))),
        "me" => Some(alloc::boxed::Box::new(MyopicExact(config.clone()))),
        "mh" => Some(alloc::boxed::Box::new(MyopicGreedy)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::initial_state;
    use crate::mdp::tests::make_instance;
    use alloc::collections::BTreeMap;
    use alloc::vec;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg() -> PolicyConfig {
        PolicyConfig {
            t_d_override: Some(2.0),
            rho: 2,
            n_scenarios: 1,
            ..PolicyConfig::default()
        }
    }

    #[test]
    fn det_example_dispatch_beats_waiting() {
        // Known {1} with round trip 2; unknown {2} released at 8; one batch
        // [8, 10] with one spare slot. Dispatching now scores 1.9 > 1.8.
        let inst = make_instance(&[(1.0, 0.0), (-1.0, 0.0)], &[0.0, 8.0], 10.0);
        let state = initial_state(&inst);
        let view = ProblemView::new(&inst);
        let kit = EpochKit::build(&view, &state).unwrap();
        let realized: BTreeMap<_, _> = [(CustomerId(2), 8.0)].into_iter().collect();
        let plan = build_batches(0.0, &state.known, &realized, 10.0, 2, 2.0);
        assert_eq!(plan.batches.len(), 1);
        assert_eq!(plan.batches[0].tau_start, 8.0);
        assert_eq!(plan.spare_capacity(2), 1);
        let sol = det_ilp_solve(&view, &state, &plan, &cfg(), &kit);
        assert_eq!(sol.route0, [CustomerId(1)].into_iter().collect());
        assert!((sol.objective - 1.9).abs() < 1e-12);
        assert!(sol.batch_usage[0].executed);
        assert!(sol.batch_usage[0].assigned_known.is_empty());
    }

    #[test]
    fn det_empty_known_waits_with_executable_batches() {
        let inst = make_instance(&[(1.0, 0.0), (-1.0, 0.0)], &[5.0, 8.0], 10.0);
        let state = initial_state(&inst);
        let view = ProblemView::new(&inst);
        let kit = EpochKit::build(&view, &state).unwrap();
        let realized: BTreeMap<_, _> = [(CustomerId(1), 5.0), (CustomerId(2), 8.0)]
            .into_iter()
            .collect();
        let plan = build_batches(0.0, &state.known, &realized, 10.0, 2, 2.0);
        let sol = det_ilp_solve(&view, &state, &plan, &cfg(), &kit);
        assert!(sol.route0.is_empty());
        let executed: u32 = plan
            .batches
            .iter()
            .zip(&sol.batch_usage)
            .filter(|(_, u)| u.executed)
            .map(|(b, _)| b.rho_unknown)
            .sum();
        assert!((sol.objective - 0.9 * executed as f64).abs() < 1e-12);
    }

    #[test]
    fn det_gamma_one_tie_prefers_dispatch() {
        // gamma = 1: serving now or via a spare slot tie; the larger route
        // wins.
        let inst = make_instance(&[(1.0, 0.0), (-1.0, 0.0)], &[0.0, 8.0], 20.0);
        let state = initial_state(&inst);
        let view = ProblemView::new(&inst);
        let kit = EpochKit::build(&view, &state).unwrap();
        let realized: BTreeMap<_, _> = [(CustomerId(2), 8.0)].into_iter().collect();
        let plan = build_batches(0.0, &state.known, &realized, 20.0, 2, 2.0);
        let mut c = cfg();
        c.gamma = 1.0;
        let sol = det_ilp_solve(&view, &state, &plan, &c, &kit);
        assert_eq!(sol.route0, [CustomerId(1)].into_iter().collect());
    }

    fn solution(ids: &[u32]) -> ScenarioSolution {
        ScenarioSolution {
            route0: ids.iter().map(|&i| CustomerId(i)).collect(),
            objective: 0.0,
            batch_usage: Vec::new(),
        }
    }

    #[test]
    fn consensus_majority_vote() {
        let inst = make_instance(
            &[(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0)],
            &[0.0, 0.0, 0.0],
            50.0,
        );
        let view = ProblemView::new(&inst);
        let state = initial_state(&inst);
        // Votes: a=3, b=2, c=1 over 4 scenarios; threshold 2.
        let sols = [
            solution(&[1, 2]),
            solution(&[1, 2]),
            solution(&[1]),
            solution(&[3]),
        ];
        match consensus(&sols, &view, &state, &cfg()) {
            Action::Dispatch(route) => {
                let set: BTreeSet<_> = route.into_iter().collect();
                assert_eq!(set, [CustomerId(1), CustomerId(2)].into_iter().collect());
            }
            Action::Wait => panic!("expected dispatch"),
        }
    }

    #[test]
    fn consensus_all_empty_waits() {
        let inst = make_instance(&[(1.0, 0.0)], &[0.0], 50.0);
        let view = ProblemView::new(&inst);
        let state = initial_state(&inst);
        let sols = [solution(&[]), solution(&[])];
        assert_eq!(consensus(&sols, &view, &state, &cfg()), Action::Wait);
    }

    #[test]
    fn consensus_inclusive_half() {
        let inst = make_instance(&[(1.0, 0.0), (-1.0, 0.0)], &[0.0, 0.0], 50.0);
        let view = ProblemView::new(&inst);
        let state = initial_state(&inst);
        // Two scenarios, each voting one parcel: both hit the inclusive
        // threshold of 1.
        let sols = [solution(&[1]), solution(&[2])];
        match consensus(&sols, &view, &state, &cfg()) {
            Action::Dispatch(route) => {
                let set: BTreeSet<_> = route.into_iter().collect();
                assert_eq!(set, [CustomerId(1), CustomerId(2)].into_iter().collect());
            }
            Action::Wait => panic!("expected dispatch"),
        }
    }

    #[test]
    fn pc_fires_when_no_uncertainty_left() {
        let inst = make_instance(&[(1.0, 0.0), (-1.0, 0.0)], &[0.0, 0.0], 50.0);
        let view = ProblemView::new(&inst);
        let state = initial_state(&inst);
        let action = pc_check(&view, &state, &cfg()).expect("fires");
        match action {
            Action::Dispatch(route) => assert_eq!(route.len(), 2),
            Action::Wait => panic!("expected dispatch"),
        }
    }

    #[test]
    fn pc_declines_when_future_could_beat_known() {
        // Known {1}, unknown {2}, both reachable within budget: the overall
        // optimum (2) exceeds |known| = 1.
        let inst = make_instance(&[(1.0, 0.0), (-1.0, 0.0)], &[0.0, 5.0], 10.0);
        let state = initial_state(&inst);
        let view = ProblemView::new(&inst);
        assert_eq!(pc_check(&view, &state, &cfg()), None);
    }

    #[test]
    fn pc_fires_when_unknown_unreachable() {
        // Known {1} (round trip 2) fits; unknown {2} (round trip 4) cannot
        // fit the budget of 2, so serving {1} attains the optimum.
        let inst = make_instance(&[(1.0, 0.0), (-2.0, 0.0)], &[0.0, 1.0], 2.0);
        let state = initial_state(&inst);
        let view = ProblemView::new(&inst);
        let action = pc_check(&view, &state, &cfg()).expect("fires");
        assert_eq!(action, Action::Dispatch(vec![CustomerId(1)]));
    }

    #[test]
    fn pc_skip_rule_suppresses_check() {
        // 1 known of 4 unserved (25% is not < 25%? use 1 of 5) and nearly
        // the whole day left: the check is skipped even though it would
        // fire on its own merits.
        let inst = make_instance(
            &[
                (1.0, 0.0),
                (-40.0, 0.0),
                (40.0, 0.0),
                (0.0, 40.0),
                (0.0, -40.0),
            ],
            &[0.0, 90.0, 90.0, 90.0, 90.0],
            100.0,
        );
        let state = initial_state(&inst);
        let view = ProblemView::new(&inst);
        assert_eq!(state.known.len(), 1);
        assert_eq!(pc_check(&view, &state, &cfg()), None);
    }

    #[test]
    fn me_examples() {
        let empty = make_instance(&[(1.0, 0.0)], &[5.0], 10.0);
        let view = ProblemView::new(&empty);
        assert_eq!(
            me_decide(&view, &initial_state(&empty), &cfg()),
            Action::Wait
        );

        // Two knowns within budget: both dispatched.
        let two = make_instance(&[(1.0, 0.0), (-1.0, 0.0)], &[0.0, 0.0], 10.0);
        let view = ProblemView::new(&two);
        match me_decide(&view, &initial_state(&two), &cfg()) {
            Action::Dispatch(route) => assert_eq!(route.len(), 2),
            Action::Wait => panic!("expected dispatch"),
        }

        // Three on a line, budget 4: exact orienteering keeps {1, 2}.
        let three = make_instance(&[(1.0, 0.0), (2.0, 0.0), (3.0, 0.0)], &[0.0; 3], 4.0);
        let view = ProblemView::new(&three);
        match me_decide(&view, &initial_state(&three), &cfg()) {
            Action::Dispatch(route) => {
                assert_eq!(route, vec![CustomerId(1), CustomerId(2)]);
            }
            Action::Wait => panic!("expected dispatch"),
        }
    }

    #[test]
    fn mh_examples() {
        let empty = make_instance(&[(1.0, 0.0)], &[5.0], 10.0);
        let view = ProblemView::new(&empty);
        assert_eq!(mh_decide(&view, &initial_state(&empty)), Action::Wait);

        // Customers at 1 and 3 on a line, budget 8: 0-1-3-0 lasts 6.
        let pair = make_instance(&[(1.0, 0.0), (3.0, 0.0)], &[0.0, 0.0], 8.0);
        let view = ProblemView::new(&pair);
        assert_eq!(
            mh_decide(&view, &initial_state(&pair)),
            Action::Dispatch(vec![CustomerId(1), CustomerId(2)])
        );

        // Customers at 1 and 5, budget 4: only the near one fits.
        let far = make_instance(&[(1.0, 0.0), (5.0, 0.0)], &[0.0, 0.0], 4.0);
        let view = ProblemView::new(&far);
        assert_eq!(
            mh_decide(&view, &initial_state(&far)),
            Action::Dispatch(vec![CustomerId(1)])
        );
    }

    #[test]
    fn pfa_single_scenario_matches_det_route() {
        let inst = make_instance(&[(1.0, 0.0), (-1.0, 0.0)], &[0.0, 8.0], 10.0);
        let state = initial_state(&inst);
        let view = ProblemView::new(&inst);
        let mut c = cfg();
        c.pc_enabled = false;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (action, info) = pfa_decide(&view, &state, &c, &mut rng).unwrap();
        assert!(!info.pc_fired);
        assert_eq!(action, Action::Dispatch(vec![CustomerId(1)]));
    }

    #[test]
    fn vfa_matches_pfa_with_one_scenario() {
        let inst = make_instance(
            &[(1.0, 0.0), (-1.0, 0.0), (0.0, 2.0), (2.0, 2.0)],
            &[0.0, 0.0, 9.0, 14.0],
            18.0,
        );
        let state = initial_state(&inst);
        let view = ProblemView::new(&inst);
        let mut c = cfg();
        c.pc_enabled = false;
        let mut rng_a = ChaCha8Rng::seed_from_u64(9);
        let mut rng_b = ChaCha8Rng::seed_from_u64(9);
        let (a, _) = pfa_decide(&view, &state, &c, &mut rng_a).unwrap();
        let (b, _) = vfa_decide(&view, &state, &c, &mut rng_b).unwrap();
        let set = |action: &Action| match action {
            Action::Wait => BTreeSet::new(),
            Action::Dispatch(r) => r.iter().copied().collect::<BTreeSet<_>>(),
        };
        assert_eq!(set(&a), set(&b));
    }

    #[test]
    fn vfa_empty_known_waits() {
        let inst = make_instance(&[(1.0, 0.0)], &[5.0], 10.0);
        let state = initial_state(&inst);
        let view = ProblemView::new(&inst);
        let mut c = cfg();
        c.pc_enabled = false;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (action, _) = vfa_decide(&view, &state, &c, &mut rng).unwrap();
        assert_eq!(action, Action::Wait);
    }

    #[test]
    fn tie_break_is_id_lexicographic_even_with_shuffled_nodes() {
        // Customers stored in non-id order: node 1 is id 3, node 2 is id 1.
        // Budget fits exactly one round trip; both choices tie in value, so
        // the smaller id must win.
        use crate::instance::{travel_matrix, Customer, GenerationParams, Instance, ReleaseMode};
        let customers = alloc::vec![
            Customer {
                id: CustomerId(3),
                x: -1.0,
                y: 0.0,
                true_release: 0.0,
                mode: ReleaseMode::AvailableAtStart,
                estimate_mean: 0.0,
                estimate_std: 0.0,
            },
            Customer {
                id: CustomerId(1),
                x: 1.0,
                y: 0.0,
                true_release: 0.0,
                mode: ReleaseMode::AvailableAtStart,
                estimate_mean: 0.0,
                estimate_std: 0.0,
            },
        ];
        let travel =
            travel_matrix((0.0, 0.0), &[(-1.0, 0.0), (1.0, 0.0)], Default::default()).unwrap();
        let inst = Instance {
            depot: (0.0, 0.0),
            customers,
            travel,
            deadline: 2.0,
            meta: GenerationParams {
                beta: 1.0,
                delta: 0.0,
                c: 1.0,
                seed: 0,
                t_standard: 0.0,
            },
        };
        let state = initial_state(&inst);
        let view = ProblemView::new(&inst);
        let kit = EpochKit::build(&view, &state).unwrap();
        let plan = BatchPlan::default();
        let sol = det_ilp_solve(&view, &state, &plan, &cfg(), &kit);
        assert_eq!(sol.route0, [CustomerId(1)].into_iter().collect());
    }

    #[test]
    fn fired_check_takes_precedence_over_scenarios() {
        // No uncertainty left: the dispatch check fires and both
        // look-ahead policies return its action untouched, flagged.
        let inst = make_instance(&[(1.0, 0.0), (-1.0, 0.0)], &[0.0, 0.0], 50.0);
        let state = initial_state(&inst);
        let view = ProblemView::new(&inst);
        let c = cfg();
        let expected = pc_check(&view, &state, &c).expect("fires");
        for decide in [pfa_decide, vfa_decide] {
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            let (action, info) = decide(&view, &state, &c, &mut rng).unwrap();
            assert!(info.pc_fired);
            assert_eq!(action, expected);
        }
    }

    #[test]
    fn pfa_votes_across_identical_scenarios() {
        // Four scenarios over a near-deterministic estimate all dispatch
        // the same parcel, so the vote is unanimous.
        let inst = make_instance(&[(1.0, 0.0), (-1.0, 0.0)], &[0.0, 8.0], 10.0);
        let mut state = initial_state(&inst);
        state.unknown.entries.get_mut(&CustomerId(2)).unwrap().std = 1e-9;
        let view = ProblemView::new(&inst);
        let mut c = cfg();
        c.pc_enabled = false;
        c.n_scenarios = 4;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let (action, _) = pfa_decide(&view, &state, &c, &mut rng).unwrap();
        assert_eq!(action, Action::Dispatch(vec![CustomerId(1)]));
    }
}
