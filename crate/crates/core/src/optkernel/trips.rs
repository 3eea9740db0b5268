//! Multi-trip kernels under release dates and a common deadline: the
//! direct-trip upper bound and the exact perfect-information solver.
//!
//! Both exploit the same structural fact: waiting can be shifted to the
//! start of the day, so any feasible solution can be right-justified into
//! back-to-back trips whose last trip ends exactly at the deadline. The
//! exact solver therefore builds schedules backward from the deadline.

use alloc::collections::BTreeMap;
use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;

use super::tsp::TourTable;
use super::{route_duration, KernelError, SolveStatus, Tour};
use crate::instance::TravelMatrix;
use crate::{StopCheck, Time};

/// One vehicle trip with its departure time.
#[derive(Debug, Clone, PartialEq)]
pub struct Trip {
    pub depart: Time,
    pub tour: Tour,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TripsResult {
    pub value: u32,
    pub trips: Vec<Trip>,
    pub status: SolveStatus,
    /// Valid upper bound; equals `value` when status is Optimal.
    pub bound: u32,
}

/// Maximum number of direct (single-customer) trips performable by the
/// deadline, plus the right-justified schedule realizing it.
///
/// Customers are ordered by release date ascending (ties by node); choosing
/// customer i requires its release plus the round trips of every chosen
/// customer from i onward to fit before the deadline. Solved exactly by a
/// suffix dynamic program minimizing committed round-trip time per count.
pub fn ub_trips(travel: &TravelMatrix, releases: &[(usize, Time)], t_end: Time) -> TripsResult {
    let mut items: Vec<(usize, Time)> = releases.to_vec();
    items.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
    let n = items.len();
    let rt: Vec<u64> = items
        .iter()
        .map(|&(node, _)| travel.roundtrip(node) as u64)
        .collect();

    const INF: u64 = u64::MAX / 2;
    let mut dp = vec![INF; (n + 1) * (n + 1)];
    dp[n * (n + 1)] = 0;
    for i in (0..n).rev() {
        for c in 0..=(n - i) {
            let skip = dp[(i + 1) * (n + 1) + c];
            let mut best = skip;
            if c > 0 {
                let prev = dp[(i + 1) * (n + 1) + (c - 1)];
                if prev < INF && items[i].1 + (rt[i] + prev) as Time <= t_end {
                    best = best.min(prev + rt[i]);
                }
            }
            dp[i * (n + 1) + c] = best;
        }
    }
    let value = (0..=n).rev().find(|&c| dp[c] < INF).unwrap_or(0);

    // Walk the table forward to recover the selection.
    let mut selected = Vec::with_capacity(value);
    let (mut i, mut c) = (0usize, value);
    while c > 0 {
        if dp[i * (n + 1) + c] == dp[(i + 1) * (n + 1) + c] {
            i += 1;
        } else {
            selected.push(i);
            i += 1;
            c -= 1;
        }
    }
    // Right-justify: the last trip ends at the deadline.
    let mut trips = Vec::with_capacity(value);
    let mut end = t_end;
    for &idx in selected.iter().rev() {
        let (node, _) = items[idx];
        let dur = rt[idx] as Time;
        let depart = end - dur;
        trips.push(Trip {
            depart,
            tour: Tour {
                nodes: vec![node],
                duration: dur,
            },
        });
        end = depart;
    }
    trips.reverse();
    TripsResult {
        value: value as u32,
        trips,
        status: SolveStatus::Optimal,
        bound: value as u32,
    }
}

struct SearchNode {
    ub: u32,
    served: u32,
    arena: u32,
    remaining: u32,
    used_len: u64,
    trips: u32,
}

impl PartialEq for SearchNode {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == core::cmp::Ordering::Equal
    }
}
impl Eq for SearchNode {}
impl PartialOrd for SearchNode {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for SearchNode {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        // Max-heap: higher bound first, then more served, then older node.
        self.ub
            .cmp(&other.ub)
            .then(self.served.cmp(&other.served))
            .then(other.arena.cmp(&self.arena))
    }
}

/// Exact perfect-information optimum: maximum parcels deliverable in
/// [0, t_end] by at most `trip_bound` consecutive trips, each departing no
/// earlier than every release it serves.
///
/// Best-first branch-and-bound over backward trip construction. States are
/// (unserved set, committed duration); a state is dominated when the same
/// set was reached with no more trips and no more committed time. Stops
/// early when `stop` fires, returning the incumbent and a still-valid bound.
pub fn solve_oprd_perfect(
    travel: &TravelMatrix,
    releases: &[(usize, Time)],
    t_end: Time,
    trip_bound: u32,
    stop: &mut dyn StopCheck,
    warm: Option<&[Trip]>,
) -> Result<TripsResult, KernelError> {
    let n = releases.len();
    let optimal = |value: u32, trips: Vec<Trip>| TripsResult {
        value,
        trips,
        status: SolveStatus::Optimal,
        bound: value,
    };
    if n == 0 || trip_bound == 0 || t_end <= 0.0 {
        return Ok(optimal(0, Vec::new()));
    }
    let table = TourTable::build(
        travel,
        &releases.iter().map(|&(v, _)| v).collect::<Vec<_>>(),
    )?;
    let m = table.node_count();
    let full: u32 = ((1u64 << m) - 1) as u32;
    let mut rel = vec![0.0; m];
    for &(node, r) in releases {
        rel[table.bit_of(node).expect("node in table")] = r;
    }
    let rt: Vec<u64> = table
        .nodes()
        .iter()
        .map(|&v| travel.roundtrip(v) as u64)
        .collect();
    let min_in: Vec<u64> = table
        .nodes()
        .iter()
        .map(|&v| {
            let mut best = travel.at(0, v);
            for &u in table.nodes() {
                if u != v {
                    best = best.min(travel.at(u, v));
                }
            }
            best as u64
        })
        .collect();
    let min_return = table
        .nodes()
        .iter()
        .map(|&v| travel.at(v, 0) as u64)
        .min()
        .unwrap();

    let max_rel = |mask: u32| -> Time {
        let mut best: Time = 0.0;
        let mut bits = mask;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            best = best.max(rel[i]);
            bits &= bits - 1;
        }
        best
    };

    // Admissible count bound for a state with `remaining` and window tau:
    // every extra parcel costs at least its cheapest incoming arc, plus one
    // cheapest return leg overall.
    let count_bound = |remaining: u32, tau: Time, trips_left: u32| -> u32 {
        if tau <= 0.0 || trips_left == 0 {
            return 0;
        }
        let mut costs: Vec<u64> = Vec::new();
        let mut bits = remaining;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            if rel[i] + rt[i] as Time <= tau {
                costs.push(min_in[i]);
            }
            bits &= bits - 1;
        }
        costs.sort_unstable();
        let slack = tau - min_return as Time;
        let mut acc = 0u64;
        let mut count = 0u32;
        for c in costs {
            acc += c;
            if acc as Time > slack {
                break;
            }
            count += 1;
        }
        count
    };

    // Arena of committed trips for schedule reconstruction.
    // Entry: (parent, trip_mask, used_len_after_trip).
    let mut arena: Vec<(u32, u32, u64)> = vec![(0, 0, 0)];
    let mut incumbent: u32 = 0;
    let mut incumbent_arena: u32 = 0;

    // Seed from the warm start if provided.
    if let Some(schedule) = warm {
        let (count, _) = validate_warm_start(travel, schedule, &table, &rel, t_end)?;
        if schedule.len() as u32 > trip_bound {
            return Err(KernelError::InvalidWarmStart("more trips than the bound"));
        }
        if count > incumbent {
            // Rebuild the warm schedule inside the arena (temporal order
            // reversed: arena trips are recorded latest-first).
            let mut parent = 0u32;
            let mut used: u64 = 0;
            for trip in schedule.iter().rev() {
                let mask = trip
                    .tour
                    .nodes
                    .iter()
                    .map(|&v| 1u32 << table.bit_of(v).expect("warm node known"))
                    .fold(0u32, |a, b| a | b);
                used += route_duration(travel, &trip.tour.nodes) as u64;
                arena.push((parent, mask, used));
                parent = (arena.len() - 1) as u32;
            }
            incumbent = count;
            incumbent_arena = parent;
        }
    }

    // Greedy backward incumbent: grow the cheapest feasible trip, commit,
    // repeat. Cheap and surprisingly strong on clustered release dates.
    {
        let mut remaining = full;
        let mut used: u64 = 0;
        let mut parent = 0u32;
        let mut served = 0u32;
        let mut trips = 0u32;
        while remaining != 0 && trips < trip_bound {
            let tau = t_end - used as Time;
            let mut trip_mask = 0u32;
            loop {
                let mut best_add: Option<(u64, usize)> = None;
                let mut bits = remaining & !trip_mask;
                while bits != 0 {
                    let i = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    let cand = trip_mask | (1 << i);
                    let len = table.len_of(cand) as u64;
                    if (len as Time) <= tau - max_rel(cand) && best_add.is_none_or(|(l, _)| len < l)
                    {
                        best_add = Some((len, i));
                    }
                }
                match best_add {
                    Some((_, i)) => trip_mask |= 1 << i,
                    None => break,
                }
            }
            if trip_mask == 0 {
                break;
            }
            used += table.len_of(trip_mask) as u64;
            remaining &= !trip_mask;
            served += trip_mask.count_ones();
            trips += 1;
            arena.push((parent, trip_mask, used));
            parent = (arena.len() - 1) as u32;
        }
        if served > incumbent {
            incumbent = served;
            incumbent_arena = parent;
        }
    }

    let root_ub = count_bound(full, t_end, trip_bound).min(n as u32);
    let mut heap: BinaryHeap<SearchNode> = BinaryHeap::new();
    heap.push(SearchNode {
        ub: root_ub,
        served: 0,
        arena: 0,
        remaining: full,
        used_len: 0,
        trips: 0,
    });
    let mut dominance: BTreeMap<(u32, u32), u64> = BTreeMap::new();
    dominance.insert((full, 0), 0);

    let mut status = SolveStatus::Optimal;
    let mut bound = incumbent;

    while let Some(node) = heap.pop() {
        if node.ub <= incumbent {
            break; // everything open is no better than the incumbent
        }
        if stop.should_stop() {
            status = SolveStatus::IncumbentWithBound;
            bound = node.ub.max(incumbent);
            break;
        }
        if let Some(&seen) = dominance.get(&(node.remaining, node.trips)) {
            if seen < node.used_len {
                continue; // stale heap entry
            }
        }
        let tau = t_end - node.used_len as Time;
        if node.remaining == 0 {
            continue;
        }

        // If every remaining parcel fits one trip, this state is resolved.
        if node.trips < trip_bound {
            let all_len = table.len_of(node.remaining) as Time;
            if all_len <= tau - max_rel(node.remaining) {
                let served = node.served + node.remaining.count_ones();
                if served > incumbent {
                    arena.push((node.arena, node.remaining, node.used_len + all_len as u64));
                    incumbent = served;
                    incumbent_arena = (arena.len() - 1) as u32;
                }
                continue;
            }
        }

        if node.trips >= trip_bound {
            continue;
        }

        // Enumerate feasible next-backward trips: subsets grown in
        // ascending bit order so each set appears exactly once. Growing an
        // infeasible set never helps (length and max release both grow).
        let eligible: Vec<usize> = (0..m)
            .filter(|&i| node.remaining & (1 << i) != 0 && rel[i] + rt[i] as Time <= tau)
            .collect();
        let mut stack: Vec<(u32, usize)> = vec![(0u32, 0usize)];
        while let Some((trip_mask, from)) = stack.pop() {
            for (pos, &i) in eligible.iter().enumerate().skip(from) {
                let cand = trip_mask | (1 << i);
                let len = table.len_of(cand) as u64;
                if (len as Time) > tau - max_rel(cand) {
                    continue;
                }
                stack.push((cand, pos + 1));

                let remaining = node.remaining & !cand;
                let used_len = node.used_len + len;
                let trips = node.trips + 1;
                let served = node.served + cand.count_ones();
                match dominance.get(&(remaining, trips)) {
                    Some(&seen) if seen <= used_len => continue,
                    _ => {}
                }
                dominance.insert((remaining, trips), used_len);
                arena.push((node.arena, cand, used_len));
                let arena_idx = (arena.len() - 1) as u32;
                if served > incumbent {
                    incumbent = served;
                    incumbent_arena = arena_idx;
                }
                let ub =
                    served + count_bound(remaining, t_end - used_len as Time, trip_bound - trips);
                if ub > incumbent {
                    heap.push(SearchNode {
                        ub,
                        served,
                        arena: arena_idx,
                        remaining,
                        used_len,
                        trips,
                    });
                }
            }
        }
    }
    if status == SolveStatus::Optimal {
        bound = incumbent;
    }

    // Reconstruct the incumbent schedule from the arena chain.
    let mut chain = Vec::new();
    let mut idx = incumbent_arena;
    while idx != 0 {
        let (parent, mask, used_after) = arena[idx as usize];
        chain.push((mask, used_after));
        idx = parent;
    }
    // Chain is latest-trip-first; departures follow from committed time.
    let mut trips = Vec::with_capacity(chain.len());
    for &(mask, used_after) in &chain {
        let tour = table.tour_of(travel, mask);
        let depart = t_end - used_after as Time;
        trips.push(Trip { depart, tour });
    }
    trips.sort_by(|a, b| a.depart.partial_cmp(&b.depart).unwrap());

    Ok(TripsResult {
        value: incumbent,
        trips,
        status,
        bound,
    })
}

/// Check a proposed schedule against releases and the deadline after
/// right-justification; returns (served count, node mask).
fn validate_warm_start(
    travel: &TravelMatrix,
    schedule: &[Trip],
    table: &TourTable,
    rel: &[Time],
    t_end: Time,
) -> Result<(u32, u32), KernelError> {
    let mut seen = 0u32;
    let mut ordered: Vec<&Trip> = schedule.iter().collect();
    ordered.sort_by(|a, b| a.depart.partial_cmp(&b.depart).unwrap());
    let mut durs = Vec::with_capacity(ordered.len());
    for trip in &ordered {
        if trip.tour.nodes.is_empty() {
            return Err(KernelError::InvalidWarmStart("empty trip"));
        }
        let mut mask = 0u32;
        for &v in &trip.tour.nodes {
            let bit = table
                .bit_of(v)
                .ok_or(KernelError::InvalidWarmStart("unknown node"))?;
            mask |= 1 << bit;
        }
        if mask.count_ones() != trip.tour.nodes.len() as u32 || seen & mask != 0 {
            return Err(KernelError::InvalidWarmStart("node served twice"));
        }
        seen |= mask;
        durs.push((mask, route_duration(travel, &trip.tour.nodes) as u64));
    }
    let mut end = t_end;
    for &(mask, dur) in durs.iter().rev() {
        let start = end - dur as Time;
        let mut bits = mask;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            if rel[i] > start {
                return Err(KernelError::InvalidWarmStart("release after departure"));
            }
            bits &= bits - 1;
        }
        if start < 0.0 {
            return Err(KernelError::InvalidWarmStart("day starts before time 0"));
        }
        end = start;
    }
    Ok((seen.count_ones(), seen))
}
