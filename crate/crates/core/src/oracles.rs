//! Brute-force reference implementations.
//!
//! These exist to check the exact kernels, never to be fast: straight
//! enumeration with none of the solvers' machinery. They are exercised by
//! the test suites and stay in the library so downstream verification
//! harnesses can call them without copying code.

use alloc::vec::Vec;

use crate::instance::TravelMatrix;
use crate::Time;

/// Practical input cap for the exhaustive routines below.
pub const ORACLE_MAX_NODES: usize = 10;

/// Minimum closed-tour length over the nodes by trying all permutations.
pub fn perm_tsp(travel: &TravelMatrix, nodes: &[usize]) -> u32 {
    fn go(travel: &TravelMatrix, remaining: &mut Vec<usize>, cur: usize, len: u32, best: &mut u32) {
        if remaining.is_empty() {
            *best = (*best).min(len + travel.at(cur, 0));
            return;
        }
        for i in 0..remaining.len() {
            let v = remaining.remove(i);
            go(travel, remaining, v, len + travel.at(cur, v), best);
            remaining.insert(i, v);
        }
    }
    if nodes.is_empty() {
        return 0;
    }
    debug_assert!(nodes.len() <= ORACLE_MAX_NODES);
    let mut best = u32::MAX;
    go(travel, &mut nodes.to_vec(), 0, 0, &mut best);
    best
}

/// Exhaustive orienteering value: the largest subset whose minimum tour
/// fits the budget.
pub fn enum_op(travel: &TravelMatrix, nodes: &[usize], budget: Time) -> u32 {
    let n = nodes.len();
    debug_assert!(n <= ORACLE_MAX_NODES);
    let mut best = 0u32;
    for mask in 0u32..(1 << n) {
        let subset: Vec<usize> = (0..n)
            .filter(|&i| mask & (1 << i) != 0)
            .map(|i| nodes[i])
            .collect();
        if subset.len() as u32 > best && (perm_tsp(travel, &subset) as Time) <= budget {
            best = subset.len() as u32;
        }
    }
    best
}

/// Exhaustive direct-trip count: try every selection vector against the
/// release-ordered suffix constraints.
pub fn enum_ub_trips(travel: &TravelMatrix, releases: &[(usize, Time)], t_end: Time) -> u32 {
    let mut items = releases.to_vec();
    items.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
    let n = items.len();
    debug_assert!(n <= ORACLE_MAX_NODES);
    let mut best = 0u32;
    'outer: for mask in 0u32..(1 << n) {
        for i in 0..n {
            let mut suffix = 0.0;
            for (j, item) in items.iter().enumerate().skip(i) {
                if mask & (1 << j) != 0 {
                    suffix += travel.roundtrip(item.0);
                }
            }
            let own = if mask & (1 << i) != 0 {
                items[i].1
            } else {
                0.0
            };
            if own + suffix > t_end {
                continue 'outer;
            }
        }
        best = best.max(mask.count_ones());
    }
    best
}

/// Result of [`enum_oprd`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumOprd {
    /// Best served count using at most the given number of trips.
    pub best_capped: u32,
    /// Best served count with unlimited trips.
    pub best_unlimited: u32,
    /// Maximum trip count over all feasible schedules.
    pub max_trips: u32,
}

/// Forward enumeration of the multi-trip problem: every subset of
/// customers, every ordered partition into trips, each trip at its minimum
/// tour length, scheduled forward as early as releases allow. Equivalent in
/// feasibility to the shifted back-to-back formulation.
pub fn enum_oprd(
    travel: &TravelMatrix,
    releases: &[(usize, Time)],
    t_end: Time,
    trip_cap: u32,
) -> EnumOprd {
    let n = releases.len();
    debug_assert!(n <= ORACLE_MAX_NODES);
    let mut tour_len = alloc::vec![0u32; 1 << n];
    let mut max_rel = alloc::vec![0.0f64; 1 << n];
    for mask in 1u32..(1 << n) {
        let subset: Vec<usize> = (0..n)
            .filter(|&i| mask & (1 << i) != 0)
            .map(|i| releases[i].0)
            .collect();
        tour_len[mask as usize] = perm_tsp(travel, &subset);
        max_rel[mask as usize] = (0..n)
            .filter(|&i| mask & (1 << i) != 0)
            .map(|i| releases[i].1)
            .fold(0.0, f64::max);
    }

    fn feasible(trips: &[u32], tour_len: &[u32], max_rel: &[f64], t_end: Time) -> bool {
        let mut clock = 0.0f64;
        for &t in trips {
            let depart = clock.max(max_rel[t as usize]);
            clock = depart + tour_len[t as usize] as Time;
        }
        clock <= t_end
    }

    #[allow(clippy::too_many_arguments)]
    fn go(
        remaining: u32,
        trips: &mut Vec<u32>,
        served: u32,
        tour_len: &[u32],
        max_rel: &[f64],
        t_end: Time,
        out: &mut EnumOprd,
        trip_cap: u32,
    ) {
        if feasible(trips, tour_len, max_rel, t_end) {
            out.max_trips = out.max_trips.max(trips.len() as u32);
            out.best_unlimited = out.best_unlimited.max(served);
            if trips.len() as u32 <= trip_cap {
                out.best_capped = out.best_capped.max(served);
            }
        } else {
            return; // more trips never repair an infeasible prefix
        }
        if remaining == 0 {
            return;
        }
        let mut sub = remaining;
        while sub != 0 {
            trips.push(sub);
            go(
                remaining & !sub,
                trips,
                served + sub.count_ones(),
                tour_len,
                max_rel,
                t_end,
                out,
                trip_cap,
            );
            trips.pop();
            sub = (sub - 1) & remaining;
        }
    }

    let mut out = EnumOprd {
        best_capped: 0,
        best_unlimited: 0,
        max_trips: 0,
    };
    go(
        ((1u64 << n) - 1) as u32,
        &mut Vec::new(),
        0,
        &tour_len,
        &max_rel,
        t_end,
        &mut out,
        trip_cap,
    );
    out
}
