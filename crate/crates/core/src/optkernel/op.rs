//! Unit-prize orienteering: serve as many nodes as possible with one closed
//! tour of bounded duration.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::tsp::{heuristic_tour, TourTable, MAX_TABLE_NODES};
use super::{OpResult, SolveStatus, Tour};
use crate::instance::TravelMatrix;
use crate::Time;

/// Maximum-cardinality subset of `nodes` servable by one tour of duration
/// at most `budget`, together with such a tour. Exact.
///
/// Three stages: certify the everything-fits case with a heuristic tour,
/// run the all-subsets dynamic program when the set is small enough, and
/// otherwise fall back to a depth-first branch-and-bound over partial paths
/// with dominance pruning.
pub fn solve_op(travel: &TravelMatrix, nodes: &[usize], budget: Time) -> OpResult {
    let mut sorted: Vec<usize> = nodes.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let n = sorted.len();

    let done = |value: u32, tour: Tour| OpResult {
        value,
        tour,
        status: SolveStatus::Optimal,
        bound: value,
    };

    if n == 0 || budget <= 0.0 {
        return done(0, Tour::empty());
    }
    let heur = heuristic_tour(travel, &sorted);
    if heur.duration <= budget {
        return done(n as u32, heur);
    }
    if n <= MAX_TABLE_NODES {
        let table = TourTable::build(travel, &sorted).expect("within table cap");
        for q in (1..=n).rev() {
            let (len, mask) = table.best_of_count(q).expect("count in range");
            if (len as Time) <= budget {
                return done(q as u32, table.tour_of(travel, mask));
            }
        }
        return done(0, Tour::empty());
    }
    branch_and_bound(travel, &sorted, budget)
}

/// Exact search for sets beyond the subset-DP cap.
///
/// Labels are (visited mask, last node, path length); a label is dominated
/// when the same (mask, last) was reached no longer. The count bound uses
/// the cheapest incoming arc per node: any completion visiting k more nodes
/// costs at least the k smallest such arcs plus the depot's.
fn branch_and_bound(travel: &TravelMatrix, nodes: &[usize], budget: Time) -> OpResult {
    let n = nodes.len();
    debug_assert!(n <= 32);
    let budget = budget as u64;

    // Cheapest arc into each node from depot or any other node.
    let min_in: Vec<u32> = nodes
        .iter()
        .map(|&v| {
            let mut best = travel.at(0, v);
            for &u in nodes {
                if u != v {
                    best = best.min(travel.at(u, v));
                }
            }
            best
        })
        .collect();
    let min_in_depot = nodes.iter().map(|&v| travel.at(v, 0)).min().unwrap();

    // Greedy incumbent: extend nearest-feasible while the return leg fits.
    let mut best_count;
    let mut best_tour: Vec<usize> = Vec::new();
    {
        let mut len = 0u64;
        let mut cur = 0usize;
        let mut mask = 0u32;
        loop {
            let mut pick: Option<usize> = None;
            for (i, &v) in nodes.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    continue;
                }
                let cand = len + travel.at(cur, v) as u64 + travel.at(v, 0) as u64;
                if cand <= budget
                    && pick.is_none_or(|p| travel.at(cur, v) < travel.at(cur, nodes[p]))
                {
                    pick = Some(i);
                }
            }
            let Some(i) = pick else { break };
            len += travel.at(cur, nodes[i]) as u64;
            cur = nodes[i];
            mask |= 1 << i;
            best_tour.push(cur);
        }
        best_count = mask.count_ones();
    }

    let mut dominance: BTreeMap<(u32, u8), u64> = BTreeMap::new();
    // Stack of (mask, last bit or u8::MAX for depot, length).
    let mut stack: Vec<(u32, u8, u64)> = Vec::new();
    stack.push((0, u8::MAX, 0));
    let mut parents: BTreeMap<(u32, u8), (u32, u8)> = BTreeMap::new();

    // Sorted cheapest-arc list for the count bound.
    let mut order_min_in = min_in.clone();
    order_min_in.sort_unstable();

    while let Some((mask, last, len)) = stack.pop() {
        let count = mask.count_ones();
        // Count bound: how many more nodes could any completion add.
        let slack = budget.saturating_sub(len + min_in_depot as u64);
        let mut extra = 0u32;
        let mut acc = 0u64;
        for &c in &order_min_in {
            if extra >= (n as u32 - count) {
                break;
            }
            acc += c as u64;
            if acc > slack {
                break;
            }
            extra += 1;
        }
        if count + extra <= best_count && best_count > 0 {
            continue;
        }
        let cur_node = if last == u8::MAX {
            0
        } else {
            nodes[last as usize]
        };
        for i in 0..n {
            if mask & (1 << i) != 0 {
                continue;
            }
            let v = nodes[i];
            let step = len + travel.at(cur_node, v) as u64;
            if step + travel.at(v, 0) as u64 > budget {
                continue;
            }
            let nm = mask | (1 << i);
            let key = (nm, i as u8);
            match dominance.get(&key) {
                Some(&seen) if seen <= step => continue,
                _ => {}
            }
            dominance.insert(key, step);
            parents.insert(key, (mask, last));
            if nm.count_ones() > best_count {
                best_count = nm.count_ones();
                // Recover the path through the parent links.
                let mut path = Vec::new();
                let mut k = key;
                while k.1 != u8::MAX {
                    path.push(nodes[k.1 as usize]);
                    k = parents[&k];
                }
                path.reverse();
                best_tour = path;
                if best_count == n as u32 {
                    break;
                }
            }
            stack.push((nm, i as u8, step));
        }
        if best_count == n as u32 {
            break;
        }
    }

    let duration = super::route_duration(travel, &best_tour) as Time;
    OpResult {
        value: best_count,
        tour: Tour {
            nodes: best_tour,
            duration,
        },
        status: SolveStatus::Optimal,
        bound: best_count,
    }
}
