//! Exact and heuristic closed tours.

use alloc::vec;
use alloc::vec::Vec;

use super::{route_duration, KernelError, Tour};
use crate::instance::TravelMatrix;

/// Hard cap for the subset dynamic programs (memory: 2^m * m * 4 bytes).
pub const MAX_TABLE_NODES: usize = 20;

/// Minimum-duration closed tour through the depot and the given nodes,
/// by Held-Karp dynamic programming. `cap` guards the exponential table.
pub fn solve_tsp(travel: &TravelMatrix, nodes: &[usize], cap: usize) -> Result<Tour, KernelError> {
    if nodes.is_empty() {
        return Err(KernelError::EmptyNodeSet);
    }
    let limit = cap.min(MAX_TABLE_NODES);
    if nodes.len() > limit {
        return Err(KernelError::TooLarge {
            limit,
            got: nodes.len(),
        });
    }
    let mut sorted: Vec<usize> = nodes.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    Ok(held_karp_tour(travel, &sorted))
}

/// Held-Karp with parent tracking; returns the optimal node sequence.
pub(crate) fn held_karp_tour(travel: &TravelMatrix, nodes: &[usize]) -> Tour {
    let m = nodes.len();
    debug_assert!((1..=MAX_TABLE_NODES).contains(&m));
    let full: u32 = if m == 32 { u32::MAX } else { (1 << m) - 1 };
    let mut dp = vec![u32::MAX; (full as usize + 1) * m];
    let mut parent = vec![u8::MAX; (full as usize + 1) * m];
    for i in 0..m {
        dp[(1usize << i) * m + i] = travel.at(0, nodes[i]);
    }
    for mask in 1..=full {
        for last in 0..m {
            if mask & (1 << last) == 0 {
                continue;
            }
            let cur = dp[mask as usize * m + last];
            if cur == u32::MAX {
                continue;
            }
            for next in 0..m {
                if mask & (1 << next) != 0 {
                    continue;
                }
                let nm = (mask | (1 << next)) as usize * m + next;
                let cand = cur + travel.at(nodes[last], nodes[next]);
                if cand < dp[nm] {
                    dp[nm] = cand;
                    parent[nm] = last as u8;
                }
            }
        }
    }
    let mut best_last = 0;
    let mut best = u32::MAX;
    for last in 0..m {
        let cur = dp[full as usize * m + last];
        if cur == u32::MAX {
            continue;
        }
        let closed = cur + travel.at(nodes[last], 0);
        if closed < best {
            best = closed;
            best_last = last;
        }
    }
    let mut order = Vec::with_capacity(m);
    let mut mask = full;
    let mut last = best_last;
    loop {
        order.push(nodes[last]);
        let p = parent[mask as usize * m + last];
        mask &= !(1 << last);
        if mask == 0 {
            break;
        }
        last = p as usize;
    }
    order.reverse();
    // Symmetric matrix: pick the orientation starting at the smaller node.
    if order.len() > 1 && order[0] > order[order.len() - 1] {
        order.reverse();
    }
    Tour {
        duration: best as f64,
        nodes: order,
    }
}

/// Nearest-neighbor construction followed by 2-opt to a local optimum.
/// Deterministic; used to certify "everything fits" fast and to seed
/// incumbents.
pub fn heuristic_tour(travel: &TravelMatrix, nodes: &[usize]) -> Tour {
    if nodes.is_empty() {
        return Tour::empty();
    }
    let mut remaining: Vec<usize> = nodes.to_vec();
    remaining.sort_unstable();
    let mut seq = Vec::with_capacity(remaining.len());
    let mut cur = 0usize;
    while !remaining.is_empty() {
        let mut pick = 0;
        for (i, &cand) in remaining.iter().enumerate() {
            if travel.at(cur, cand) < travel.at(cur, remaining[pick]) {
                pick = i;
            }
        }
        cur = remaining.remove(pick);
        seq.push(cur);
    }
    two_opt(travel, &mut seq);
    Tour {
        duration: route_duration(travel, &seq) as f64,
        nodes: seq,
    }
}

fn two_opt(travel: &TravelMatrix, seq: &mut [usize]) {
    let n = seq.len();
    if n < 3 {
        return;
    }
    let at = |seq: &[usize], i: isize| -> usize {
        if i < 0 || i as usize >= seq.len() {
            0
        } else {
            seq[i as usize]
        }
    };
    loop {
        let mut improved = false;
        for i in 0..n - 1 {
            for j in i + 1..n {
                let a = at(seq, i as isize - 1);
                let b = seq[i];
                let c = seq[j];
                let d = at(seq, j as isize + 1);
                let before = travel.at(a, b) + travel.at(c, d);
                let after = travel.at(a, c) + travel.at(b, d);
                if after < before {
                    seq[i..=j].reverse();
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
}

/// Closed-tour lengths for every subset of a node set, from one Held-Karp
/// pass. Bit i of a mask corresponds to `nodes()[i]`.
pub struct TourTable {
    nodes: Vec<usize>,
    lens: Vec<u32>,
    /// Per cardinality: (min closed length, smallest achieving mask).
    best_by_count: Vec<Option<(u32, u32)>>,
}

impl TourTable {
    /// `nodes` are deduplicated and sorted ascending before indexing.
    pub fn build(travel: &TravelMatrix, nodes: &[usize]) -> Result<Self, KernelError> {
        let mut sorted: Vec<usize> = nodes.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let m = sorted.len();
        if m > MAX_TABLE_NODES {
            return Err(KernelError::TooLarge {
                limit: MAX_TABLE_NODES,
                got: m,
            });
        }
        let size = 1usize << m;
        let mut lens = vec![0u32; size];
        if m > 0 {
            let full: u32 = (size - 1) as u32;
            let mut dp = vec![u32::MAX; size * m];
            for i in 0..m {
                dp[(1usize << i) * m + i] = travel.at(0, sorted[i]);
            }
            for mask in 1..=full {
                let base = mask as usize * m;
                let mut closed = u32::MAX;
                for last in 0..m {
                    if mask & (1 << last) == 0 {
                        continue;
                    }
                    let cur = dp[base + last];
                    if cur == u32::MAX {
                        continue;
                    }
                    closed = closed.min(cur + travel.at(sorted[last], 0));
                    for next in 0..m {
                        if mask & (1 << next) != 0 {
                            continue;
                        }
                        let nm = (mask | (1 << next)) as usize * m + next;
                        let cand = cur + travel.at(sorted[last], sorted[next]);
                        if cand < dp[nm] {
                            dp[nm] = cand;
                        }
                    }
                }
                lens[mask as usize] = closed;
            }
        }
        let mut best_by_count = vec![None; m + 1];
        best_by_count[0] = Some((0, 0));
        for mask in 1..size as u32 {
            let q = mask.count_ones() as usize;
            let len = lens[mask as usize];
            match best_by_count[q] {
                Some((b, _)) if b <= len => {}
                _ => best_by_count[q] = Some((len, mask)),
            }
        }
        Ok(Self {
            nodes: sorted,
            lens,
            best_by_count,
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    /// Minimum closed-tour length over the subset encoded by `mask`.
    pub fn len_of(&self, mask: u32) -> u32 {
        self.lens[mask as usize]
    }

    /// Cheapest subset of the given cardinality: (length, mask).
    pub fn best_of_count(&self, q: usize) -> Option<(u32, u32)> {
        self.best_by_count.get(q).copied().flatten()
    }

    /// Bit position of a matrix node, if present.
    pub fn bit_of(&self, node: usize) -> Option<usize> {
        self.nodes.binary_search(&node).ok()
    }

    pub fn mask_nodes(&self, mask: u32) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&i| mask & (1 << i) != 0)
            .map(|i| self.nodes[i])
            .collect()
    }

    /// Optimal sequencing of the subset (small second Held-Karp pass).
    pub fn tour_of(&self, travel: &TravelMatrix, mask: u32) -> Tour {
        if mask == 0 {
            return Tour::empty();
        }
        held_karp_tour(travel, &self.mask_nodes(mask))
    }
}
