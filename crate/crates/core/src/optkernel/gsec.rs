//! Generalized subtour elimination cut separation.
//!
//! Given the support of a route solution (arc weights plus per-node visit
//! weights), every connected component that is cut off from the depot
//! witnesses a violated constraint of the form
//! sum of inner arcs of S <= sum of visits over S minus an anchor node.
//! For integral supports the component scan is an exact separator; for
//! fractional supports it still returns valid (if not maximally violated)
//! cuts.

use alloc::vec;
use alloc::vec::Vec;

const SUPPORT_EPS: f64 = 1e-6;

/// A violated cut: forbid the nodes of `subset` forming a cycle detached
/// from the depot. `anchor` is the member excluded from the visit sum
/// (chosen as the highest visit weight).
#[derive(Debug, Clone, PartialEq)]
pub struct GsecCut {
    pub subset: Vec<usize>,
    pub anchor: usize,
}

/// Scan the support graph for depot-disconnected components.
///
/// `edges` are (i, j, weight) with node 0 the depot; `visited[i]` is node
/// i's visit weight. One cut per component with at least two nodes is
/// returned, ordered by smallest member.
pub fn separate_gsec(edges: &[(usize, usize, f64)], visited: &[f64]) -> Vec<GsecCut> {
    let n = visited.len();
    if n == 0 {
        return Vec::new();
    }
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(i, j, w) in edges {
        if w > SUPPORT_EPS && i < n && j < n && i != j {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    let mut component = vec![usize::MAX; n];
    let mut next_id = 0;
    for start in 0..n {
        if component[start] != usize::MAX {
            continue;
        }
        let id = next_id;
        next_id += 1;
        component[start] = id;
        let mut queue = vec![start];
        while let Some(u) = queue.pop() {
            for &v in &adj[u] {
                if component[v] == usize::MAX {
                    component[v] = id;
                    queue.push(v);
                }
            }
        }
    }

    let depot_comp = component[0];
    let mut cuts = Vec::new();
    for id in 0..next_id {
        if id == depot_comp {
            continue;
        }
        let subset: Vec<usize> = (0..n).filter(|&v| component[v] == id).collect();
        if subset.len() < 2 {
            continue;
        }
        let anchor = subset
            .iter()
            .copied()
            .max_by(|&a, &b| visited[a].partial_cmp(&visited[b]).unwrap().then(b.cmp(&a)))
            .unwrap();
        cuts.push(GsecCut { subset, anchor });
    }
    cuts.sort_by_key(|c| c.subset[0]);
    cuts
}
