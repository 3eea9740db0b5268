//! Backward batch construction for valuing future states.
//!
//! Future routes are approximated by fixed-duration, fixed-capacity batches
//! scheduled backward from the deadline: the last batch occupies
//! [T_E - T_D, T_E], the one before [T_E - 2 T_D, T_E - T_D], and so on.
//! Requests enter the latest batch whose start time their release date
//! allows; known requests (already at the depot) only claim capacity and
//! mark the batch as able to absorb them, their exact placement being left
//! to the dispatch optimization.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::instance::CustomerId;
use crate::Time;

/// One future route placeholder. `index` counts backward from the deadline:
/// batch 1 is the last route of the day.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub index: u32,
    pub tau_start: Time,
    pub tau_end: Time,
    /// Number of unknown requests assigned to this batch.
    pub rho_unknown: u32,
    pub assigned: BTreeSet<CustomerId>,
}

/// Output of the backward sweep.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BatchPlan {
    /// Batches in index order (1 = latest in time).
    pub batches: Vec<Batch>,
    /// Indices of batches with spare capacity for known requests.
    pub spare: BTreeSet<u32>,
    /// Batch index per unknown request; 0 means no batch can hold it.
    pub assignment: BTreeMap<CustomerId, u32>,
}

impl BatchPlan {
    /// Unknown requests that made it into some batch.
    pub fn assigned_unknown_count(&self) -> u32 {
        self.batches.iter().map(|b| b.rho_unknown).sum()
    }

    /// Total spare capacity over the spare batches.
    pub fn spare_capacity(&self, rho: u32) -> u32 {
        self.spare
            .iter()
            .map(|&k| rho - self.batches[(k - 1) as usize].rho_unknown)
            .sum()
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum BatchError {
    #[error("area must be nonnegative, got {0}")]
    NegativeArea(f64),
    #[error("exhaustive oracle limited to {limit} requests, got {got}")]
    OracleTooLarge { limit: usize, got: usize },
}

/// Expected tour duration for a route of `rho` stops scattered uniformly
/// over a region of the given area: 0.75 * sqrt(area * rho).
pub fn daganzo_duration(area: f64, rho: u32) -> Result<Time, BatchError> {
    debug_assert!(rho >= 1);
    if area < 0.0 {
        return Err(BatchError::NegativeArea(area));
    }
    Ok(0.75 * libm::sqrt(area * rho as f64))
}

/// Area of the axis-aligned bounding box of a point set.
pub fn bounding_box_area(points: &[(f64, f64)]) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let (mut min_x, mut max_x) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut min_y, mut max_y) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in points {
        min_x = min_x.min(x);
        max_x = max_x.max(x);
        min_y = min_y.min(y);
        max_y = max_y.max(y);
    }
    (max_x - min_x) * (max_y - min_y)
}

/// Backward batch sweep.
///
/// All unserved requests are sorted by release date ascending (knowns count
/// as release 0; ties by id) and consumed from the latest release down. A
/// request enters the current batch when its release is at most the batch
/// start `T_E - k * T_D`; known requests claim a capacity slot without a
/// fixed assignment. A batch closes at `rho` entries or when the input is
/// exhausted; the sweep stops once the next batch would start at or before
/// `t_e`. Unknown requests that never fit keep assignment 0.
pub fn build_batches(
    t_e: Time,
    known: &BTreeSet<CustomerId>,
    realized: &BTreeMap<CustomerId, Time>,
    t_end: Time,
    rho: u32,
    t_d: Time,
) -> BatchPlan {
    debug_assert!(t_d > 0.0, "batch duration must be positive");
    debug_assert!(rho >= 1);

    let mut items: Vec<(Time, CustomerId, bool)> = known
        .iter()
        .map(|&id| (0.0, id, true))
        .chain(realized.iter().map(|(&id, &r)| (r, id, false)))
        .collect();
    items.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));

    let mut assignment: BTreeMap<CustomerId, u32> = realized.keys().map(|&id| (id, 0)).collect();
    let mut batches: Vec<Batch> = Vec::new();
    let mut k: u32 = 1;
    let mut t_k = t_end - t_d;
    let mut fill: u32 = 0;
    let mut cur_rho: u32 = 0;
    let mut cur_assigned: BTreeSet<CustomerId> = BTreeSet::new();

    for pos in (0..items.len()).rev() {
        if t_k <= t_e {
            break;
        }
        let (release, id, is_known) = items[pos];
        if release <= t_k {
            if is_known {
                // Spare capacity is derived from fill counts after the sweep.
            } else {
                assignment.insert(id, k);
                cur_rho += 1;
                cur_assigned.insert(id);
            }
            fill += 1;
            if fill == rho || pos == 0 {
                batches.push(Batch {
                    index: k,
                    tau_start: t_k,
                    tau_end: t_k + t_d,
                    rho_unknown: cur_rho,
                    assigned: core::mem::take(&mut cur_assigned),
                });
                k += 1;
                t_k -= t_d;
                fill = 0;
                cur_rho = 0;
            }
        }
    }
    // A batch holding assignments always closes: within one batch t_k is
    // fixed, so once any request fits, all later (smaller-release) ones do.
    debug_assert!(cur_assigned.is_empty());

    let spare = batches
        .iter()
        .filter(|b| b.rho_unknown < rho)
        .map(|b| b.index)
        .collect();

    BatchPlan {
        batches,
        spare,
        assignment,
    }
}

/// Maximum number of requests servable per the batch structure: all knowns
/// fit whenever their count is below the total spare capacity, otherwise
/// every batch saturates.
pub fn opt_count(known_count: u32, plan: &BatchPlan, rho: u32) -> u32 {
    let spare = plan.spare_capacity(rho);
    if known_count < spare {
        known_count + plan.assigned_unknown_count()
    } else {
        plan.batches.len() as u32 * rho
    }
}

const ORACLE_LIMIT: usize = 12;

/// Exact maximum served count by exhaustive enumeration.
///
/// Independent oracle for [`opt_count`]: tries every subset of requests and
/// checks feasibility against back-to-back fixed-duration slots ending at
/// `t_end` (slot j starts at `t_end - j * t_d`, capacity `rho`, start must
/// exceed `t_e`), filling slots latest-first with releases sorted
/// descending.
pub fn brute_force_max_served(
    t_e: Time,
    releases: &[(CustomerId, Time)],
    t_end: Time,
    rho: u32,
    t_d: Time,
) -> Result<u32, BatchError> {
    let n = releases.len();
    if n > ORACLE_LIMIT {
        return Err(BatchError::OracleTooLarge {
            limit: ORACLE_LIMIT,
            got: n,
        });
    }
    let slot_start = |j: u32| t_end - j as f64 * t_d;

    let feasible = |mask: u32| -> bool {
        let mut rs: Vec<Time> = (0..n)
            .filter(|&i| mask & (1 << i) != 0)
            .map(|i| releases[i].1)
            .collect();
        rs.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let mut j = 1u32;
        let mut used = 0u32;
        for r in rs {
            if used == rho {
                j += 1;
                used = 0;
            }
            if slot_start(j) <= t_e || r > slot_start(j) {
                return false;
            }
            used += 1;
        }
        true
    };

    let mut best = 0u32;
    for mask in 0..(1u32 << n) {
        let count = mask.count_ones();
        if count > best && feasible(mask) {
            best = count;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn id(v: u32) -> CustomerId {
        CustomerId(v)
    }

    /// The worked 8-request example: knowns {1,2,3}, unknowns released at
    /// {14,14,15,15,15}, rho 3, T_D 1, deadline 16.
    fn toy_plan(t_e: Time) -> BatchPlan {
        let known: BTreeSet<_> = [id(1), id(2), id(3)].into_iter().collect();
        let realized: BTreeMap<_, _> = [
            (id(4), 14.0),
            (id(5), 14.0),
            (id(6), 15.0),
            (id(7), 15.0),
            (id(8), 15.0),
        ]
        .into_iter()
        .collect();
        build_batches(t_e, &known, &realized, 16.0, 3, 1.0)
    }

    #[test]
    fn toy_example_structure() {
        let plan = toy_plan(10.0);
        assert_eq!(plan.batches.len(), 3);
        let starts: Vec<f64> = plan.batches.iter().map(|b| b.tau_start).collect();
        assert_eq!(starts, vec![15.0, 14.0, 13.0]);
        let ends: Vec<f64> = plan.batches.iter().map(|b| b.tau_end).collect();
        assert_eq!(ends, vec![16.0, 15.0, 14.0]);
        assert_eq!(plan.assignment[&id(4)], 2);
        assert_eq!(plan.assignment[&id(5)], 2);
        assert_eq!(plan.assignment[&id(6)], 1);
        assert_eq!(plan.assignment[&id(7)], 1);
        assert_eq!(plan.assignment[&id(8)], 1);
        let rho: Vec<u32> = plan.batches.iter().map(|b| b.rho_unknown).collect();
        assert_eq!(rho, vec![3, 2, 0]);
        assert_eq!(plan.spare, [2u32, 3].into_iter().collect());
    }

    #[test]
    fn toy_example_opt_count() {
        let plan = toy_plan(10.0);
        // spare = 1 + 3 = 4 > 3 knowns -> 3 + 5.
        assert_eq!(opt_count(3, &plan, 3), 8);
    }

    #[test]
    fn empty_input_empty_plan() {
        let plan = build_batches(0.0, &BTreeSet::new(), &BTreeMap::new(), 16.0, 3, 1.0);
        assert!(plan.batches.is_empty());
        assert!(plan.spare.is_empty());
        assert_eq!(opt_count(0, &plan, 3), 0);
    }

    #[test]
    fn late_release_is_unassigned() {
        let realized: BTreeMap<_, _> = [(id(1), 15.5)].into_iter().collect();
        let plan = build_batches(0.0, &BTreeSet::new(), &realized, 16.0, 3, 1.0);
        assert_eq!(plan.assignment[&id(1)], 0);
        assert!(plan.batches.is_empty());
    }

    #[test]
    fn saturated_case_counts_full_batches() {
        // |K| = 2, rho 3, unknown fills {2, 0}, 5 knowns >= spare 4 -> 6.
        let plan = BatchPlan {
            batches: vec![
                Batch {
                    index: 1,
                    tau_start: 15.0,
                    tau_end: 16.0,
                    rho_unknown: 2,
                    assigned: [id(10), id(11)].into_iter().collect(),
                },
                Batch {
                    index: 2,
                    tau_start: 14.0,
                    tau_end: 15.0,
                    rho_unknown: 0,
                    assigned: BTreeSet::new(),
                },
            ],
            spare: [1u32, 2].into_iter().collect(),
            assignment: [(id(10), 1), (id(11), 1)].into_iter().collect(),
        };
        assert_eq!(plan.spare_capacity(3), 4);
        assert_eq!(opt_count(5, &plan, 3), 6);
    }

    #[test]
    fn known_heavy_sweep_consistent_with_oracle() {
        let known: BTreeSet<_> = (1..=5).map(id).collect();
        let realized: BTreeMap<_, _> = [(id(10), 15.0), (id(11), 15.0)].into_iter().collect();
        let plan = build_batches(0.0, &known, &realized, 16.0, 3, 1.0);
        let releases: Vec<_> = (1..=5)
            .map(|i| (id(i), 0.0))
            .chain([(id(10), 15.0), (id(11), 15.0)])
            .collect();
        let oracle = brute_force_max_served(0.0, &releases, 16.0, 3, 1.0).unwrap();
        assert_eq!(opt_count(5, &plan, 3), oracle);
    }

    #[test]
    fn daganzo_values() {
        assert_eq!(daganzo_duration(16.0, 4).unwrap(), 6.0);
        assert_eq!(daganzo_duration(0.0, 5).unwrap(), 0.0);
        let d1 = daganzo_duration(7.3, 6).unwrap();
        let d2 = daganzo_duration(7.3, 12).unwrap();
        assert!((d2 / d1 - core::f64::consts::SQRT_2).abs() < 1e-12);
        assert!(daganzo_duration(-1.0, 3).is_err());
    }

    #[test]
    fn oracle_slot_boundaries() {
        // Exactly fits the last slot.
        assert_eq!(
            brute_force_max_served(0.0, &[(id(1), 15.0)], 16.0, 3, 1.0).unwrap(),
            1
        );
        // Misses the last slot.
        assert_eq!(
            brute_force_max_served(0.0, &[(id(1), 15.5)], 16.0, 3, 1.0).unwrap(),
            0
        );
    }

    #[test]
    fn oracle_matches_toy() {
        let releases: Vec<(CustomerId, Time)> = vec![
            (id(1), 0.0),
            (id(2), 0.0),
            (id(3), 0.0),
            (id(4), 14.0),
            (id(5), 14.0),
            (id(6), 15.0),
            (id(7), 15.0),
            (id(8), 15.0),
        ];
        assert_eq!(
            brute_force_max_served(10.0, &releases, 16.0, 3, 1.0).unwrap(),
            8
        );
    }

    #[test]
    fn oracle_refuses_oversize() {
        let releases: Vec<_> = (0..13).map(|i| (id(i), 0.0)).collect();
        assert!(matches!(
            brute_force_max_served(0.0, &releases, 16.0, 3, 1.0),
            Err(BatchError::OracleTooLarge { .. })
        ));
    }

    #[test]
    fn critical_batch_shape() {
        // Under the optimality assumptions (unknown releases strictly above
        // t_e), at most one batch is partially filled by unknowns, all later
        // batches are full and all earlier ones hold no unknowns.
        let t_e = 3.0;
        let known: BTreeSet<_> = [id(100), id(101)].into_iter().collect();
        let realized: BTreeMap<_, _> = (0..7).map(|i| (id(i), 4.0 + i as f64 * 1.3)).collect();
        let plan = build_batches(t_e, &known, &realized, 20.0, 2, 1.5);
        let fills: Vec<u32> = plan.batches.iter().map(|b| b.rho_unknown).collect();
        let partial = fills.iter().filter(|&&f| f > 0 && f < 2).count();
        assert!(partial <= 1, "fills {fills:?}");
        if let Some(pos) = fills.iter().position(|&f| f > 0 && f < 2) {
            assert!(fills[..pos].iter().all(|&f| f == 2), "fills {fills:?}");
            assert!(fills[pos + 1..].iter().all(|&f| f == 0), "fills {fills:?}");
        }
    }
}
