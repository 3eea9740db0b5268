//! Property tests for the structural invariants: matrix geometry, batch
//! plan shape, scenario sampling, and estimate updates.

use std::collections::{BTreeMap, BTreeSet};

use oprd_core::batch::build_batches;
use oprd_core::instance::{travel_matrix, CustomerId, DistanceRounding};
use oprd_core::uncertainty::{sample_scenarios, Estimate, EstimateSet};
use proptest::prelude::*;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn distinct_points() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((1i32..60, 0i32..60), 1..8).prop_map(|raw| {
        let mut seen = BTreeSet::new();
        raw.into_iter()
            .filter(|&(x, y)| seen.insert((x, y)))
            .map(|(x, y)| (x as f64, y as f64))
            .collect()
    })
}

proptest! {
    #[test]
    fn matrix_is_metric(points in distinct_points()) {
        prop_assume!(!points.is_empty());
        let m = match travel_matrix((0.0, 0.5), &points, DistanceRounding::Ceil) {
            Ok(m) => m,
            Err(_) => return Ok(()), // coincident with the depot offset
        };
        let n = m.size();
        for i in 0..n {
            prop_assert_eq!(m.at(i, i), 0);
            for j in 0..n {
                prop_assert_eq!(m.at(i, j), m.at(j, i));
                if i != j {
                    prop_assert!(m.at(i, j) > 0);
                }
                for k in 0..n {
                    prop_assert!(m.at(i, j) + m.at(j, k) >= m.at(i, k));
                }
            }
        }
    }

    #[test]
    fn batch_plan_shape(
        releases in prop::collection::vec(0u32..40, 0..10),
        known_count in 0usize..5,
        rho in 1u32..4,
        t_d in 1u32..5,
        t_e in 0u32..10,
        t_end in 20u32..45,
    ) {
        let known: BTreeSet<CustomerId> =
            (0..known_count).map(|i| CustomerId(100 + i as u32)).collect();
        let realized: BTreeMap<CustomerId, f64> = releases
            .iter()
            .enumerate()
            .map(|(i, &r)| (CustomerId(i as u32 + 1), r as f64))
            .collect();
        let t_e = t_e as f64;
        let t_end = t_end as f64;
        let t_d = t_d as f64;
        let plan = build_batches(t_e, &known, &realized, t_end, rho, t_d);

        for (pos, b) in plan.batches.iter().enumerate() {
            prop_assert_eq!(b.index as usize, pos + 1);
            prop_assert_eq!(b.tau_end, b.tau_start + t_d);
            prop_assert_eq!(b.tau_start, t_end - b.index as f64 * t_d);
            prop_assert!(b.tau_start > t_e);
            prop_assert!(b.rho_unknown <= rho);
            prop_assert_eq!(b.rho_unknown as usize, b.assigned.len());
            for id in &b.assigned {
                prop_assert!(realized[id] <= b.tau_start);
                prop_assert_eq!(plan.assignment[id], b.index);
            }
        }
        // Spare set is exactly the under-filled batches.
        let expected: BTreeSet<u32> = plan
            .batches
            .iter()
            .filter(|b| b.rho_unknown < rho)
            .map(|b| b.index)
            .collect();
        prop_assert_eq!(&plan.spare, &expected);
        // Every unknown id appears in the assignment map.
        prop_assert_eq!(plan.assignment.len(), realized.len());
    }

    #[test]
    fn scenarios_clamp_and_normalize(
        means in prop::collection::vec(0.0f64..60.0, 1..6),
        t_e in 0.0f64..30.0,
        count in 1usize..12,
        seed in 0u64..500,
    ) {
        let entries: BTreeMap<CustomerId, Estimate> = means
            .iter()
            .enumerate()
            .map(|(i, &m)| (CustomerId(i as u32 + 1), Estimate { mean: m, std: 3.0 }))
            .collect();
        let set = EstimateSet { as_of: t_e, entries };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scenarios = sample_scenarios(&set, t_e, count, &mut rng);
        prop_assert_eq!(scenarios.len(), count);
        let total: f64 = scenarios.iter().map(|s| s.probability).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        for s in &scenarios {
            prop_assert_eq!(s.realized.len(), means.len());
            for &v in s.realized.values() {
                prop_assert!(v >= t_e);
            }
        }
        // Identical state and seed replay identically.
        let mut rng2 = ChaCha8Rng::seed_from_u64(seed);
        prop_assert_eq!(scenarios, sample_scenarios(&set, t_e, count, &mut rng2));
    }
}
