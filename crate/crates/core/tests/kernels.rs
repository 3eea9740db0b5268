//! Enumeration suite for the exact kernels: on small random instances every
//! solver must agree exactly with brute-force enumeration, and the
//! direct-trip bound must dominate the trip count of every feasible
//! schedule while its schedule warm-starts the exact solver.

use std::collections::BTreeSet;

use oprd_core::instance::{travel_matrix, TravelMatrix};
use oprd_core::optkernel::{solve_op, solve_oprd_perfect, solve_tsp, ub_trips, SolveStatus, Trip};
use oprd_core::oracles::{enum_op, enum_oprd, enum_ub_trips, perm_tsp};
use oprd_core::uniform_01;
use oprd_core::NoLimit;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Case {
    travel: TravelMatrix,
    releases: Vec<(usize, f64)>,
    t_end: f64,
}

fn random_case(rng: &mut ChaCha8Rng) -> Case {
    let n = 2 + (uniform_01(rng) * 7.0) as usize; // 2..=8
    let mut points: Vec<(f64, f64)> = Vec::new();
    while points.len() < n {
        let p = (
            (uniform_01(rng) * 20.0).round(),
            (uniform_01(rng) * 20.0).round(),
        );
        if p != (0.0, 0.0) && !points.contains(&p) {
            points.push(p);
        }
    }
    let travel = travel_matrix((0.0, 0.0), &points, Default::default()).unwrap();
    let t_end = (20.0 + uniform_01(rng) * 60.0).round();
    let releases: Vec<(usize, f64)> = (1..=n)
        .map(|v| {
            let r = if uniform_01(rng) < 0.3 {
                0.0
            } else {
                (uniform_01(rng) * t_end * 0.9).round()
            };
            (v, r)
        })
        .collect();
    Case {
        travel,
        releases,
        t_end,
    }
}

#[test]
fn kernels_agree_with_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(40_100);
    for case_idx in 0..100 {
        let case = random_case(&mut rng);
        let nodes: Vec<usize> = case.releases.iter().map(|&(v, _)| v).collect();

        // TSP against permutations.
        let tsp = solve_tsp(&case.travel, &nodes, 18).unwrap();
        assert_eq!(
            tsp.duration as u32,
            perm_tsp(&case.travel, &nodes),
            "tsp case {case_idx}"
        );

        // Orienteering at several budgets, including the exact TSP length.
        for budget in [
            0.0,
            case.t_end * 0.3,
            case.t_end * 0.6,
            tsp.duration,
            case.t_end,
        ] {
            let got = solve_op(&case.travel, &nodes, budget);
            assert_eq!(
                got.value,
                enum_op(&case.travel, &nodes, budget),
                "op case {case_idx} budget {budget}"
            );
            assert!(got.tour.duration <= budget.max(0.0));
            let distinct: BTreeSet<usize> = got.tour.nodes.iter().copied().collect();
            assert_eq!(distinct.len(), got.value as usize);
        }

        // Direct-trip bound against selection-vector enumeration.
        let ub = ub_trips(&case.travel, &case.releases, case.t_end);
        assert_eq!(
            ub.value,
            enum_ub_trips(&case.travel, &case.releases, case.t_end),
            "ub case {case_idx}"
        );

        // Perfect-information optimum against ordered-partition enumeration.
        let trip_bound = ub.value.max(1);
        let reference = enum_oprd(&case.travel, &case.releases, case.t_end, trip_bound);
        let (enum_best, enum_unlimited, enum_max_trips) = (
            reference.best_capped,
            reference.best_unlimited,
            reference.max_trips,
        );
        let exact = solve_oprd_perfect(
            &case.travel,
            &case.releases,
            case.t_end,
            trip_bound,
            &mut NoLimit,
            Some(&ub.trips),
        )
        .unwrap();
        assert_eq!(exact.status, SolveStatus::Optimal, "case {case_idx}");
        assert_eq!(exact.value, enum_best, "oprd case {case_idx}");
        assert_eq!(exact.value, exact.bound);

        // The bound dominates every feasible schedule's trip count.
        assert!(
            ub.value >= enum_max_trips,
            "trip bound case {case_idx}: ub {} < enumerated {}",
            ub.value,
            enum_max_trips
        );

        // Sentinel semantics: granting more trips than the bound never
        // improves the optimum.
        assert_eq!(enum_unlimited, enum_best, "sentinel case {case_idx}");

        // The returned schedule is itself feasible and serves `value`.
        let mut served = 0;
        let mut clock = 0.0;
        for Trip { depart, tour } in &exact.trips {
            assert!(*depart >= clock - 1e-9, "trips overlap, case {case_idx}");
            assert!(*depart + tour.duration <= case.t_end + 1e-9);
            for &node in &tour.nodes {
                let (_, rel) = case.releases.iter().find(|&&(v, _)| v == node).unwrap();
                assert!(*rel <= *depart + 1e-9, "release violated, case {case_idx}");
            }
            clock = *depart + tour.duration;
            served += tour.nodes.len() as u32;
        }
        assert_eq!(served, exact.value);
    }
}

#[test]
fn all_releases_zero_matches_orienteering() {
    // With every parcel available at time zero the multi-trip optimum
    // coincides with a single orienteering tour over the full budget.
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    for _ in 0..20 {
        let case = random_case(&mut rng);
        let releases: Vec<(usize, f64)> = case.releases.iter().map(|&(v, _)| (v, 0.0)).collect();
        let nodes: Vec<usize> = releases.iter().map(|&(v, _)| v).collect();
        let op = solve_op(&case.travel, &nodes, case.t_end);
        let ub = ub_trips(&case.travel, &releases, case.t_end);
        let exact = solve_oprd_perfect(
            &case.travel,
            &releases,
            case.t_end,
            ub.value.max(1),
            &mut NoLimit,
            None,
        )
        .unwrap();
        assert_eq!(exact.value, op.value);
        assert!(exact.value >= ub.trips.iter().map(|t| t.tour.len() as u32).sum::<u32>());
    }
}

#[test]
fn mid_size_agreement() {
    // A few nine-customer instances: the ordered-partition enumeration is
    // still tractable and exercises deeper trip structure than the main
    // suite.
    let mut rng = ChaCha8Rng::seed_from_u64(900);
    for case in 0..8 {
        let mut points: Vec<(f64, f64)> = Vec::new();
        while points.len() < 9 {
            let p = (
                (uniform_01(&mut rng) * 25.0).round(),
                (uniform_01(&mut rng) * 25.0).round(),
            );
            if p != (0.0, 0.0) && !points.contains(&p) {
                points.push(p);
            }
        }
        let travel = travel_matrix((0.0, 0.0), &points, Default::default()).unwrap();
        let t_end = (40.0 + uniform_01(&mut rng) * 50.0).round();
        let releases: Vec<(usize, f64)> = (1..=9)
            .map(|v| (v, (uniform_01(&mut rng) * t_end * 0.8).round()))
            .collect();
        let ub = ub_trips(&travel, &releases, t_end);
        let reference = enum_oprd(&travel, &releases, t_end, ub.value.max(1));
        let exact = solve_oprd_perfect(
            &travel,
            &releases,
            t_end,
            ub.value.max(1),
            &mut NoLimit,
            Some(&ub.trips),
        )
        .unwrap();
        assert_eq!(exact.value, reference.best_capped, "case {case}");
        assert_eq!(exact.status, SolveStatus::Optimal);
    }
}

#[test]
fn perfect_information_monotonicity() {
    // More time never hurts, and dropping a customer never helps, up to
    // twelve customers (beyond the enumeration oracle's reach).
    let mut rng = ChaCha8Rng::seed_from_u64(1200);
    for _ in 0..15 {
        let n = 9 + (uniform_01(&mut rng) * 4.0) as usize;
        let mut points: Vec<(f64, f64)> = Vec::new();
        while points.len() < n {
            let p = (
                (uniform_01(&mut rng) * 30.0).round(),
                (uniform_01(&mut rng) * 30.0).round(),
            );
            if p != (0.0, 0.0) && !points.contains(&p) {
                points.push(p);
            }
        }
        let travel = travel_matrix((0.0, 0.0), &points, Default::default()).unwrap();
        let t_end = (50.0 + uniform_01(&mut rng) * 60.0).round();
        let releases: Vec<(usize, f64)> = (1..=n)
            .map(|v| (v, (uniform_01(&mut rng) * t_end * 0.9).round()))
            .collect();
        let solve = |rel: &[(usize, f64)], t: f64| {
            let ub = ub_trips(&travel, rel, t);
            solve_oprd_perfect(
                &travel,
                rel,
                t,
                ub.value.max(1),
                &mut NoLimit,
                Some(&ub.trips),
            )
            .unwrap()
        };
        let base = solve(&releases, t_end);
        assert_eq!(base.status, SolveStatus::Optimal);

        let more_time = solve(&releases, t_end + 17.0);
        assert!(more_time.value >= base.value);

        let fewer: Vec<(usize, f64)> = releases[1..].to_vec();
        let dropped = solve(&fewer, t_end);
        assert!(dropped.value <= base.value);

        // Identical inputs replay identically.
        let again = solve(&releases, t_end);
        assert_eq!(again.value, base.value);
        assert_eq!(again.trips.len(), base.trips.len());
    }
}
