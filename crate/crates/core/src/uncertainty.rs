//! Release-date estimates and Monte-Carlo scenario sampling.
//!
//! Each unserved-and-not-yet-arrived customer carries a Gaussian estimate of
//! its release date. Static customers keep their time-0 parameters until the
//! parcel shows up; dynamic customers' estimates sharpen toward the truth as
//! the day progresses (the information feed a GPS-tracked inbound vehicle
//! would provide).

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand_core::RngCore;
use serde::{Deserialize, Serialize};

use crate::instance::{CustomerId, Instance, ReleaseMode};
use crate::rng::sample_normal;
use crate::Time;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: Time,
    pub std: Time,
}

/// Snapshot of per-customer release estimates as of a given clock reading.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EstimateSet {
    pub as_of: Time,
    pub entries: BTreeMap<CustomerId, Estimate>,
}

impl EstimateSet {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn ids(&self) -> impl Iterator<Item = CustomerId> + '_ {
        self.entries.keys().copied()
    }
}

/// One sampled realization of release dates for the unknown customers.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub realized: BTreeMap<CustomerId, Time>,
    pub probability: f64,
}

/// Advance the estimate set to clock `t`.
///
/// Dynamic customers with true release R interpolate linearly from their
/// time-0 parameters toward (R, 0) as t goes from 0 to R; `rate` scales the
/// interpolation fraction (1 = fully linear). Static customers are
/// unchanged. Customers whose parcel has arrived (R <= t) leave the set.
pub fn update_estimates(
    instance: &Instance,
    estimates: &EstimateSet,
    t: Time,
    rate: f64,
) -> EstimateSet {
    debug_assert!(t >= estimates.as_of, "clock must not run backwards");
    let mut entries = BTreeMap::new();
    for &id in estimates.entries.keys() {
        let customer = instance.customer(id);
        let release = customer.true_release;
        if release <= t {
            continue; // arrived: now known, no longer estimated
        }
        let est = match customer.mode {
            ReleaseMode::Dynamic => {
                let frac = if release > 0.0 {
                    ((t / release) * rate).clamp(0.0, 1.0)
                } else {
                    1.0
                };
                Estimate {
                    mean: customer.estimate_mean + (release - customer.estimate_mean) * frac,
                    std: customer.estimate_std * (1.0 - frac),
                }
            }
            // Time-0 parameters, never updated until arrival.
            _ => Estimate {
                mean: customer.estimate_mean,
                std: customer.estimate_std,
            },
        };
        entries.insert(id, est);
    }
    EstimateSet { as_of: t, entries }
}

/// Sample `count` independent scenarios from the estimate set.
///
/// Each customer's draw is clamped to `max(draw, t_e)`: a parcel that has
/// not arrived by t_e cannot have a release date in the past. Probabilities
/// are uniform 1/count. Deterministic given the rng state; every customer
/// consumes the same number of draws so streams replay exactly.
pub fn sample_scenarios<R: RngCore + ?Sized>(
    estimates: &EstimateSet,
    t_e: Time,
    count: usize,
    rng: &mut R,
) -> Vec<Scenario> {
    debug_assert!(count >= 1);
    let p = 1.0 / count as f64;
    let mut scenarios = Vec::with_capacity(count);
    for _ in 0..count {
        let mut realized = BTreeMap::new();
        for (&id, est) in &estimates.entries {
            let draw = sample_normal(rng, est.mean, est.std);
            realized.insert(id, draw.max(t_e));
        }
        scenarios.push(Scenario {
            realized,
            probability: p,
        });
    }
    scenarios
}
