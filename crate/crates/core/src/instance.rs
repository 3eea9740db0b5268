//! Problem data: customers, travel times, and seeded instance generation.
//!
//! Customer coordinates come from Solomon-layout text (header lines, then
//! one row per customer: id, x, y, demand, ready, due, service; row 0 is the
//! depot). Demand and time-window columns are read and discarded. Release
//! dates are then generated on top of the coordinates: each customer gets an
//! estimate distribution and a hidden true release drawn from it.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::rng::{sample_normal, uniform_01};
use crate::Time;

/// Customer identifier as it appears in the source data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CustomerId(pub u32);

impl core::fmt::Display for CustomerId {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// How a customer's release-date information behaves over the day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReleaseMode {
    /// Parcel is at the depot when service begins (true release 0).
    AvailableAtStart,
    /// Estimate fixed at its time-0 parameters until the parcel arrives.
    Static,
    /// Estimate sharpens toward the truth as the day progresses.
    Dynamic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Customer {
    pub id: CustomerId,
    pub x: f64,
    pub y: f64,
    /// Actual arrival time of the parcel at the depot. Hidden from policies.
    pub true_release: Time,
    pub mode: ReleaseMode,
    pub estimate_mean: Time,
    pub estimate_std: Time,
}

/// Dense symmetric travel-time matrix over depot (node 0) and customers.
/// Entries are integer time units from rounding Euclidean distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TravelMatrix {
    size: usize,
    entries: Vec<u32>,
}

impl TravelMatrix {
    /// Number of nodes including the depot.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn at(&self, i: usize, j: usize) -> u32 {
        self.entries[i * self.size + j]
    }

    pub fn time(&self, i: usize, j: usize) -> Time {
        self.at(i, j) as Time
    }

    /// Depot round trip to node `i`.
    pub fn roundtrip(&self, i: usize) -> Time {
        self.time(0, i) + self.time(i, 0)
    }
}

/// How real-valued distances become integer travel times.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceRounding {
    /// Round up: preserves the triangle inequality and matches the default
    /// benchmark convention.
    #[default]
    Ceil,
    Floor,
}

/// Generation metadata carried by every instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationParams {
    /// Release-date dispersion factor (benchmark grid: 0.5, 1, 1.5).
    pub beta: f64,
    /// Fraction of customers with dynamically updated estimates (0, 0.5, 1).
    pub delta: f64,
    /// Deadline factor (0.6, 0.8, 1.0, 1.2).
    pub c: f64,
    pub seed: u64,
    /// Latest true release over all customers.
    pub t_standard: Time,
}

impl GenerationParams {
    /// Whether the parameters lie on the standard benchmark grid.
    pub fn is_standard_grid(&self) -> bool {
        [0.5, 1.0, 1.5].contains(&self.beta)
            && [0.0, 0.5, 1.0].contains(&self.delta)
            && [0.6, 0.8, 1.0, 1.2].contains(&self.c)
    }
}

/// Immutable problem instance. Safe to share across concurrent readers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub depot: (f64, f64),
    pub customers: Vec<Customer>,
    pub travel: TravelMatrix,
    /// Common deadline: the vehicle must be back at the depot by this time.
    pub deadline: Time,
    pub meta: GenerationParams,
}

impl Instance {
    pub fn n(&self) -> usize {
        self.customers.len()
    }

    /// Matrix node index of a customer id (depot is node 0).
    pub fn node_of(&self, id: CustomerId) -> usize {
        1 + self
            .customers
            .iter()
            .position(|c| c.id == id)
            .expect("unknown customer id")
    }

    pub fn id_of(&self, node: usize) -> CustomerId {
        self.customers[node - 1].id
    }

    pub fn customer(&self, id: CustomerId) -> &Customer {
        &self.customers[self.node_of(id) - 1]
    }

    /// A compact deterministic label, e.g. `n20-b0.5-d1-c0.8-s3`.
    pub fn label(&self) -> String {
        format!(
            "n{}-b{}-d{}-c{}-s{}",
            self.n(),
            self.meta.beta,
            self.meta.delta,
            self.meta.c,
            self.meta.seed
        )
    }

    /// Full invariant check; generation always runs it, hand-built test
    /// instances may skip it.
    pub fn validate(&self) -> Result<(), InstanceError> {
        let n = self.travel.size();
        if n != self.n() + 1 {
            return Err(InstanceError::Shape);
        }
        let mut ids = BTreeSet::new();
        for c in &self.customers {
            if !ids.insert(c.id) {
                return Err(InstanceError::DuplicateId(c.id));
            }
            if c.true_release < 0.0 || c.true_release > self.meta.t_standard {
                return Err(InstanceError::ReleaseOutOfRange(c.id));
            }
            match c.mode {
                ReleaseMode::AvailableAtStart if c.true_release != 0.0 => {
                    return Err(InstanceError::ModeMismatch(c.id))
                }
                ReleaseMode::Static | ReleaseMode::Dynamic if c.true_release == 0.0 => {
                    return Err(InstanceError::ModeMismatch(c.id))
                }
                _ => {}
            }
            if c.estimate_std == 0.0 && c.mode != ReleaseMode::AvailableAtStart {
                return Err(InstanceError::ModeMismatch(c.id));
            }
        }
        if !self.customers.is_empty()
            && !self
                .customers
                .iter()
                .any(|c| c.true_release == self.meta.t_standard)
        {
            return Err(InstanceError::TStandardUnattained);
        }
        if self.deadline <= 0.0 {
            return Err(InstanceError::NonPositiveDeadline);
        }
        for i in 0..n {
            if self.travel.at(i, i) != 0 {
                return Err(InstanceError::Matrix("nonzero diagonal"));
            }
            for j in 0..n {
                if self.travel.at(i, j) != self.travel.at(j, i) {
                    return Err(InstanceError::Matrix("asymmetric"));
                }
                if i != j && self.travel.at(i, j) == 0 {
                    return Err(InstanceError::Matrix("zero off-diagonal"));
                }
                for k in 0..n {
                    if self.travel.at(i, j) + self.travel.at(j, k) < self.travel.at(i, k) {
                        return Err(InstanceError::Matrix("triangle inequality"));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum InstanceError {
    #[error("travel matrix shape does not match customer count")]
    Shape,
    #[error("duplicate customer id {0}")]
    DuplicateId(CustomerId),
    #[error("two nodes share a location (off-diagonal travel time 0)")]
    DuplicateLocation,
    #[error("customer {0} release outside [0, t_standard]")]
    ReleaseOutOfRange(CustomerId),
    #[error("customer {0} mode inconsistent with its release data")]
    ModeMismatch(CustomerId),
    #[error("no customer attains t_standard")]
    TStandardUnattained,
    #[error("deadline must be positive")]
    NonPositiveDeadline,
    #[error("travel matrix invalid: {0}")]
    Matrix(&'static str),
    #[error("delta must lie in [0, 1], got {0}")]
    BadDelta(f64),
    #[error("nominal horizon must be positive, got {0}")]
    BadHorizon(f64),
    #[error("degenerate deadline: round(c * t_standard) is not positive")]
    DegenerateDeadline,
    #[error("coordinates must be finite")]
    NonFiniteCoordinate,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ParseError {
    #[error("line {line}: malformed customer row: {reason}")]
    MalformedRow { line: usize, reason: &'static str },
    #[error("line {line}: duplicate customer id {id}")]
    DuplicateId { line: usize, id: u32 },
    #[error("input contains no customer rows")]
    EmptyInstance,
}

/// Coordinates parsed out of a Solomon-layout stream.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedCustomers {
    pub depot: (f64, f64),
    /// Due date of the depot row; used as the nominal horizon H when
    /// generating release dates.
    pub depot_due: Time,
    pub customers: Vec<(CustomerId, f64, f64)>,
}

/// Parse the Solomon VRPTW layout, keeping only ids and coordinates.
///
/// The first line with at least seven columns and an integer first token is
/// the depot row; everything before it (titles, the vehicle count line) is
/// header material. After the depot, every integer-led line must be a full
/// customer row. `limit` truncates the customer list.
pub fn parse_customers(text: &str, limit: Option<usize>) -> Result<ParsedCustomers, ParseError> {
    let mut depot: Option<(f64, f64, Time)> = None;
    let mut customers = Vec::new();
    let mut seen = BTreeSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        let Ok(id) = tokens[0].parse::<u32>() else {
            continue; // header line
        };
        if tokens.len() < 7 {
            if depot.is_none() {
                continue; // header counters, e.g. the vehicle capacity line
            }
            return Err(ParseError::MalformedRow {
                line,
                reason: "expected 7 columns (id x y demand ready due service)",
            });
        }
        let mut cols = [0.0; 6];
        for (k, tok) in tokens[1..7].iter().enumerate() {
            cols[k] = tok.parse::<f64>().map_err(|_| ParseError::MalformedRow {
                line,
                reason: "non-numeric column",
            })?;
        }
        let (x, y, due) = (cols[0], cols[1], cols[4]);
        if depot.is_none() {
            depot = Some((x, y, due));
        } else {
            if !seen.insert(id) {
                return Err(ParseError::DuplicateId { line, id });
            }
            customers.push((CustomerId(id), x, y));
        }
    }

    let (dx, dy, due) = depot.ok_or(ParseError::EmptyInstance)?;
    if customers.is_empty() {
        return Err(ParseError::EmptyInstance);
    }
    if let Some(limit) = limit {
        customers.truncate(limit);
        if customers.is_empty() {
            return Err(ParseError::EmptyInstance);
        }
    }
    Ok(ParsedCustomers {
        depot: (dx, dy),
        depot_due: due,
        customers,
    })
}

/// Rounded Euclidean travel-time matrix over the depot and customer points.
pub fn travel_matrix(
    depot: (f64, f64),
    points: &[(f64, f64)],
    rounding: DistanceRounding,
) -> Result<TravelMatrix, InstanceError> {
    let mut coords = Vec::with_capacity(points.len() + 1);
    coords.push(depot);
    coords.extend_from_slice(points);
    for &(x, y) in &coords {
        if !x.is_finite() || !y.is_finite() {
            return Err(InstanceError::NonFiniteCoordinate);
        }
    }
    let n = coords.len();
    let mut entries = alloc::vec![0u32; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = libm::hypot(coords[i].0 - coords[j].0, coords[i].1 - coords[j].1);
            let t = match rounding {
                DistanceRounding::Ceil => libm::ceil(d),
                DistanceRounding::Floor => libm::floor(d),
            } as u32;
            if t == 0 {
                return Err(InstanceError::DuplicateLocation);
            }
            entries[i * n + j] = t;
            entries[j * n + i] = t;
        }
    }
    Ok(TravelMatrix { size: n, entries })
}

/// Inputs to release-date generation beyond the parsed coordinates.
#[derive(Debug, Clone)]
pub struct GeneratorConfig {
    pub beta: f64,
    pub delta: f64,
    pub c: f64,
    pub seed: u64,
    /// Nominal horizon H; defaults to the depot row's due date.
    pub horizon: Option<Time>,
    /// Baseline estimate std as a fraction of H (std = sigma0_frac * H * beta).
    pub sigma0_frac: f64,
    pub rounding: DistanceRounding,
}

impl GeneratorConfig {
    pub fn new(beta: f64, delta: f64, c: f64, seed: u64) -> Self {
        Self {
            beta,
            delta,
            c,
            seed,
            horizon: None,
            sigma0_frac: 0.05,
            rounding: DistanceRounding::default(),
        }
    }
}

/// Generate a full instance from parsed coordinates.
///
/// Per customer, in file order: estimate_mean ~ U[0, beta*H], estimate_std =
/// sigma0 * beta, true_release = max(0, Normal(mean, std)). A seeded shuffle
/// then marks round(delta*|N|) of the positive-release customers dynamic.
/// Deterministic given the seed.
pub fn generate_instance(
    parsed: &ParsedCustomers,
    cfg: &GeneratorConfig,
) -> Result<Instance, InstanceError> {
    if !(0.0..=1.0).contains(&cfg.delta) {
        return Err(InstanceError::BadDelta(cfg.delta));
    }
    let horizon = cfg.horizon.unwrap_or(parsed.depot_due);
    if horizon.is_nan() || horizon <= 0.0 {
        return Err(InstanceError::BadHorizon(horizon));
    }
    let sigma0 = cfg.sigma0_frac * horizon;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let n = parsed.customers.len();
    let mut draws = Vec::with_capacity(n);
    for _ in 0..n {
        let mean = uniform_01(&mut rng) * cfg.beta * horizon;
        let std = sigma0 * cfg.beta;
        let release = sample_normal(&mut rng, mean, std).max(0.0);
        draws.push((mean, std, release));
    }

    // Dynamic customers are picked among positive releases only: a parcel
    // already at the depot has nothing left to update.
    let mut candidates: Vec<usize> = (0..n).filter(|&i| draws[i].2 > 0.0).collect();
    for i in (1..candidates.len()).rev() {
        let j = (uniform_01(&mut rng) * (i + 1) as f64) as usize;
        candidates.swap(i, j.min(i));
    }
    let target = libm::round(cfg.delta * n as f64) as usize;
    let dynamic: BTreeSet<usize> = candidates.into_iter().take(target).collect();

    let mut customers = Vec::with_capacity(n);
    for (i, &(id, x, y)) in parsed.customers.iter().enumerate() {
        let (mean, std, release) = draws[i];
        let mode = if release == 0.0 {
            ReleaseMode::AvailableAtStart
        } else if dynamic.contains(&i) {
            ReleaseMode::Dynamic
        } else {
            ReleaseMode::Static
        };
        customers.push(Customer {
            id,
            x,
            y,
            true_release: release,
            mode,
            estimate_mean: mean,
            estimate_std: std,
        });
    }

    let t_standard = customers.iter().map(|c| c.true_release).fold(0.0, f64::max);
    let deadline = libm::round(cfg.c * t_standard);
    if deadline.is_nan() || deadline <= 0.0 {
        return Err(InstanceError::DegenerateDeadline);
    }

    let points: Vec<(f64, f64)> = customers.iter().map(|c| (c.x, c.y)).collect();
    let travel = travel_matrix(parsed.depot, &points, cfg.rounding)?;

    let instance = Instance {
        depot: parsed.depot,
        customers,
        travel,
        deadline,
        meta: GenerationParams {
            beta: cfg.beta,
            delta: cfg.delta,
            c: cfg.c,
            seed: cfg.seed,
            t_standard,
        },
    };
    instance.validate()?;
    Ok(instance)
}
