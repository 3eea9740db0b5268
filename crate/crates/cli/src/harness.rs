//! Benchmark orchestration: run policy x instance x seed grids, score
//! every run against the perfect-information optimum, and emit CSV.
//!
//! Float columns are written in shortest round-trip form, so aggregates
//! recomputed from `details.csv` reproduce the summary files exactly, and
//! repeated runs of the same config are byte-identical (wall-clock columns
//! are zeroed under normalize_time; solver limits default to deterministic
//! node budgets).

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use oprd_core::instance::{generate_instance, GeneratorConfig, Instance};
use oprd_core::mdp::{simulate, SimConfig};
use oprd_core::optkernel::{solve_oprd_perfect, ub_trips, SolveStatus};
use oprd_core::policies::{policy_by_name, PolicyConfig};

use crate::formats::{load_solomon, read_instance};
use crate::SolverLimit;

pub const DETAILS_SCHEMA: &str = "# details-v1";
pub const SUMMARY_SCHEMA: &str = "# summary-v1";
pub const SENSITIVITY_SCHEMA: &str = "# sensitivity-v1";

/// Where benchmark instances come from.
#[derive(Debug, Clone)]
pub enum InstanceSource {
    /// Pre-generated instance files.
    Files(Vec<PathBuf>),
    /// Generate on the fly from a Solomon-layout sheet.
    Grid {
        solomon: PathBuf,
        n: usize,
        betas: Vec<f64>,
        deltas: Vec<f64>,
        cs: Vec<f64>,
        seeds: Vec<u64>,
        horizon: Option<f64>,
        sigma0_frac: f64,
    },
}

#[derive(Debug, Clone)]
pub struct BenchmarkConfig {
    pub source: InstanceSource,
    pub policies: Vec<String>,
    pub policy: PolicyConfig,
    /// Batch-capacity grid; more than one value adds a sensitivity table.
    pub rhos: Vec<u32>,
    pub ub_node_budget: u64,
    pub ub_time_limit: Option<f64>,
    pub jobs: usize,
    pub normalize_time: bool,
}

impl BenchmarkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.policies.is_empty() {
            bail!("config names no policies");
        }
        if self.rhos.is_empty() {
            bail!("config names no rho values");
        }
        for p in &self.policies {
            if !matches!(p.as_str(), "pfa" | "vfa" | "me" | "mh") {
                bail!("unknown policy {p}");
            }
        }
        match &self.source {
            InstanceSource::Files(files) if files.is_empty() => {
                bail!("config names no instances")
            }
            InstanceSource::Grid {
                betas,
                deltas,
                cs,
                seeds,
                ..
            } if betas.is_empty() || deltas.is_empty() || cs.is_empty() || seeds.is_empty() => {
                bail!("empty generation grid")
            }
            _ => Ok(()),
        }
    }
}

/// Parse the flat `key = value` config format. Unknown keys are errors;
/// lists are comma-separated; `#` starts a comment.
pub fn parse_config(text: &str, base_dir: &Path) -> Result<BenchmarkConfig> {
    let mut kv: BTreeMap<String, String> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected `key = value`", idx + 1))?;
        kv.insert(key.trim().to_string(), value.trim().to_string());
    }
    let take = |kv: &mut BTreeMap<String, String>, key: &str| kv.remove(key);
    let parse_list_f64 = |s: &str| -> Result<Vec<f64>> {
        s.split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|e| anyhow!("{t}: {e}")))
            .collect()
    };

    let mut policy = PolicyConfig::default();
    if let Some(v) = take(&mut kv, "scenarios") {
        policy.n_scenarios = v.parse()?;
    }
    if let Some(v) = take(&mut kv, "gamma") {
        policy.gamma = v.parse()?;
    }
    if let Some(v) = take(&mut kv, "phi") {
        policy.phi = v.parse()?;
    }
    if let Some(v) = take(&mut kv, "det_tl") {
        policy.det_time_limit = v.parse()?;
    }
    if let Some(v) = take(&mut kv, "sto_tl") {
        policy.sto_time_limit = v.parse()?;
    }
    if let Some(v) = take(&mut kv, "myopic_tl") {
        policy.myopic_time_limit = v.parse()?;
    }
    if let Some(v) = take(&mut kv, "pc") {
        policy.pc_enabled = v.parse()?;
    }
    if let Some(v) = take(&mut kv, "pc_known_frac") {
        policy.pc_known_frac = v.parse()?;
    }
    if let Some(v) = take(&mut kv, "pc_time_frac") {
        policy.pc_time_frac = v.parse()?;
    }
    if let Some(v) = take(&mut kv, "exact_cap") {
        policy.exact_cap = v.parse()?;
    }

    let rhos: Vec<u32> = match take(&mut kv, "rhos").or_else(|| take(&mut kv, "rho")) {
        Some(v) => v
            .split(',')
            .map(|t| t.trim().parse::<u32>().map_err(|e| anyhow!("{t}: {e}")))
            .collect::<Result<_>>()?,
        None => vec![policy.rho],
    };

    let policies: Vec<String> = take(&mut kv, "policies")
        .unwrap_or_else(|| "pfa,vfa,me,mh".to_string())
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();

    let source = if let Some(files) = take(&mut kv, "instances") {
        InstanceSource::Files(files.split(',').map(|f| base_dir.join(f.trim())).collect())
    } else {
        let solomon = take(&mut kv, "solomon")
            .ok_or_else(|| anyhow!("config needs `instances` or `solomon`"))?;
        InstanceSource::Grid {
            solomon: base_dir.join(solomon),
            n: take(&mut kv, "n")
                .map(|v| v.parse())
                .transpose()?
                .unwrap_or(20),
            betas: parse_list_f64(&take(&mut kv, "betas").unwrap_or_else(|| "0.5,1,1.5".into()))?,
            deltas: parse_list_f64(&take(&mut kv, "deltas").unwrap_or_else(|| "0,0.5,1".into()))?,
            cs: parse_list_f64(&take(&mut kv, "cs").unwrap_or_else(|| "0.8,1.2".into()))?,
            seeds: take(&mut kv, "seeds")
                .unwrap_or_else(|| "1,2,3".into())
                .split(',')
                .map(|t| t.trim().parse::<u64>().map_err(|e| anyhow!("{t}: {e}")))
                .collect::<Result<_>>()?,
            horizon: take(&mut kv, "horizon").map(|v| v.parse()).transpose()?,
            sigma0_frac: take(&mut kv, "sigma0_frac")
                .map(|v| v.parse())
                .transpose()?
                .unwrap_or(0.05),
        }
    };

    let config = BenchmarkConfig {
        source,
        policies,
        policy,
        rhos,
        ub_node_budget: take(&mut kv, "ub_node_budget")
            .map(|v| v.parse())
            .transpose()?
            .unwrap_or(5_000_000),
        ub_time_limit: take(&mut kv, "ub_time_limit")
            .map(|v| v.parse())
            .transpose()?,
        jobs: take(&mut kv, "jobs")
            .map(|v| v.parse())
            .transpose()?
            .unwrap_or(1),
        normalize_time: take(&mut kv, "normalize_time")
            .map(|v| v.parse())
            .transpose()?
            .unwrap_or(false),
    };
    if let Some(key) = kv.keys().next() {
        bail!("unknown config key `{key}`");
    }
    config.validate()?;
    Ok(config)
}

/// One scored run.
#[derive(Debug, Clone, PartialEq)]
pub struct KpiRow {
    pub instance: String,
    pub policy: String,
    pub served: u32,
    pub ub_perfect: u32,
    pub gap_best: f64,
    pub gap_ub: f64,
    pub runtime_s: f64,
    pub is_best: bool,
    pub rho: u32,
}

/// Per-policy gaps against the best run and the perfect-information bound.
/// Ties all count as best. Errors when the bound is inconsistent.
pub fn compute_gaps(
    served: &[(String, u32)],
    ub_perfect: u32,
) -> Result<Vec<(String, f64, f64, bool)>> {
    let max_served = served.iter().map(|&(_, s)| s).max().unwrap_or(0);
    if ub_perfect < max_served {
        bail!(
            "perfect-information bound {ub_perfect} below best served {max_served}: upstream invariant breach"
        );
    }
    Ok(served
        .iter()
        .map(|(policy, s)| {
            let gap_best = if max_served == 0 {
                0.0
            } else {
                1.0 - *s as f64 / max_served as f64
            };
            let gap_ub = if ub_perfect == 0 {
                0.0
            } else {
                1.0 - *s as f64 / ub_perfect as f64
            };
            (policy.clone(), gap_best, gap_ub, *s == max_served)
        })
        .collect())
}

/// Batch-capacity sensitivity: per policy, the gap of each capacity's
/// served count to the best capacity for that policy.
pub fn sensitivity_gamma(served: &BTreeMap<(String, u32), u32>) -> BTreeMap<(String, u32), f64> {
    let mut best: BTreeMap<&String, u32> = BTreeMap::new();
    for ((policy, _), &s) in served {
        let entry = best.entry(policy).or_insert(0);
        *entry = (*entry).max(s);
    }
    served
        .iter()
        .map(|((policy, rho), &s)| {
            let b = best[policy];
            let gamma = if b == 0 {
                0.0
            } else {
                1.0 - s as f64 / b as f64
            };
            ((policy.clone(), *rho), gamma)
        })
        .collect()
}

/// Everything a benchmark produces, before formatting.
#[derive(Debug, Clone)]
pub struct BenchReport {
    pub details: Vec<KpiRow>,
    /// (beta, delta, c) per instance label, for grouping.
    pub groups: BTreeMap<String, (f64, f64, f64)>,
    /// Failed units, recorded and excluded from every aggregate. Callers
    /// turn a non-empty list into a nonzero exit.
    pub failures: Vec<String>,
}

fn materialize_instances(source: &InstanceSource) -> Result<Vec<Instance>> {
    match source {
        InstanceSource::Files(files) => files.iter().map(|f| read_instance(f)).collect(),
        InstanceSource::Grid {
            solomon,
            n,
            betas,
            deltas,
            cs,
            seeds,
            horizon,
            sigma0_frac,
        } => {
            let parsed = load_solomon(solomon, Some(*n))?;
            let mut out = Vec::new();
            for &beta in betas {
                for &delta in deltas {
                    for &c in cs {
                        for &seed in seeds {
                            let mut cfg = GeneratorConfig::new(beta, delta, c, seed);
                            cfg.horizon = *horizon;
                            cfg.sigma0_frac = *sigma0_frac;
                            out.push(generate_instance(&parsed, &cfg).with_context(|| {
                                format!("generating b{beta} d{delta} c{c} s{seed}")
                            })?);
                        }
                    }
                }
            }
            Ok(out)
        }
    }
}

/// Run the full benchmark and write `details.csv`, `summary_beta_delta.csv`
/// and `summary_c.csv` (plus `summary_rho.csv` when several capacities are
/// configured) under `out_dir`.
pub fn run_benchmark(config: &BenchmarkConfig, out_dir: &Path) -> Result<BenchReport> {
    config.validate()?;
    let instances = materialize_instances(&config.source)?;
    fs::create_dir_all(out_dir)?;

    // Work units: rho x instance; each yields one row per policy.
    let units: Vec<(u32, usize)> = config
        .rhos
        .iter()
        .flat_map(|&rho| (0..instances.len()).map(move |i| (rho, i)))
        .collect();
    let results: Mutex<Vec<Option<Result<Vec<KpiRow>>>>> =
        Mutex::new((0..units.len()).map(|_| None).collect());
    let cursor = AtomicUsize::new(0);

    std::thread::scope(|scope| {
        for _ in 0..config.jobs.max(1) {
            scope.spawn(|| loop {
                let idx = cursor.fetch_add(1, Ordering::SeqCst);
                if idx >= units.len() {
                    break;
                }
                let (rho, inst_idx) = units[idx];
                let outcome = run_unit(config, &instances[inst_idx], rho);
                results.lock().unwrap()[idx] = Some(outcome);
            });
        }
    });

    let mut details = Vec::new();
    let mut failures = Vec::new();
    for (idx, slot) in results.into_inner().unwrap().into_iter().enumerate() {
        let (rho, inst_idx) = units[idx];
        match slot.expect("every unit executed") {
            Ok(rows) => details.extend(rows),
            Err(e) => failures.push(format!("{} (rho {rho}): {e}", instances[inst_idx].label())),
        }
    }

    let groups: BTreeMap<String, (f64, f64, f64)> = instances
        .iter()
        .map(|i| (i.label(), (i.meta.beta, i.meta.delta, i.meta.c)))
        .collect();
    let report = BenchReport {
        details,
        groups,
        failures,
    };
    write_csvs(config, &report, out_dir)?;
    Ok(report)
}

fn run_unit(config: &BenchmarkConfig, instance: &Instance, rho: u32) -> Result<Vec<KpiRow>> {
    let releases: Vec<(usize, f64)> = instance
        .customers
        .iter()
        .enumerate()
        .map(|(i, c)| (i + 1, c.true_release))
        .collect();
    let ub = ub_trips(&instance.travel, &releases, instance.deadline);
    let mut limit = SolverLimit::new(config.ub_node_budget, config.ub_time_limit);
    let perfect = solve_oprd_perfect(
        &instance.travel,
        &releases,
        instance.deadline,
        ub.value.max(1),
        &mut limit,
        Some(&ub.trips),
    )
    .map_err(|e| anyhow!("perfect-information solve on {}: {e}", instance.label()))?;
    let ub_value = perfect.bound;
    debug_assert!(perfect.status == SolveStatus::Optimal || ub_value >= perfect.value);

    let mut policy_cfg = config.policy.clone();
    policy_cfg.rho = rho;
    policy_cfg.exact_cap = policy_cfg.exact_cap.max(instance.n().min(20));

    let sim = SimConfig {
        phi: policy_cfg.phi,
        update_rate: 1.0,
    };
    let mut served = Vec::new();
    let mut runtimes = Vec::new();
    for name in &config.policies {
        let mut policy =
            policy_by_name(name, &policy_cfg).ok_or_else(|| anyhow!("unknown policy {name}"))?;
        let start = Instant::now();
        let result = simulate(instance, policy.as_mut(), instance.meta.seed, &sim, None)
            .map_err(|e| anyhow!("{name} on {}: {e}", instance.label()))?;
        let runtime = if config.normalize_time {
            0.0
        } else {
            start.elapsed().as_secs_f64()
        };
        if result.total_served > ub_value {
            bail!(
                "{name} served {} above the perfect-information bound {ub_value} on {}",
                result.total_served,
                instance.label()
            );
        }
        served.push((name.clone(), result.total_served));
        runtimes.push(runtime);
    }

    let gaps = compute_gaps(&served, ub_value)?;
    Ok(gaps
        .into_iter()
        .zip(&served)
        .zip(runtimes)
        .map(
            |(((policy, gap_best, gap_ub, is_best), &(_, count)), runtime_s)| KpiRow {
                instance: instance.label(),
                policy,
                served: count,
                ub_perfect: ub_value,
                gap_best,
                gap_ub,
                runtime_s,
                is_best,
                rho,
            },
        )
        .collect())
}

fn fmt_f64(v: f64) -> String {
    // Shortest round-trip form keeps CSV byte-deterministic and lets
    // aggregates be recomputed exactly from the detail rows.
    format!("{v}")
}

fn write_csvs(config: &BenchmarkConfig, report: &BenchReport, out_dir: &Path) -> Result<()> {
    let mut details = String::new();
    details.push_str(DETAILS_SCHEMA);
    details.push('\n');
    details.push_str("instance,policy,served,ub_perfect,gap_best,gap_ub,runtime_s,is_best,rho\n");
    for row in &report.details {
        details.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            row.instance,
            row.policy,
            row.served,
            row.ub_perfect,
            fmt_f64(row.gap_best),
            fmt_f64(row.gap_ub),
            fmt_f64(row.runtime_s),
            row.is_best,
            row.rho
        ));
    }
    fs::write(out_dir.join("details.csv"), details)?;

    let primary_rho = config.rhos[0];
    write_group_summary(
        report,
        primary_rho,
        out_dir.join("summary_beta_delta.csv"),
        |g| format!("{},{}", g.0, g.1),
        "beta,delta",
    )?;
    write_group_summary(
        report,
        primary_rho,
        out_dir.join("summary_c.csv"),
        |g| format!("{}", g.2),
        "c",
    )?;

    if config.rhos.len() > 1 {
        write_sensitivity(report, out_dir.join("summary_rho.csv"))?;
    }
    if !report.failures.is_empty() {
        let mut out = String::from("unit,error\n");
        for f in &report.failures {
            let (unit, err) = f.split_once(": ").unwrap_or((f.as_str(), ""));
            out.push_str(&format!("{unit},{}\n", err.replace(',', ";")));
        }
        fs::write(out_dir.join("failures.csv"), out)?;
    }
    Ok(())
}

/// (runs, sum gap_best, sum gap_ub, sum runtime, freq)
type SummaryCell = (u32, f64, f64, f64, u32);

fn write_group_summary(
    report: &BenchReport,
    rho: u32,
    path: PathBuf,
    group_key: impl Fn(&(f64, f64, f64)) -> String,
    group_header: &str,
) -> Result<()> {
    let mut table: BTreeMap<String, BTreeMap<String, SummaryCell>> = BTreeMap::new();
    for row in report.details.iter().filter(|r| r.rho == rho) {
        let group = group_key(&report.groups[&row.instance]);
        let cell = table
            .entry(group)
            .or_default()
            .entry(row.policy.clone())
            .or_insert((0, 0.0, 0.0, 0.0, 0));
        cell.0 += 1;
        cell.1 += row.gap_best;
        cell.2 += row.gap_ub;
        cell.3 += row.runtime_s;
        cell.4 += row.is_best as u32;
    }
    let mut out = String::new();
    out.push_str(SUMMARY_SCHEMA);
    out.push('\n');
    out.push_str(&format!(
        "{group_header},policy,runs,avg_gap_best,avg_gap_ub,avg_runtime_s,freq\n"
    ));
    for (group, policies) in &table {
        for (policy, (runs, gb, gu, rt, freq)) in policies {
            out.push_str(&format!(
                "{group},{policy},{runs},{},{},{},{freq}\n",
                fmt_f64(gb / *runs as f64),
                fmt_f64(gu / *runs as f64),
                fmt_f64(rt / *runs as f64),
            ));
        }
    }
    fs::write(path, out)?;
    Ok(())
}

fn write_sensitivity(report: &BenchReport, path: PathBuf) -> Result<()> {
    // Per instance and policy: served by rho; gamma against the best rho.
    let mut per_instance: BTreeMap<(String, String), BTreeMap<u32, u32>> = BTreeMap::new();
    for row in &report.details {
        per_instance
            .entry((row.instance.clone(), row.policy.clone()))
            .or_default()
            .insert(row.rho, row.served);
    }
    let mut sums: BTreeMap<(String, u32), (f64, u32)> = BTreeMap::new();
    for ((_, policy), by_rho) in &per_instance {
        let served: BTreeMap<(String, u32), u32> = by_rho
            .iter()
            .map(|(&rho, &s)| ((policy.clone(), rho), s))
            .collect();
        for ((policy, rho), gamma) in sensitivity_gamma(&served) {
            let cell = sums.entry((policy, rho)).or_insert((0.0, 0));
            cell.0 += gamma;
            cell.1 += 1;
        }
    }
    let mut out = String::new();
    out.push_str(SENSITIVITY_SCHEMA);
    out.push('\n');
    out.push_str("policy,rho,avg_gamma,runs\n");
    for ((policy, rho), (sum, runs)) in &sums {
        out.push_str(&format!(
            "{policy},{rho},{},{runs}\n",
            fmt_f64(sum / *runs as f64)
        ));
    }
    fs::write(path, out)?;
    Ok(())
}
