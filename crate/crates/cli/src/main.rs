//! Command-line front end: generate instances, simulate policies, compute
//! perfect-information bounds, and run benchmark grids.

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use oprd_cli::formats::{load_solomon, read_instance, write_instance};
use oprd_cli::harness::{parse_config, run_benchmark};
use oprd_cli::SolverLimit;
use oprd_core::instance::{generate_instance, DistanceRounding, GeneratorConfig};
use oprd_core::mdp::{simulate, SimConfig};
use oprd_core::optkernel::{solve_oprd_perfect, ub_trips, SolveStatus};
use oprd_core::policies::{policy_by_name, PolicyConfig};

#[derive(Parser)]
#[command(
    name = "oprd",
    about = "Same-day dispatch with stochastic release dates: instance generation, policy simulation, exact bounds, benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance from a Solomon-layout customer sheet.
    Gen(GenArgs),
    /// Simulate one policy on an instance file.
    Simulate(SimulateArgs),
    /// Compute the direct-trip bound and the perfect-information optimum.
    Ub(UbArgs),
    /// Run a benchmark grid from a config file.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Solomon-layout input file.
    #[arg(long)]
    solomon: PathBuf,
    /// Number of customers to keep.
    #[arg(long)]
    n: usize,
    /// Release-date dispersion factor.
    #[arg(long)]
    beta: f64,
    /// Fraction of customers with dynamically updated estimates.
    #[arg(long)]
    delta: f64,
    /// Deadline factor over the latest release.
    #[arg(long)]
    c: f64,
    #[arg(long)]
    seed: u64,
    /// Output instance file (JSON).
    #[arg(long)]
    out: PathBuf,
    /// Override the nominal horizon (defaults to the depot due date).
    #[arg(long)]
    horizon: Option<f64>,
    /// Estimate std as a fraction of the horizon.
    #[arg(long, default_value_t = 0.05)]
    sigma0_frac: f64,
    /// Round distances down instead of up.
    #[arg(long)]
    floor_distances: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    instance: PathBuf,
    /// One of: pfa, vfa, me, mh.
    #[arg(long)]
    policy: String,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    policy_flags: PolicyFlags,
    /// Zero the wall-clock column in the trajectory log.
    #[arg(long)]
    normalize_time: bool,
}

#[derive(Args)]
struct PolicyFlags {
    /// Batch capacity.
    #[arg(long, default_value_t = 15)]
    rho: u32,
    /// Scenarios sampled per decision epoch.
    #[arg(long, default_value_t = 30)]
    scenarios: usize,
    #[arg(long, default_value_t = 0.9)]
    gamma: f64,
    /// Maximum wait between decision epochs.
    #[arg(long, default_value_t = 10.0)]
    phi: f64,
    /// Per-epoch time limits in seconds (safety nets at this scale).
    #[arg(long, default_value_t = 300.0)]
    det_tl: f64,
    #[arg(long, default_value_t = 600.0)]
    sto_tl: f64,
    #[arg(long, default_value_t = 600.0)]
    myopic_tl: f64,
    /// Enable the provably-optimal immediate-dispatch check (default).
    #[arg(long, overrides_with = "no_pc")]
    pc: bool,
    /// Disable the immediate-dispatch check.
    #[arg(long)]
    no_pc: bool,
    #[arg(long, default_value_t = 0.25)]
    pc_known_frac: f64,
    #[arg(long, default_value_t = 0.75)]
    pc_time_frac: f64,
    /// Exact-TSP size bound.
    #[arg(long, default_value_t = 18)]
    exact_cap: usize,
}

impl PolicyFlags {
    fn to_config(&self) -> PolicyConfig {
        PolicyConfig {
            rho: self.rho,
            n_scenarios: self.scenarios,
            gamma: self.gamma,
            phi: self.phi,
            det_time_limit: self.det_tl,
            sto_time_limit: self.sto_tl,
            myopic_time_limit: self.myopic_tl,
            pc_known_frac: self.pc_known_frac,
            pc_time_frac: self.pc_time_frac,
            pc_enabled: !self.no_pc,
            exact_cap: self.exact_cap,
            t_d_override: None,
        }
    }
}

#[derive(Args)]
struct UbArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Wall-clock limit in seconds.
    #[arg(long, default_value_t = 60.0)]
    time_limit: f64,
    /// Deterministic node budget.
    #[arg(long, default_value_t = 5_000_000)]
    node_budget: u64,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory for the CSV files.
    #[arg(long)]
    out: PathBuf,
    /// Parallel workers (overrides the config).
    #[arg(long)]
    jobs: Option<usize>,
    /// Zero wall-clock columns for byte-reproducible output.
    #[arg(long)]
    normalize_time: bool,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Gen(args) => gen(args),
        Command::Simulate(args) => run_simulate(args),
        Command::Ub(args) => ub(args),
        Command::Bench(args) => bench(args),
    }
}

fn gen(args: GenArgs) -> Result<()> {
    let parsed = load_solomon(&args.solomon, Some(args.n))?;
    if parsed.customers.len() < args.n {
        bail!(
            "{} has only {} customers, {} requested",
            args.solomon.display(),
            parsed.customers.len(),
            args.n
        );
    }
    let mut cfg = GeneratorConfig::new(args.beta, args.delta, args.c, args.seed);
    cfg.horizon = args.horizon;
    cfg.sigma0_frac = args.sigma0_frac;
    if args.floor_distances {
        cfg.rounding = DistanceRounding::Floor;
    }
    let instance = generate_instance(&parsed, &cfg).context("generating instance")?;
    write_instance(&args.out, &instance)?;
    if !instance.meta.is_standard_grid() {
        eprintln!("note: parameters are off the standard benchmark grid");
    }
    println!(
        "wrote {} ({} customers, deadline {}, t_standard {})",
        args.out.display(),
        instance.n(),
        instance.deadline,
        instance.meta.t_standard
    );
    Ok(())
}

fn run_simulate(args: SimulateArgs) -> Result<()> {
    let instance = read_instance(&args.instance)?;
    let config = args.policy_flags.to_config();
    let mut policy = policy_by_name(&args.policy, &config)
        .ok_or_else(|| anyhow!("unknown policy `{}` (expected pfa|vfa|me|mh)", args.policy))?;
    let sim = SimConfig {
        phi: config.phi,
        update_rate: 1.0,
    };
    let start = Instant::now();
    let mut ms = move || start.elapsed().as_millis() as u64;
    let result = simulate(
        &instance,
        policy.as_mut(),
        args.seed,
        &sim,
        if args.normalize_time {
            None
        } else {
            Some(&mut ms)
        },
    )
    .map_err(|e| anyhow!("simulation failed: {e}"))?;
    for step in &result.trajectory {
        println!("{}", serde_json::to_string(step)?);
    }
    println!(
        "{}",
        serde_json::json!({
            "summary": {
                "instance": result.instance,
                "policy": result.policy,
                "seed": result.seed,
                "total_served": result.total_served,
                "final_time": result.final_time,
                "epochs": result.trajectory.len(),
            }
        })
    );
    Ok(())
}

fn ub(args: UbArgs) -> Result<()> {
    if args.time_limit <= 0.0 {
        bail!("--time-limit must be positive");
    }
    let instance = read_instance(&args.instance)?;
    let releases: Vec<(usize, f64)> = instance
        .customers
        .iter()
        .enumerate()
        .map(|(i, c)| (i + 1, c.true_release))
        .collect();
    let trips = ub_trips(&instance.travel, &releases, instance.deadline);
    println!("ub_trips: {}", trips.value);
    let mut limit = SolverLimit::new(args.node_budget, Some(args.time_limit));
    let perfect = solve_oprd_perfect(
        &instance.travel,
        &releases,
        instance.deadline,
        trips.value.max(1),
        &mut limit,
        Some(&trips.trips),
    )
    .map_err(|e| anyhow!("perfect-information solve failed: {e}"))?;
    let status = match perfect.status {
        SolveStatus::Optimal => "optimal",
        SolveStatus::IncumbentWithBound => "incumbent_with_bound",
    };
    println!("perfect_information: {}", perfect.value);
    println!("bound: {}", perfect.bound);
    println!("status: {status}");
    Ok(())
}

fn bench(args: BenchArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    let base = args
        .config
        .parent()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."));
    let mut config = parse_config(&text, &base)?;
    if let Some(jobs) = args.jobs {
        config.jobs = jobs;
    }
    if args.normalize_time {
        config.normalize_time = true;
    }
    let report = run_benchmark(&config, &args.out)?;
    let best_counts: std::collections::BTreeMap<&str, usize> = config
        .policies
        .iter()
        .map(|p| {
            (
                p.as_str(),
                report
                    .details
                    .iter()
                    .filter(|r| r.policy == *p && r.is_best)
                    .count(),
            )
        })
        .collect();
    println!(
        "wrote {} detail rows to {}; best-run counts: {:?}",
        report.details.len(),
        args.out.display(),
        best_counts
    );
    if !report.failures.is_empty() {
        for f in &report.failures {
            eprintln!("failed: {f}");
        }
        bail!(
            "{} unit(s) failed and were excluded from the aggregates (see failures.csv)",
            report.failures.len()
        );
    }
    Ok(())
}
