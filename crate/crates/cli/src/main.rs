use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use holonet::checks::{self, PartitionStats, VerifyConfig};
use holonet::nearest_point::{divergence_experiment, DivergenceRow};
use holonet::report::{self, CheckReport, DivergenceVerdict, ModulusSummary};
use holonet::retraction::{self, ModulusConfig};
use holonet::{Error, FlatSetDescriptor, FlatnessProfile, NetLevel, NormFamilyParams, Retraction, SegmentK, Shape};

const EXIT_FAIL: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(name = "holonet", version, about = "Hölder retractions onto flat convex sets and a nearest point counterexample")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Retraction experiments.
    Retract {
        #[command(subcommand)]
        command: RetractCommand,
    },
    /// Nearest point map experiments.
    Npm {
        #[command(subcommand)]
        command: NpmCommand,
    },
    /// Run the verification suite and print a JSON report.
    Verify(VerifyArgs),
    /// Certified lower bounds on the heights of a flat set.
    Heights(HeightsArgs),
    /// Net inspection.
    Net {
        #[command(subcommand)]
        command: NetCommand,
    },
}

#[derive(Subcommand)]
enum RetractCommand {
    /// Empirical modulus of continuity and Hölder fit.
    Modulus(ModulusArgs),
}

#[derive(Subcommand)]
enum NpmCommand {
    /// Divergence of nearest points for converging inputs.
    Demo(NpmArgs),
}

#[derive(Subcommand)]
enum NetCommand {
    /// Write the points of one net level as CSV.
    Dump(NetArgs),
}

/// Failures are split into bad input (exit 2) and everything else (exit 1).
enum Failure {
    Config(String),
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) | Error::Range(_) | Error::DimensionMismatch { .. } | Error::Io(_) => {
                Failure::Config(e.to_string())
            }
            _ => Failure::Run(e.to_string()),
        }
    }
}

type Outcome = Result<bool, Failure>;

fn read_config<T: for<'de> Deserialize<'de> + Default>(path: Option<&Path>) -> Result<T, Failure> {
    let Some(path) = path else { return Ok(T::default()) };
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Failure::Config(format!("bad config {}: {e}", path.display())))
}

fn require<T>(v: Option<T>, flag: &str) -> Result<T, Failure> {
    v.ok_or_else(|| Failure::Config(format!("missing --{flag}")))
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf, Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Config(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

fn to_json<T: Serialize>(v: &T) -> Result<String, Failure> {
    Ok(report::to_json_pretty(v)?)
}

/// Flags shared by the sampled experiments. Every field can also come from
/// the TOML file given by `--config`; flags win.
#[derive(Args, Deserialize, Default, Clone)]
#[serde(default, deny_unknown_fields)]
struct ModulusArgs {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// `box` (K1) or `cross` (K2).
    #[arg(long)]
    shape: Option<String>,
    #[arg(long)]
    pairs: Option<usize>,
    #[arg(long)]
    t_min: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    t_count: Option<usize>,
    /// Samples for the partition invariants run alongside.
    #[arg(long)]
    invariant_samples: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

impl ModulusArgs {
    fn merge(self, file: ModulusArgs) -> ModulusArgs {
        ModulusArgs {
            alpha: self.alpha.or(file.alpha),
            dim: self.dim.or(file.dim),
            seed: self.seed.or(file.seed),
            shape: self.shape.or(file.shape),
            pairs: self.pairs.or(file.pairs),
            t_min: self.t_min.or(file.t_min),
            t_max: self.t_max.or(file.t_max),
            t_count: self.t_count.or(file.t_count),
            invariant_samples: self.invariant_samples.or(file.invariant_samples),
            out_dir: self.out_dir.or(file.out_dir),
            config: self.config,
        }
    }
}

#[derive(Serialize)]
struct ModulusReport {
    #[serde(flatten)]
    summary: ModulusSummary,
    shape: Shape,
    dim: usize,
    t_range: (f64, f64),
    pairs: usize,
    invariants: Vec<CheckReport>,
}

fn invariant_reports(s: &PartitionStats, seed: u64) -> Vec<CheckReport> {
    let rep = |name: &str, bound: f64, measured: f64, pass: bool| CheckReport {
        check_name: name.into(),
        bound,
        measured,
        pass,
        seed,
        detail: None,
    };
    vec![
        rep("partition_sum", 1e-12, s.max_phi_sum_error, s.max_phi_sum_error <= 1e-12 && s.min_phi >= 0.0),
        rep("partition_lower_sum", 0.25, s.min_psi_sum_ratio, s.min_psi_sum_ratio >= 0.25 - 1e-12),
        rep("partition_support", 7.0, s.max_support_ratio, s.max_support_ratio <= 7.0 + 1e-9),
        rep("psi_lipschitz", 1e-9, s.max_lipschitz_excess, s.max_lipschitz_excess <= 1e-9),
        rep(
            "displacement",
            9.0,
            s.max_displacement_ratio,
            s.max_displacement_ratio <= 9.0 && s.identity_failures == 0,
        ),
    ]
}

fn run_modulus(args: ModulusArgs) -> Outcome {
    let file = read_config(args.config.as_deref())?;
    let a = args.merge(file);
    let seed = require(a.seed, "seed")?;
    let alpha = require(a.alpha, "alpha")?;
    let dim = a.dim.unwrap_or(6);
    let shape: Shape = a.shape.as_deref().unwrap_or("box").parse()?;
    let pairs = a.pairs.unwrap_or(2000);
    let (t_min, t_max, t_count) = (a.t_min.unwrap_or(1e-4), a.t_max.unwrap_or(1e-1), a.t_count.unwrap_or(8));
    if !(t_min > 0.0 && t_min < t_max) || t_count < 2 {
        return Err(Failure::Config(format!("bad t grid [{t_min}, {t_max}] x {t_count}")));
    }
    let out_dir = a.out_dir.unwrap_or_else(|| PathBuf::from("."));

    let set = FlatSetDescriptor::new(shape, FlatnessProfile::holder(alpha)?, dim)?;
    let r = Retraction::new(set.clone());
    let cfg = ModulusConfig::new(retraction::log_grid(t_min, t_max, t_count), pairs, seed);
    let table = retraction::empirical_modulus(&r, &cfg)?;
    let fit = retraction::holder_fit(&table, t_min, t_max)?;
    let c_impl = retraction::modulus_constant(&set, &table);
    let stats = checks::partition_stats(&r, a.invariant_samples.unwrap_or(2000), (1e-4, 1.0), seed)?;
    let invariants = invariant_reports(&stats, seed);

    let exponent_ok = fit.exponent >= alpha - 0.05;
    let pass = exponent_ok && c_impl.is_finite() && invariants.iter().all(|c| c.pass);
    let summary = ModulusSummary {
        alpha_profile: Some(alpha),
        fitted_exponent: fit.exponent,
        r_squared: fit.r_squared,
        c_impl,
        seed,
        pass,
    };
    let out = ModulusReport { summary, shape, dim, t_range: (t_min, t_max), pairs, invariants };

    let mut csv = Vec::new();
    report::write_modulus(&mut csv, &table)?;
    write_file(&out_dir, "modulus.csv", &csv)?;
    let json = to_json(&out)?;
    write_file(&out_dir, "modulus.json", json.as_bytes())?;
    println!("{json}");
    Ok(pass)
}

#[derive(Args, Deserialize, Default, Clone)]
#[serde(default, deny_unknown_fields)]
struct NpmArgs {
    #[arg(long)]
    delta: Option<f64>,
    /// Defaults to the largest admissible value for `delta`.
    #[arg(long)]
    mu: Option<f64>,
    /// Largest index M; the experiment runs n = 2..=M.
    #[arg(long)]
    n_max: Option<usize>,
    /// Ambient dimension, at least 2M + 2.
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Serialize)]
struct NpmReport {
    #[serde(flatten)]
    verdict: DivergenceVerdict,
    delta: f64,
    mu: f64,
    eps: f64,
    seed: u64,
    input_gaps_decreasing: bool,
    input_gaps_within_bound: bool,
    rows: usize,
}

fn run_npm(args: NpmArgs) -> Outcome {
    let file: NpmArgs = read_config(args.config.as_deref())?;
    // the experiment is deterministic; the seed is still recorded
    let seed = require(args.seed.or(file.seed), "seed")?;
    let delta = require(args.delta.or(file.delta), "delta")?;
    let max_index = args.n_max.or(file.n_max).unwrap_or(12);
    let mu = args.mu.or(file.mu).unwrap_or(NormFamilyParams::mu_bound(delta));
    let dim = args.dim.or(file.dim).unwrap_or(2 * max_index + 2);
    let eps = args.eps.or(file.eps).unwrap_or(1.0);
    let out_dir = args.out_dir.or(file.out_dir).unwrap_or_else(|| PathBuf::from("."));
    if max_index < 2 {
        return Err(Failure::Config(format!("n-max {max_index} leaves no index above 1")));
    }

    let p = NormFamilyParams::new(delta, mu, max_index, dim)?;
    let k = SegmentK::new(delta, dim)?;
    let rows = divergence_experiment(&p, &k, eps, 2..=max_index)?;
    let bound = DivergenceRow::lower_bound(eps, delta);
    let min_output_gap = rows.iter().map(|r| r.output_gap).fold(f64::INFINITY, f64::min);
    let decreasing = rows.windows(2).all(|w| w[1].input_gap < w[0].input_gap);
    let within = rows.iter().all(|r| r.input_gap <= DivergenceRow::input_bound(eps, delta, r.n) + 1e-12);
    let pass = min_output_gap >= bound - 1e-6 && decreasing && within;

    let mut csv = Vec::new();
    report::write_divergence(&mut csv, &rows, eps, delta)?;
    write_file(&out_dir, "divergence.csv", &csv)?;
    let out = NpmReport {
        verdict: DivergenceVerdict { min_output_gap, bound, pass },
        delta,
        mu,
        eps,
        seed,
        input_gaps_decreasing: decreasing,
        input_gaps_within_bound: within,
        rows: rows.len(),
    };
    let json = to_json(&out)?;
    write_file(&out_dir, "divergence.json", json.as_bytes())?;
    println!("{json}");
    Ok(pass)
}

#[derive(Args, Deserialize, Default, Clone)]
#[serde(default, deny_unknown_fields)]
struct VerifyArgs {
    /// Run a single named check.
    #[arg(long)]
    only: Option<String>,
    /// Defaults to 1.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    max_index: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    /// Also write the JSON report to this file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the check names and exit.
    #[arg(long)]
    #[serde(skip)]
    list: bool,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

fn run_verify(args: VerifyArgs) -> Outcome {
    if args.list {
        for name in checks::CHECK_NAMES {
            println!("{name}");
        }
        return Ok(true);
    }
    let file: VerifyArgs = read_config(args.config.as_deref())?;
    let d = VerifyConfig::default();
    let delta = args.delta.or(file.delta).unwrap_or(d.delta);
    let cfg = VerifyConfig {
        seed: args.seed.or(file.seed).unwrap_or(d.seed),
        delta,
        mu: args.mu.or(file.mu).unwrap_or(NormFamilyParams::mu_bound(delta)),
        max_index: args.max_index.or(file.max_index).unwrap_or(d.max_index),
        dim: args.dim.or(file.dim).unwrap_or(d.dim),
        budget: args.budget.or(file.budget).unwrap_or(d.budget),
    };
    let only = args.only.or(file.only);
    let reports = checks::run_checks(&cfg, only.as_deref())?;
    let json = to_json(&reports)?;
    if let Some(path) = args.out.or(file.out) {
        fs::write(&path, &json).map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))?;
    }
    println!("{json}");
    for r in reports.iter().filter(|r| !r.pass) {
        eprintln!("FAILED {}: measured {} against bound {}", r.check_name, r.measured, r.bound);
    }
    Ok(reports.iter().all(|r| r.pass))
}

#[derive(Args, Deserialize, Default, Clone)]
#[serde(default, deny_unknown_fields)]
struct HeightsArgs {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    shape: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

fn run_heights(args: HeightsArgs) -> Outcome {
    let file: HeightsArgs = read_config(args.config.as_deref())?;
    let seed = require(args.seed.or(file.seed), "seed")?;
    let alpha = require(args.alpha.or(file.alpha), "alpha")?;
    let dim = args.dim.or(file.dim).unwrap_or(6);
    let shape: Shape = args.shape.or(file.shape).as_deref().unwrap_or("box").parse()?;
    let budget = args.budget.or(file.budget).unwrap_or(1000);
    let out_dir = args.out_dir.or(file.out_dir).unwrap_or_else(|| PathBuf::from("."));

    let set = FlatSetDescriptor::new(shape, FlatnessProfile::holder(alpha)?, dim)?;
    let rows = (0..=dim).map(|n| set.estimate_height(n, budget, seed)).collect::<Result<Vec<_>, _>>()?;
    let mut pass = true;
    for h in &rows {
        pass &= h.lower_bound <= set.profile().r_value(h.n)?;
    }
    let mut csv = Vec::new();
    report::write_heights(&mut csv, &set, &rows)?;
    write_file(&out_dir, "heights.csv", &csv)?;
    print!("{}", String::from_utf8_lossy(&csv));
    Ok(pass)
}

#[derive(Args, Deserialize, Default, Clone)]
#[serde(default, deny_unknown_fields)]
struct NetArgs {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    shape: Option<String>,
    /// Net level k, at scale 2^-k.
    #[arg(long, allow_hyphen_values = true)]
    level: Option<i32>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

fn run_net(args: NetArgs) -> Outcome {
    let file: NetArgs = read_config(args.config.as_deref())?;
    let alpha = require(args.alpha.or(file.alpha), "alpha")?;
    let level = require(args.level.or(file.level), "level")?;
    let dim = args.dim.or(file.dim).unwrap_or(6);
    let shape: Shape = args.shape.or(file.shape).as_deref().unwrap_or("box").parse()?;
    let set = FlatSetDescriptor::new(shape, FlatnessProfile::holder(alpha)?, dim)?;
    let net = NetLevel::build(&set, level)?;
    let mut csv = Vec::new();
    report::write_net(&mut csv, &net)?;
    match args.out.or(file.out) {
        Some(path) => {
            fs::write(&path, &csv).map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))?
        }
        None => print!("{}", String::from_utf8_lossy(&csv)),
    }
    Ok(true)
}

fn init_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("HOLONET_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Failure::Config(format!("HOLONET_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Run(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = init_threads().and_then(|()| match cli.command {
        Command::Retract { command: RetractCommand::Modulus(a) } => run_modulus(a),
        Command::Npm { command: NpmCommand::Demo(a) } => run_npm(a),
        Command::Verify(a) => run_verify(a),
        Command::Heights(a) => run_heights(a),
        Command::Net { command: NetCommand::Dump(a) } => run_net(a),
    });
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAIL),
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            println!("{}", serde_json::json!({ "error": msg, "kind": "config" }));
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            println!("{}", serde_json::json!({ "error": msg, "kind": "run" }));
            ExitCode::from(EXIT_FAIL)
        }
    }
}
