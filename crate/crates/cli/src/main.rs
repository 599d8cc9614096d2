use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hamcoh::cache::{MatrixCache, MatrixKey, CACHE_DIR_ENV};
use hamcoh::ce::{assemble_differential, GeneratorScope, GeneratorTable, SectorBasis};
use hamcoh::linalg::{DEFAULT_EXACT_THRESHOLD, DEFAULT_PRIMES};
use hamcoh::strategy::ModeError;
use hamcoh::verify::{Budget, ClaimSet, Overall};
use hamcoh::{AlgebraSpec, BettiTable, ChargeMode, ComputeRequest, EngineConfig, GammaDegree, ModeRegistry, SuiteRegistry};
use serde_json::{json, Value};

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_UNCERTIFIED: u8 = 3;

#[derive(Parser)]
#[command(name = "hamcoh", version, about = "Weight-graded cohomology of formal Hamiltonian vector fields")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute Betti tables.
    Compute(ComputeArgs),
    /// Run verification suites (`all` runs every default suite).
    Verify(VerifyArgs),
    /// Manage the matrix cache.
    #[command(subcommand)]
    Cache(CacheCommand),
    /// List computation modes and verification suites.
    List,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum GammaArg {
    Symplectic,
    Quoted,
}

#[derive(Args, Clone)]
struct LinalgArgs {
    /// Primes for modular ranks, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_PRIMES.to_vec())]
    primes: Vec<u64>,
    /// Largest matrix side ranked exactly as well.
    #[arg(long, default_value_t = DEFAULT_EXACT_THRESHOLD)]
    exact_threshold: usize,
    #[arg(long, env = CACHE_DIR_ENV)]
    cache_dir: Option<PathBuf>,
}

#[derive(Args)]
struct ComputeArgs {
    #[arg(long)]
    n: usize,
    /// Weights, comma separated or repeated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    weight: Vec<i64>,
    /// Inclusive degree range `a..b`, or a single degree.
    #[arg(long, value_parser = parse_degrees)]
    degrees: Option<RangeInclusive<usize>>,
    #[arg(long, default_value = "absolute")]
    mode: String,
    /// Drop the scalar line in degree 0.
    #[arg(long)]
    reduced: bool,
    /// Extra real dimensions for `anomaly-check`.
    #[arg(long)]
    m: Option<usize>,
    /// Weights on input and output use the halved convention.
    #[arg(long)]
    gkf_weights: bool,
    /// Degree of Gamma in the model.
    #[arg(long, value_enum, default_value = "symplectic")]
    gamma_degree: GammaArg,
    /// Compute only the torus-charge-zero block (same Betti numbers, smaller dimensions).
    #[arg(long)]
    zero_charge: bool,
    /// Charge zero, restricted further to cochains invariant under quarter
    /// turns and index permutations (same Betti numbers again).
    #[arg(long, conflicts_with = "zero_charge")]
    symmetric: bool,
    #[command(flatten)]
    linalg: LinalgArgs,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Include wall-clock timing in the output.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct VerifyArgs {
    suite: String,
    /// Claims file replacing the built-in one.
    #[arg(long)]
    claims: Option<PathBuf>,
    /// Skip claims needing sectors larger than this.
    #[arg(long)]
    max_sector_dim: Option<usize>,
    /// Skip remaining claims once a suite has run this long.
    #[arg(long)]
    time_limit_secs: Option<u64>,
    #[command(flatten)]
    linalg: LinalgArgs,
    /// Emit the reports as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum CacheCommand {
    /// Assemble and store the differentials of a degree range.
    Write {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_negative_numbers = true)]
        weight: i64,
        #[arg(long, value_parser = parse_degrees)]
        degrees: RangeInclusive<usize>,
        #[arg(long, env = CACHE_DIR_ENV)]
        cache_dir: PathBuf,
    },
    /// List cache entries and whether their digests check out.
    Check {
        #[arg(long, env = CACHE_DIR_ENV)]
        cache_dir: PathBuf,
    },
    /// Delete every cache entry.
    Clear {
        #[arg(long, env = CACHE_DIR_ENV)]
        cache_dir: PathBuf,
    },
}

fn parse_degrees(s: &str) -> Result<RangeInclusive<usize>, String> {
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (a, b.strip_prefix('=').unwrap_or(b)),
        None => (s, s),
    };
    let a: usize = a.trim().parse().map_err(|_| format!("bad degree {a:?}"))?;
    let b: usize = b.trim().parse().map_err(|_| format!("bad degree {b:?}"))?;
    if a > b {
        return Err(format!("empty degree range {s:?}"));
    }
    Ok(a..=b)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_FAILURE);
        }
    }
    let result = match cli.command {
        Command::Compute(args) => compute(args),
        Command::Verify(args) => verify(args),
        Command::Cache(cmd) => cache(cmd),
        Command::List => list(),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage = e.downcast_ref::<ModeError>().is_some_and(|m| {
                matches!(m, ModeError::Invalid(_) | ModeError::UnknownMode(_) | ModeError::Model(_))
            });
            ExitCode::from(if usage { EXIT_USAGE } else { EXIT_FAILURE })
        }
    }
}

fn compute(args: ComputeArgs) -> Result<u8> {
    let start = Instant::now();
    let mut req = ComputeRequest::new(args.n);
    req.weights = if args.gkf_weights { args.weight.iter().map(|w| 2 * w).collect() } else { args.weight.clone() };
    req.degrees = args.degrees.clone();
    req.reduced = args.reduced;
    req.m = args.m;
    req.gamma = match args.gamma_degree {
        GammaArg::Symplectic => GammaDegree::Symplectic,
        GammaArg::Quoted => GammaDegree::Quoted,
    };
    req.primes = args.linalg.primes.clone();
    req.exact_threshold = args.linalg.exact_threshold;
    req.cache_dir = args.linalg.cache_dir.clone();
    req.charge_mode = match (args.zero_charge, args.symmetric) {
        (_, true) => ChargeMode::Symmetric,
        (true, false) => ChargeMode::ZeroChargeOnly,
        (false, false) => ChargeMode::AllBlocks,
    };
    let tables = ModeRegistry::builtin().run(&args.mode, &req)?;
    let elapsed = start.elapsed();
    let timing = args.timing.then_some(elapsed);
    match args.format {
        Format::Json => {
            let values: Vec<Value> = tables.iter().map(|t| table_json(t, &args.mode, args.gkf_weights, timing)).collect();
            let out = if values.len() == 1 { values.into_iter().next().unwrap() } else { Value::Array(values) };
            println!("{}", serde_json::to_string_pretty(&out)?);
        }
        Format::Csv => write_csv(&tables, args.gkf_weights, timing)?,
    }
    Ok(if tables.iter().all(BettiTable::is_certified) { 0 } else { EXIT_UNCERTIFIED })
}

fn display_weight(w: i64, gkf: bool) -> Value {
    if !gkf {
        json!(w)
    } else if w % 2 == 0 {
        json!(w / 2)
    } else {
        json!(w as f64 / 2.0)
    }
}

fn table_json(t: &BettiTable, mode: &str, gkf: bool, timing: Option<Duration>) -> Value {
    let rows: Vec<Value> = t
        .rows
        .iter()
        .map(|r| {
            json!({
                "d": r.degree,
                "dim": r.dim,
                "rank_out": r.rank_out,
                "rank_in": r.rank_in,
                "betti": r.betti,
                "certified": r.certified,
                "exact_confirmed": r.certificate.exact_confirmed,
            })
        })
        .collect();
    json!({
        "n": t.spec.n(),
        "mode": mode,
        "kind": t.kind.name(),
        "weight": display_weight(t.weight, gkf),
        "weight_convention": if gkf { "gkf" } else { "diagonal" },
        "reduced": t.reduced,
        "torus_reduced": t.torus_reduced,
        "symmetry_reduced": t.symmetry_reduced,
        "rows": rows,
        "tool_version": env!("CARGO_PKG_VERSION"),
        "timing": timing.map(|d| d.as_secs_f64()),
    })
}

fn write_csv(tables: &[BettiTable], gkf: bool, timing: Option<Duration>) -> Result<()> {
    let mut w = csv::Writer::from_writer(std::io::stdout());
    w.write_record(["n", "kind", "weight", "reduced", "d", "dim", "rank_out", "rank_in", "betti", "certified"])?;
    for t in tables {
        for r in &t.rows {
            w.write_record([
                t.spec.n().to_string(),
                t.kind.name().to_string(),
                display_weight(t.weight, gkf).to_string(),
                t.reduced.to_string(),
                r.degree.to_string(),
                r.dim.to_string(),
                r.rank_out.to_string(),
                r.rank_in.to_string(),
                r.betti.map_or_else(String::new, |b| b.to_string()),
                r.certified.to_string(),
            ])?;
        }
    }
    w.flush()?;
    if let Some(d) = timing {
        eprintln!("elapsed {:.3}s", d.as_secs_f64());
    }
    Ok(())
}

fn verify(args: VerifyArgs) -> Result<u8> {
    let registry = SuiteRegistry::builtin();
    let suites = registry.resolve(&args.suite).map_err(|e| ModeError::Invalid(e.to_string()))?;
    let claims = match &args.claims {
        Some(path) => ClaimSet::load(path)?,
        None => ClaimSet::builtin(),
    };
    let config = EngineConfig {
        primes: args.linalg.primes.clone(),
        exact_threshold: args.linalg.exact_threshold,
        cache: args.linalg.cache_dir.as_ref().map(MatrixCache::new).transpose()?,
        ..EngineConfig::default()
    };
    if config.primes.len() < 2 {
        return Err(ModeError::Invalid("at least two primes are required".into()).into());
    }
    let budget = Budget { max_sector_dim: args.max_sector_dim, time_limit: args.time_limit_secs.map(Duration::from_secs) };
    let reports: Vec<_> = suites.iter().map(|s| s.run(&claims, &config, &budget)).collect();
    if args.json {
        println!("{}", serde_json::to_string_pretty(&reports)?);
    } else {
        for r in &reports {
            print!("{r}");
        }
    }
    let failed = reports.iter().any(|r| r.overall() == Overall::Fail);
    Ok(if failed { EXIT_FAILURE } else { 0 })
}

fn cache(cmd: CacheCommand) -> Result<u8> {
    match cmd {
        CacheCommand::Write { n, weight, degrees, cache_dir } => {
            let spec = AlgebraSpec::new(n).map_err(|e| ModeError::Invalid(e.to_string()))?;
            let cache = MatrixCache::new(&cache_dir)?;
            let table = std::sync::Arc::new(GeneratorTable::for_cochain_weight(spec, weight));
            for d in degrees {
                let from = SectorBasis::enumerate(&table, GeneratorScope::All, d, weight, None);
                let to = SectorBasis::enumerate(&table, GeneratorScope::All, d + 1, weight, None);
                let m = assemble_differential(&from, &to)?;
                let key = MatrixKey::differential(&from);
                cache.store(&key, &m)?;
                println!("{} {}x{} nnz={}", key.file_stem(), m.rows(), m.cols(), m.nnz());
            }
            Ok(0)
        }
        CacheCommand::Check { cache_dir } => {
            let cache = MatrixCache::new(&cache_dir)?;
            let mut bad = false;
            for (stem, ok) in cache.entries()? {
                println!("{} {stem}", if ok { "ok" } else { "stale" });
                bad |= !ok;
            }
            Ok(if bad { EXIT_FAILURE } else { 0 })
        }
        CacheCommand::Clear { cache_dir } => {
            if !cache_dir.exists() {
                bail!("no cache directory at {}", cache_dir.display());
            }
            let removed = MatrixCache::new(&cache_dir)?.clear().context("clearing cache")?;
            println!("removed {removed} files");
            Ok(0)
        }
    }
}

fn list() -> Result<u8> {
    let modes = ModeRegistry::builtin();
    println!("modes:");
    for name in modes.names() {
        println!("  {name:<14} {}", modes.get(name)?.description());
    }
    let suites = SuiteRegistry::builtin();
    println!("suites:");
    for name in suites.names() {
        let s = suites.get(name).expect("listed");
        let tag = if s.in_default() { "" } else { " (opt-in)" };
        println!("  {name:<22} {}{tag}", s.description());
    }
    Ok(0)
}
