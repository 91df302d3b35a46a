//! `unicube`: uniformity tests on `[0,1]^p` from the command line.
//!
//! Exit codes: 0 = not rejected (or success), 1 = rejected (or a failed
//! diagnostic), 2 = usage or input error.

mod diagnose;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use unicube::brownian::{default_truncation, AsymptoticNormTable};
use unicube::inference::{
    asymptotic_test, cache_file_name, m_test, s_test, Mode, NullReference, TestReport, DEFAULT_REPLICATES,
};
use unicube::power::{
    run_single, run_table, to_csv, PowerExperiment, TableId, TableOverrides, DEFAULT_POWER_REPLICATES,
    DEFAULT_TRIALS,
};
use unicube::alternatives::AlternativeSpec;
use unicube::{published, Sample, MAX_DIMENSION};

type CliResult<T> = Result<T, String>;

#[derive(Parser)]
#[command(name = "unicube", version, about = "Consistent tests of uniformity on the unit hypercube")]
struct Cli {
    /// Worker threads for null references and power trials (>= 1; default: all cores).
    /// Results do not depend on this value.
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    threads: Option<u32>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test a CSV sample for uniformity (exit 0 = not rejected, 1 = rejected).
    Test(TestArgs),
    /// Precompute a null-reference cache file.
    Null(NullArgs),
    /// Estimate power on a benchmark table or a single alternative, as CSV.
    Power(PowerArgs),
    /// Numerical self-checks of the decomposition and Brownian machinery.
    Diagnose(diagnose::DiagnoseArgs),
}

#[derive(Args)]
struct TestArgs {
    /// CSV file: one observation per row, one coordinate per column, values in [0,1].
    input: PathBuf,

    /// Skip the first line of the input.
    #[arg(long)]
    header: bool,

    /// Cardinality cutoff: subsets with 1..=h coordinates are tested (1..=p; default p).
    #[arg(long)]
    h: Option<usize>,

    /// Monte Carlo null replicates R (>= 1).
    #[arg(short = 'R', long, default_value_t = DEFAULT_REPLICATES)]
    replicates: usize,

    /// Significance level in (0, 1).
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,

    /// Seed of the null reference and asymptotic tables (any u64).
    #[arg(long, default_value_t = 1)]
    seed: u64,

    /// Test rules, comma separated: m, s, m-as, s-as.
    #[arg(long, value_delimiter = ',', default_value = "m")]
    mode: Vec<String>,

    /// Directory of cached null references (default: $UNICUBE_CACHE).
    #[arg(long, env = "UNICUBE_CACHE")]
    null_cache: Option<PathBuf>,

    /// Also write the reports as JSON lines to this file.
    #[arg(long)]
    json: Option<PathBuf>,

    /// Series truncation nu_max for the asymptotic tables (>= 1; default depends on #H).
    #[arg(long)]
    truncation: Option<usize>,

    /// Draws per asymptotic table (>= 1).
    #[arg(long, default_value_t = 10_000)]
    asymptotic_draws: usize,
}

#[derive(Args)]
struct NullArgs {
    /// Sample size n (>= 1).
    #[arg(long)]
    n: usize,

    /// Dimension p (1..=20).
    #[arg(long)]
    p: usize,

    /// Cardinality cutoff h (1..=p; default p).
    #[arg(long)]
    h: Option<usize>,

    /// Replicates R (>= 1).
    #[arg(short = 'R', long, default_value_t = DEFAULT_REPLICATES)]
    replicates: usize,

    /// Seed (any u64).
    #[arg(long, default_value_t = 1)]
    seed: u64,

    /// Output file (default: the canonical file name inside the cache directory,
    /// or the current directory).
    #[arg(long, short)]
    output: Option<PathBuf>,

    /// Cache directory (default: $UNICUBE_CACHE).
    #[arg(long, env = "UNICUBE_CACHE")]
    null_cache: Option<PathBuf>,
}

#[derive(Args)]
struct PowerArgs {
    /// Benchmark table: copulas, beta or partial.
    #[arg(long, conflicts_with = "alternative", required_unless_present = "alternative")]
    table: Option<String>,

    /// Single alternative, e.g. clayton:theta=2, beta:alpha=0.5,beta=3, normal-copula:rho=0.3,p=6.
    #[arg(long)]
    alternative: Option<String>,

    /// Sample size (>= 1). Filters the table; defaults to 50 for --alternative.
    #[arg(long)]
    n: Option<usize>,

    /// Cardinality cutoff (1..=p). Filters the table; defaults to p for --alternative.
    #[arg(long)]
    h: Option<usize>,

    /// Keep only this correlation of the partial table (0.05, 0.1, 0.15, 0.2, 0.3, 0.4).
    #[arg(long, requires = "table")]
    rho: Option<f64>,

    /// Trials per cell (>= 1; 0 with --table is a dry run emitting reference values only).
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: usize,

    /// Null replicates R (>= 1).
    #[arg(short = 'R', long, default_value_t = DEFAULT_POWER_REPLICATES)]
    replicates: usize,

    /// Seed (any u64).
    #[arg(long, default_value_t = 1)]
    seed: u64,

    /// Significance level in (0, 1).
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,

    /// Test rules, comma separated: m, s.
    #[arg(long, value_delimiter = ',', default_value = "m")]
    mode: Vec<String>,

    /// Write the CSV here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,

    /// Print the published values of --table, competitors included, and exit.
    #[arg(long, requires = "table")]
    paper_table: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads as usize).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let outcome = match cli.command {
        Command::Test(args) => cmd_test(args),
        Command::Null(args) => cmd_null(args),
        Command::Power(args) => cmd_power(args),
        Command::Diagnose(args) => diagnose::run(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn parse_modes(raw: &[String]) -> CliResult<Vec<Mode>> {
    let mut modes = Vec::new();
    for m in raw {
        let mode: Mode = m.trim().parse().map_err(|e: unicube::Error| e.to_string())?;
        if !modes.contains(&mode) {
            modes.push(mode);
        }
    }
    if modes.is_empty() {
        return Err("no test mode given".into());
    }
    Ok(modes)
}

fn check_alpha(alpha: f64) -> CliResult<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(format!("--alpha {alpha} must lie in (0, 1)"))
    }
}

fn check_shape(n: usize, p: usize, h: usize, replicates: usize) -> CliResult<()> {
    if n == 0 {
        return Err("--n must be at least 1".into());
    }
    if p == 0 || p > MAX_DIMENSION {
        return Err(format!("--p {p} outside 1..={MAX_DIMENSION}"));
    }
    if h == 0 || h > p {
        return Err(format!("--h {h} outside 1..={p}"));
    }
    if replicates == 0 {
        return Err("--replicates must be at least 1".into());
    }
    Ok(())
}

/// Reads a numeric CSV. Blank lines are skipped; row numbers in messages count
/// data rows from 1.
fn read_sample(path: &Path, header: bool) -> CliResult<Sample> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for line in text.lines().skip(usize::from(header)) {
        if line.trim().is_empty() {
            continue;
        }
        let row = rows.len() + 1;
        let values = line
            .split(',')
            .enumerate()
            .map(|(j, field)| {
                field
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| format!("row {row} column {}: '{}' is not a number", j + 1, field.trim()))
            })
            .collect::<CliResult<Vec<f64>>>()?;
        rows.push(values);
    }
    if rows.is_empty() {
        return Err(format!("{} contains no data rows", path.display()));
    }
    Sample::from_rows(&rows).map_err(|e| e.to_string())
}

/// Loads the reference from the cache directory when present, otherwise
/// builds it and stores it there.
fn null_reference(
    n: usize,
    p: usize,
    h: usize,
    replicates: usize,
    seed: u64,
    cache: Option<&Path>,
) -> CliResult<NullReference> {
    let Some(dir) = cache else {
        return NullReference::build(seed, n, p, h, replicates).map_err(|e| e.to_string());
    };
    let path = dir.join(cache_file_name(n, p, h, replicates, seed));
    if path.exists() {
        let r = NullReference::load(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        if (r.n(), r.p(), r.h(), r.replicates(), r.seed()) != (n, p, h, replicates, seed) {
            return Err(format!(
                "cache file {} holds n={} p={} h={} R={} seed={}, which does not match the request",
                path.display(),
                r.n(),
                r.p(),
                r.h(),
                r.replicates(),
                r.seed()
            ));
        }
        return Ok(r);
    }
    let r = NullReference::build(seed, n, p, h, replicates).map_err(|e| e.to_string())?;
    fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    r.save(&path).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    Ok(r)
}

fn asymptotic_tables(
    p: usize,
    seed: u64,
    truncation: Option<usize>,
    draws: usize,
    cache: Option<&Path>,
) -> CliResult<Vec<AsymptoticNormTable>> {
    (1..=p)
        .map(|k| {
            let nu_max = truncation.unwrap_or_else(|| default_truncation(k));
            let path = cache.map(|d| d.join(format!("asym_k{k}_nu{nu_max}_D{draws}_s{seed}.txt")));
            if let Some(path) = path.as_ref().filter(|p| p.exists()) {
                let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
                let t = AsymptoticNormTable::from_cache_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
                if (t.k, t.nu_max, t.draws.len(), t.seed) != (k, nu_max, draws, seed) || !t.tail_compensated {
                    return Err(format!("cache file {} does not match the request", path.display()));
                }
                return Ok(t);
            }
            let t = AsymptoticNormTable::build(seed, k, nu_max, draws).map_err(|e| e.to_string())?;
            if let (Some(path), Some(dir)) = (path, cache) {
                fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
                fs::write(&path, t.to_cache_string()).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
            }
            Ok(t)
        })
        .collect()
}

fn cmd_test(args: TestArgs) -> CliResult<u8> {
    let modes = parse_modes(&args.mode)?;
    check_alpha(args.alpha)?;
    if args.truncation == Some(0) || args.asymptotic_draws == 0 {
        return Err("--truncation and --asymptotic-draws must be at least 1".into());
    }
    let sample = read_sample(&args.input, args.header)?;
    let (n, p) = (sample.n(), sample.p());
    let h = args.h.unwrap_or(p);
    check_shape(n, p, h, args.replicates)?;
    let cache = args.null_cache.as_deref();

    let mut reports: Vec<TestReport> = Vec::new();
    if modes.iter().any(|m| !m.is_asymptotic()) {
        let reference = null_reference(n, p, h, args.replicates, args.seed, cache)?;
        for &mode in modes.iter().filter(|m| !m.is_asymptotic()) {
            let report = match mode {
                Mode::M => m_test(&sample, &reference, args.alpha),
                _ => s_test(&sample, &reference, args.alpha),
            };
            reports.push(report.map_err(|e| e.to_string())?);
        }
    }
    if modes.iter().any(|m| m.is_asymptotic()) {
        if h != p {
            return Err("asymptotic modes always use the full family; drop --h".into());
        }
        let tables = asymptotic_tables(p, args.seed, args.truncation, args.asymptotic_draws, cache)?;
        for &mode in modes.iter().filter(|m| m.is_asymptotic()) {
            reports.push(asymptotic_test(&sample, &tables, args.alpha, mode).map_err(|e| e.to_string())?);
        }
    }
    // Keep the requested order.
    reports.sort_by_key(|r| modes.iter().position(|&m| m == r.mode));

    let mut stdout = std::io::stdout().lock();
    for (i, r) in reports.iter().enumerate() {
        if i > 0 {
            writeln!(stdout).ok();
        }
        writeln!(stdout, "{r}").ok();
    }
    if let Some(path) = &args.json {
        let lines: String = reports.iter().map(|r| r.to_json_line() + "\n").collect();
        fs::write(path, lines).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    Ok(u8::from(reports.iter().any(|r| r.decision.is_reject())))
}

fn cmd_null(args: NullArgs) -> CliResult<u8> {
    let h = args.h.unwrap_or(args.p);
    check_shape(args.n, args.p, h, args.replicates)?;
    let name = cache_file_name(args.n, args.p, h, args.replicates, args.seed);
    let path = match (&args.output, &args.null_cache) {
        (Some(out), _) => out.clone(),
        (None, Some(dir)) => {
            fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
            dir.join(name)
        }
        (None, None) => PathBuf::from(name),
    };
    let reference = NullReference::build(args.seed, args.n, args.p, h, args.replicates).map_err(|e| e.to_string())?;
    reference.save(&path).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    println!("{}", path.display());
    Ok(0)
}

fn cmd_power(args: PowerArgs) -> CliResult<u8> {
    let modes = parse_modes(&args.mode)?;
    if let Some(m) = modes.iter().find(|m| m.is_asymptotic()) {
        return Err(format!("power estimation supports modes m and s, not {m}"));
    }
    check_alpha(args.alpha)?;
    if args.replicates == 0 {
        return Err("--replicates must be at least 1".into());
    }
    let csv = if let Some(table) = &args.table {
        let id: TableId = table.parse().map_err(|e: unicube::Error| e.to_string())?;
        if args.paper_table {
            print!("{}", published::reference_csv(id.as_str()).expect("known table"));
            return Ok(0);
        }
        let overrides = TableOverrides {
            trials: args.trials,
            replicates: args.replicates,
            seed: args.seed,
            alpha: args.alpha,
            modes,
            n: args.n,
            h: args.h,
            rho: args.rho,
        };
        to_csv(&run_table(id, &overrides).map_err(|e| e.to_string())?)
    } else {
        let raw = args.alternative.as_deref().expect("clap requires --table or --alternative");
        let alternative: AlternativeSpec = raw.parse().map_err(|e: unicube::Error| e.to_string())?;
        if args.trials == 0 {
            return Err("--trials must be at least 1 for a single alternative".into());
        }
        let n = args.n.unwrap_or(50);
        let experiment = PowerExperiment {
            alternative,
            n,
            trials: args.trials,
            alpha: args.alpha,
            modes,
            h: args.h.unwrap_or(alternative.p()),
            replicates: args.replicates,
            seed: args.seed,
        };
        experiment.validate().map_err(|e| e.to_string())?;
        to_csv(&run_single(&experiment).map_err(|e| e.to_string())?)
    };
    match &args.output {
        Some(path) => fs::write(path, csv).map_err(|e| format!("cannot write {}: {e}", path.display()))?,
        None => print!("{csv}"),
    }
    Ok(0)
}
