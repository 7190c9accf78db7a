use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use dtile::constructions::random_codegree_instance;
use dtile::exact::{perfect_tiling_exact, PerfectOutcome, SearchBudget};
use dtile::format::{parse_certificate, parse_instance, write_certificate, write_instance};
use dtile::rng::derive_seed;
use dtile::{
    solve_driver, validate_tiling, ConstructionKind, ConstructionSpec, DriverParams, Hypergraph3, Mode, RunReport,
    Status, Tiling,
};

const EXIT_TILED: u8 = 0;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_EXHAUSTED: u8 = 3;
const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;

#[derive(Parser)]
#[command(
    name = "dtile",
    version,
    about = "Perfect tilings of 3-graphs by K4^3 minus two edges"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated instance.
    Gen(GenArgs),
    /// Solve an instance and print a JSON report.
    Solve(SolveArgs),
    /// Check a certificate against an instance.
    Verify(VerifyArgs),
    /// Solve random instances around the n/4 codegree threshold.
    Scan(ScanArgs),
    /// Run the exact solver alone.
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    G0,
    G1,
    Sts,
    Complete,
    Random,
    Planted,
}

#[derive(clap::Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long)]
    n: usize,
    /// Minimum codegree for `random`; defaults to ceil(n/4).
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Auto,
    Extremal,
    Absorb,
    Exact,
}

#[derive(clap::Args)]
struct BudgetArgs {
    /// Node limit for exact searches.
    #[arg(long, default_value_t = 10_000_000)]
    node_limit: u64,
    /// Wall-clock limit for exact searches, in seconds.
    #[arg(long, default_value_t = 60.0)]
    time_limit: f64,
}

impl BudgetArgs {
    fn budget(&self) -> Result<SearchBudget, String> {
        let time_limit = Duration::try_from_secs_f64(self.time_limit).map_err(|e| format!("--time-limit: {e}"))?;
        Ok(SearchBudget {
            node_limit: self.node_limit,
            time_limit,
            ..SearchBudget::default()
        })
    }
}

#[derive(clap::Args)]
struct SolveArgs {
    file: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    mode: ModeArg,
    #[arg(long, default_value_t = 0.3)]
    alpha: f64,
    #[arg(long, default_value_t = 0.1)]
    gamma: f64,
    #[arg(long, default_value_t = 0.25)]
    eps: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Where to write the certificate.
    #[arg(long)]
    cert: Option<PathBuf>,
    /// Use eps = 1e-18 and alpha = eps^(1/3).
    #[arg(long, alias = "paper-constants")]
    asymptotic_constants: bool,
    /// Check absorbers against every 4-set.
    #[arg(long)]
    strict: bool,
    /// Report a stall instead of falling back to exact search.
    #[arg(long)]
    no_fallback: bool,
    /// Local-search restarts in the absorbing branch.
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    /// Include per-stage timings in the report.
    #[arg(long)]
    timings: bool,
    #[command(flatten)]
    budget: BudgetArgs,
}

#[derive(clap::Args)]
struct VerifyArgs {
    file: PathBuf,
    #[arg(long)]
    cert: PathBuf,
    /// Require the certificate to cover every vertex.
    #[arg(long)]
    perfect: bool,
}

#[derive(clap::Args)]
struct ScanArgs {
    /// `A:B:STEP`, inclusive; every n must be divisible by 4.
    #[arg(long)]
    n_range: String,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    /// Offset from n/4 of the minimum codegree.
    #[arg(long, default_value_t = 0, allow_negative_numbers = true, value_parser = clap::value_parser!(i64).range(-1..=1))]
    d_offset: i64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    budget: BudgetArgs,
}

#[derive(clap::Args)]
struct OracleArgs {
    file: PathBuf,
    #[arg(long)]
    cert: Option<PathBuf>,
    #[command(flatten)]
    budget: BudgetArgs,
}

/// An error that maps onto a specific exit code.
#[derive(Debug)]
struct Exit(u8, anyhow::Error);

fn usage(msg: impl Into<String>) -> Exit {
    Exit(EXIT_USAGE, anyhow::anyhow!(msg.into()))
}

fn data(e: anyhow::Error) -> Exit {
    Exit(EXIT_DATA, e)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Solve(a) => solve(a),
        Command::Verify(a) => verify(a),
        Command::Scan(a) => scan(a),
        Command::Oracle(a) => oracle(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Exit(code, e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}

fn read_instance(path: &Path) -> Result<Hypergraph3, Exit> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(data)?;
    parse_instance(&text)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(data)
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), Exit> {
    match path {
        Some(p) => fs::write(p, text)
            .with_context(|| format!("writing {}", p.display()))
            .map_err(|e| Exit(1, e)),
        None => {
            let _ = io::stdout().lock().write_all(text.as_bytes());
            Ok(())
        }
    }
}

/// Writes a line to standard output; a closed pipe is not an error.
fn emit(line: &str) {
    let _ = writeln!(io::stdout().lock(), "{line}");
}

fn print_json(value: &impl Serialize) -> Result<(), Exit> {
    emit(&serde_json::to_string_pretty(value).map_err(|e| Exit(1, e.into()))?);
    Ok(())
}

fn gen(a: GenArgs) -> Result<u8, Exit> {
    let kind = match a.kind {
        Kind::G0 => ConstructionKind::G0,
        Kind::G1 => ConstructionKind::G1,
        Kind::Sts => ConstructionKind::Sts,
        Kind::Complete => ConstructionKind::Complete,
        Kind::Random => ConstructionKind::RandomCodegree,
        Kind::Planted => ConstructionKind::PlantedExtremal,
    };
    let spec = ConstructionSpec {
        kind,
        n: a.n,
        seed: a.seed,
        target_codegree: a.d.unwrap_or(a.n.div_ceil(4)),
    };
    let g = spec.build().map_err(|e| usage(e.to_string()))?;
    write_out(a.out.as_deref(), &write_instance(&g))?;
    Ok(0)
}

#[derive(Serialize)]
struct Instance {
    path: String,
    n: usize,
    edges: usize,
}

#[derive(Serialize)]
struct SolveOutput {
    instance: Instance,
    certificate: Option<String>,
    /// The certificate was read back from disk and validated.
    certificate_revalidated: Option<bool>,
    #[serde(flatten)]
    report: RunReport,
}

fn status_code(s: Status) -> u8 {
    match s {
        Status::Tiled => EXIT_TILED,
        Status::Infeasible => EXIT_INFEASIBLE,
        Status::Exhausted | Status::Stalled => EXIT_EXHAUSTED,
    }
}

/// Writes `t`, reads it back and validates the parsed copy.
fn write_and_recheck(g: &Hypergraph3, t: &Tiling, path: &Path) -> Result<bool, Exit> {
    write_out(Some(path), &write_certificate(t, g.n()))?;
    let text = fs::read_to_string(path)
        .with_context(|| format!("re-reading {}", path.display()))
        .map_err(|e| Exit(1, e))?;
    let cert = parse_certificate(&text).map_err(|e| Exit(1, e.into()))?;
    Ok(validate_tiling(g, &cert.tiling, true).ok)
}

fn solve(a: SolveArgs) -> Result<u8, Exit> {
    let g = read_instance(&a.file)?;
    let mut params = DriverParams {
        mode: match a.mode {
            ModeArg::Auto => Mode::Auto,
            ModeArg::Extremal => Mode::Extremal,
            ModeArg::Absorb => Mode::Absorb,
            ModeArg::Exact => Mode::Exact,
        },
        alpha: a.alpha,
        gamma: a.gamma,
        eps: a.eps,
        seed: a.seed,
        budget: a.budget.budget().map_err(usage)?,
        strict: a.strict,
        fallback: !a.no_fallback,
        restarts: a.restarts,
        timings: a.timings,
    };
    if a.asymptotic_constants {
        log::warn!("asymptotic constants: the extremal test and absorbing stages degenerate at any feasible n");
        params = params.with_asymptotic_constants();
    }
    let solved = solve_driver(&g, &params).map_err(|e| data(e.into()))?;
    let (certificate, revalidated) = match (&solved.tiling, &a.cert) {
        (Some(t), Some(path)) => (Some(path.display().to_string()), Some(write_and_recheck(&g, t, path)?)),
        _ => (None, None),
    };
    let code = status_code(solved.report.status);
    print_json(&SolveOutput {
        instance: Instance {
            path: a.file.display().to_string(),
            n: g.n(),
            edges: g.edge_count(),
        },
        certificate,
        certificate_revalidated: revalidated,
        report: solved.report,
    })?;
    if revalidated == Some(false) {
        return Err(Exit(1, anyhow::anyhow!("written certificate failed revalidation")));
    }
    Ok(code)
}

fn verify(a: VerifyArgs) -> Result<u8, Exit> {
    let g = read_instance(&a.file)?;
    let text = fs::read_to_string(&a.cert)
        .with_context(|| format!("reading {}", a.cert.display()))
        .map_err(data)?;
    let cert = match parse_certificate(&text) {
        Ok(c) => c,
        Err(e) => {
            emit(&format!("invalid: {e}"));
            return Ok(1);
        }
    };
    let mut verdict = validate_tiling(&g, &cert.tiling, a.perfect || cert.claims_perfect);
    if !a.perfect && !cert.claims_perfect && 4 * cert.tiling.len() == g.n() {
        verdict
            .violations
            .push("header says partial but the copies cover every vertex".into());
        verdict.ok = false;
    }
    if verdict.ok {
        emit(&format!("ok: {} copies", cert.tiling.len()));
        return Ok(0);
    }
    emit(&format!("invalid: {}", verdict.violations[0]));
    for v in &verdict.violations[1..] {
        emit(&format!("  {v}"));
    }
    Ok(1)
}

fn parse_range(s: &str) -> Result<Vec<usize>, Exit> {
    let parts: Vec<&str> = s.split(':').collect();
    let nums: Vec<usize> = parts
        .iter()
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| usage(format!("--n-range {s:?}: {e}")))?;
    let [a, b, step] = nums[..] else {
        return Err(usage(format!("--n-range {s:?} must be A:B:STEP")));
    };
    if step == 0 || a > b {
        return Err(usage(format!("--n-range {s:?} needs A <= B and STEP > 0")));
    }
    let ns: Vec<usize> = (a..=b).step_by(step).collect();
    if let Some(bad) = ns.iter().find(|&&n| n == 0 || n % 4 != 0) {
        return Err(usage(format!(
            "--n-range produces n = {bad}, which is not a positive multiple of 4"
        )));
    }
    Ok(ns)
}

#[derive(Serialize)]
struct ScanRow {
    n: usize,
    d: usize,
    trials: usize,
    tiled: usize,
    infeasible: usize,
    exhausted: usize,
    stalled: usize,
    solved_fraction: f64,
    mean_ms: f64,
}

fn scan(a: ScanArgs) -> Result<u8, Exit> {
    let ns = parse_range(&a.n_range)?;
    let budget = a.budget.budget().map_err(usage)?;
    let jobs: Vec<(usize, usize)> = ns.iter().flat_map(|&n| (0..a.trials).map(move |t| (n, t))).collect();
    // results come back in (n, trial) order regardless of scheduling
    let results: Vec<Result<(Status, f64), Exit>> = jobs
        .par_iter()
        .map(|&(n, trial)| {
            let d = (n / 4).checked_add_signed(a.d_offset as isize).unwrap_or(0);
            let seed = derive_seed(derive_seed(a.seed, n as u64), trial as u64);
            let start = Instant::now();
            let inst = random_codegree_instance(n, d, seed).map_err(|e| data(e.into()))?;
            let params = DriverParams {
                seed,
                budget,
                ..DriverParams::default()
            };
            let s = solve_driver(&inst.graph, &params).map_err(|e| data(e.into()))?;
            Ok((s.report.status, start.elapsed().as_secs_f64() * 1e3))
        })
        .collect();
    let mut it = results.into_iter();
    for &n in &ns {
        let d = (n / 4).checked_add_signed(a.d_offset as isize).unwrap_or(0);
        let mut row = ScanRow {
            n,
            d,
            trials: a.trials,
            tiled: 0,
            infeasible: 0,
            exhausted: 0,
            stalled: 0,
            solved_fraction: 0.0,
            mean_ms: 0.0,
        };
        let mut total_ms = 0.0;
        for r in it.by_ref().take(a.trials) {
            let (status, ms) = r?;
            total_ms += ms;
            match status {
                Status::Tiled => row.tiled += 1,
                Status::Infeasible => row.infeasible += 1,
                Status::Exhausted => row.exhausted += 1,
                Status::Stalled => row.stalled += 1,
            }
        }
        if a.trials > 0 {
            row.solved_fraction = row.tiled as f64 / a.trials as f64;
            row.mean_ms = total_ms / a.trials as f64;
        }
        emit(&serde_json::to_string(&row).map_err(|e| Exit(1, e.into()))?);
    }
    Ok(0)
}

#[derive(Serialize)]
struct OracleOutput {
    n: usize,
    edges: usize,
    status: Status,
    nodes: u64,
    certificate: Option<String>,
}

fn oracle(a: OracleArgs) -> Result<u8, Exit> {
    let g = read_instance(&a.file)?;
    let budget = a.budget.budget().map_err(usage)?;
    let res = perfect_tiling_exact(&g, &budget).map_err(|e| data(e.into()))?;
    let mut certificate = None;
    let status = match res.outcome {
        PerfectOutcome::Tiled(t) => {
            if let Some(path) = &a.cert {
                if !write_and_recheck(&g, &t, path)? {
                    return Err(Exit(1, anyhow::anyhow!("written certificate failed revalidation")));
                }
                certificate = Some(path.display().to_string());
            }
            Status::Tiled
        }
        PerfectOutcome::Infeasible => Status::Infeasible,
        PerfectOutcome::Exhausted => Status::Exhausted,
    };
    print_json(&OracleOutput {
        n: g.n(),
        edges: g.edge_count(),
        status,
        nodes: res.nodes,
        certificate,
    })?;
    Ok(status_code(status))
}
