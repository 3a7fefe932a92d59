//! The `aseo` command-line surface: solve/rank programs, generate
//! instances, answer Bayesian queries, and run benchmark sweeps.
//!
//! Exit codes for `solve`: 0 with at least one model, 1 on parse or I/O
//! errors, 2 when the program has no answer sets. Text mode prints one
//! line per model (the cost vector in angle brackets, then the sorted
//! atom names) and keeps diagnostics on stderr so outputs stay diffable.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bayes::{approximate_query, load_network, relevant_subnetwork, QuerySpec};
use crate::enumerate::{naive_enumerate, smart_enumerate, weight_enumerate, ConstraintFrame, RankedModel};
use crate::generate::{pn_program, random_program};
use crate::parse::parse_program;
use crate::program::Program;
use crate::solver::{Branching, SearchConfig};

const DEFAULT_TIMEOUT_SECS: f64 = 1800.0;

#[derive(Parser)]
#[command(name = "aseo", version, about = "Answer set enumeration in objective order")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate the answer sets of a program in cost order.
    Solve(SolveArgs),
    /// Emit generated programs.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Approximate a query on a Boolean Bayesian network.
    Bayes(BayesArgs),
    /// Run a mode-by-k benchmark sweep and report a CSV table.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Naive,
    Weight,
    Smart,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Naive => "naive",
            Mode::Weight => "weight",
            Mode::Smart => "smart",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct SolveArgs {
    /// Program file (.lp).
    file: PathBuf,
    #[arg(long, value_enum)]
    mode: Mode,
    /// Emit at most this many models.
    #[arg(short)]
    k: Option<usize>,
    /// Emit every model (unavailable in smart mode).
    #[arg(long)]
    all: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Wall-clock budget in seconds; on expiry the partial output is
    /// flagged and the run ends cleanly.
    #[arg(long, default_value_t = DEFAULT_TIMEOUT_SECS)]
    timeout: f64,
    /// Shuffle the branching order deterministically.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum GenCommand {
    /// The worst-case family with 2^(2n-1) answer sets over 2^n values.
    Pn {
        #[arg(long)]
        n: u32,
    },
    /// A seeded random instance.
    Random {
        #[arg(long)]
        atoms: usize,
        #[arg(long)]
        rules: usize,
        #[arg(long, default_value_t = 1)]
        levels: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct BayesArgs {
    /// Network file (JSON).
    file: PathBuf,
    #[arg(long)]
    query: String,
    /// Evidence as `name=true` or `name=false`; repeatable.
    #[arg(long = "evidence")]
    evidence: Vec<String>,
    /// Ranked assignments per query branch.
    #[arg(short, default_value_t = 1000)]
    k: usize,
    /// Integer scale applied to -ln(p) CPT weights.
    #[arg(long, default_value_t = 1_000_000)]
    scale: u64,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct BenchArgs {
    /// A directory of .lp files, or a generator spec like `pn:4-8`.
    source: String,
    /// Comma-separated modes to run.
    #[arg(long, default_value = "weight,smart")]
    modes: String,
    /// Comma-separated k values, one column each.
    #[arg(long = "k-sweep", default_value = "10,100,1000,10000")]
    k_sweep: String,
    /// Per-cell budget in seconds.
    #[arg(long, default_value_t = DEFAULT_TIMEOUT_SECS)]
    timeout: f64,
    /// Concurrent cells.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Output CSV path; `-` for stdout.
    #[arg(long, default_value = "-")]
    out: String,
}

/// Parses `std::env::args` and runs; returns the process exit code.
pub fn run() -> i32 {
    run_from(std::env::args())
}

/// Testable entry point taking explicit arguments.
pub fn run_from(args: impl IntoIterator<Item = String>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Gen(args) => cmd_gen(args),
        Command::Bayes(args) => cmd_bayes(args),
        Command::Bench(args) => cmd_bench(args),
    }
}

#[derive(Serialize)]
struct ModelRecord {
    atoms: Vec<String>,
    cost: Vec<u64>,
}

#[derive(Serialize)]
struct FrameRecord {
    eqs: Vec<(u32, u64)>,
    gt: Option<(u32, u64)>,
}

#[derive(Serialize)]
struct SolverStats {
    decisions: u64,
    conflicts: u64,
}

#[derive(Serialize)]
struct RunReport {
    mode: String,
    k: Option<usize>,
    count: usize,
    timed_out: bool,
    models: Vec<ModelRecord>,
    summary: SolverStats,
    wall_ms: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    frames: Option<Vec<FrameRecord>>,
}

fn model_record(program: &Program, ranked: &RankedModel) -> ModelRecord {
    ModelRecord {
        atoms: ranked.model.names(program).into_iter().map(str::to_string).collect(),
        cost: ranked.cost.values().to_vec(),
    }
}

fn model_line(program: &Program, ranked: &RankedModel) -> String {
    let mut line = ranked.cost.to_string();
    for name in ranked.model.names(program) {
        let _ = write!(line, " {name}");
    }
    line
}

fn cmd_solve(args: SolveArgs) -> i32 {
    let k = match (args.k, args.all) {
        (Some(_), true) => {
            eprintln!("error: pass either -k or --all, not both");
            return 1;
        }
        (None, false) => {
            eprintln!("error: pass -k <N> or --all");
            return 1;
        }
        (k, _) => k,
    };
    if args.mode == Mode::Smart && k.is_none() {
        eprintln!("error: smart mode needs a finite -k; its window is undefined with --all");
        return 1;
    }
    let source = match std::fs::read_to_string(&args.file) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.file.display());
            return 1;
        }
    };
    let parse_started = Instant::now();
    let program = match parse_program(&source) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let parse_ms = parse_started.elapsed().as_secs_f64() * 1000.0;

    let config = SearchConfig {
        branching: match args.seed {
            Some(seed) => Branching::Shuffled { seed },
            None => Branching::Fixed,
        },
        oracle_verify: None,
        deadline: Some(Instant::now() + Duration::from_secs_f64(args.timeout)),
    };

    let text = args.format == Format::Text;
    let solve_started = Instant::now();
    let mut models: Vec<RankedModel> = Vec::new();
    let mut frames: Option<Vec<ConstraintFrame>> = None;
    let (stats, timed_out) = match args.mode {
        Mode::Naive => match naive_enumerate(&program, k, &config) {
            Ok(out) => {
                models = out.models;
                (
                    SolverStats {
                        decisions: out.summary.decisions,
                        conflicts: out.summary.conflicts,
                    },
                    out.summary.timed_out,
                )
            }
            Err(e) => {
                eprintln!("error: {e}");
                return 1;
            }
        },
        Mode::Smart => match smart_enumerate(&program, k.unwrap(), &config) {
            Ok(out) => {
                models = out.models;
                (
                    SolverStats {
                        decisions: out.summary.decisions,
                        conflicts: out.summary.conflicts,
                    },
                    out.summary.timed_out,
                )
            }
            Err(e) => {
                eprintln!("error: {e}");
                return 1;
            }
        },
        Mode::Weight => {
            let result = weight_enumerate(&program, k, &config, |ranked| {
                if text {
                    println!("{}", model_line(&program, &ranked));
                }
                models.push(ranked);
            });
            match result {
                Ok(out) => {
                    frames = Some(out.frames);
                    (
                        SolverStats { decisions: out.decisions, conflicts: out.conflicts },
                        out.timed_out,
                    )
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    return 1;
                }
            }
        }
    };
    let solve_ms = solve_started.elapsed().as_secs_f64() * 1000.0;

    if text {
        if args.mode != Mode::Weight {
            for ranked in &models {
                println!("{}", model_line(&program, ranked));
            }
        }
        eprintln!(
            "% models: {}, decisions: {}, conflicts: {}",
            models.len(),
            stats.decisions,
            stats.conflicts
        );
        if timed_out {
            eprintln!("% timeout: output is partial");
        }
    } else {
        let report = RunReport {
            mode: args.mode.name().to_string(),
            k,
            count: models.len(),
            timed_out,
            models: models.iter().map(|r| model_record(&program, r)).collect(),
            summary: stats,
            wall_ms: BTreeMap::from([("parse".to_string(), parse_ms), ("solve".to_string(), solve_ms)]),
            frames: frames.map(|fs| {
                fs.into_iter().map(|f| FrameRecord { eqs: f.eqs, gt: f.gt }).collect()
            }),
        };
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    }
    if models.is_empty() {
        2
    } else {
        0
    }
}

fn cmd_gen(command: GenCommand) -> i32 {
    match command {
        GenCommand::Pn { n } => match pn_program(n) {
            Ok(text) => {
                print!("{text}");
                0
            }
            Err(e) => {
                eprintln!("error: {e}");
                1
            }
        },
        GenCommand::Random { atoms, rules, levels, seed } => {
            print!("{}", random_program(atoms, rules, levels, seed));
            0
        }
    }
}

fn parse_evidence(pairs: &[String]) -> Result<BTreeMap<String, bool>, String> {
    let mut evidence = BTreeMap::new();
    for pair in pairs {
        let Some((name, value)) = pair.split_once('=') else {
            return Err(format!("evidence `{pair}` is not of the form name=true|false"));
        };
        let value = match value {
            "true" => true,
            "false" => false,
            other => return Err(format!("evidence value `{other}` must be true or false")),
        };
        if evidence.insert(name.to_string(), value).is_some() {
            return Err(format!("evidence names `{name}` twice"));
        }
    }
    Ok(evidence)
}

fn cmd_bayes(args: BayesArgs) -> i32 {
    let source = match std::fs::read_to_string(&args.file) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.file.display());
            return 1;
        }
    };
    let net = match load_network(&source) {
        Ok(n) => n,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let evidence = match parse_evidence(&args.evidence) {
        Ok(e) => e,
        Err(msg) => {
            eprintln!("error: {msg}");
            return 1;
        }
    };
    let spec = QuerySpec::new(args.query, evidence);
    let estimate = spec
        .validate(&net)
        .and_then(|()| relevant_subnetwork(&net, &spec))
        .and_then(|sub| {
            let restricted = spec.restricted_to(&sub);
            approximate_query(&sub, &restricted, args.k, args.scale)
        });
    match estimate {
        Ok(est) => {
            match args.format {
                Format::Json => {
                    println!("{}", serde_json::to_string_pretty(&est).expect("estimate serializes"))
                }
                Format::Text => {
                    println!("posterior: {:.6}", est.posterior);
                    println!("mass: true {:.6e} false {:.6e}", est.mass_true, est.mass_false);
                    println!(
                        "assignments: true {} false {} (k = {}, scale = {})",
                        est.assignments_true, est.assignments_false, est.k, est.scale
                    );
                }
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

struct BenchInstance {
    name: String,
    program: Program,
}

fn bench_instances(source: &str) -> Result<Vec<BenchInstance>, String> {
    if let Some(spec) = source.strip_prefix("pn:") {
        let (lo, hi) = match spec.split_once('-') {
            Some((a, b)) => (
                a.parse::<u32>().map_err(|_| format!("bad generator spec `{source}`"))?,
                b.parse::<u32>().map_err(|_| format!("bad generator spec `{source}`"))?,
            ),
            None => {
                let n = spec.parse::<u32>().map_err(|_| format!("bad generator spec `{source}`"))?;
                (n, n)
            }
        };
        let mut out = Vec::new();
        for n in lo..=hi {
            let text = pn_program(n).map_err(|e| e.to_string())?;
            let program = parse_program(&text).map_err(|e| e.to_string())?;
            out.push(BenchInstance { name: format!("pn{n}"), program });
        }
        return Ok(out);
    }
    let dir = PathBuf::from(source);
    let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)
        .map_err(|e| format!("cannot read {source}: {e}"))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "lp"))
        .collect();
    files.sort();
    let mut out = Vec::new();
    for path in files {
        let text =
            std::fs::read_to_string(&path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let program =
            parse_program(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        out.push(BenchInstance { name, program });
    }
    Ok(out)
}

#[derive(Clone, Copy)]
struct CellResult {
    seconds: f64,
    timed_out: bool,
}

fn run_cell(program: &Program, mode: Mode, k: usize, timeout: Duration) -> CellResult {
    let config = SearchConfig { deadline: Some(Instant::now() + timeout), ..Default::default() };
    let started = Instant::now();
    let timed_out = match mode {
        Mode::Naive => naive_enumerate(program, Some(k), &config)
            .map(|out| out.summary.timed_out)
            .unwrap_or(true),
        Mode::Weight => weight_enumerate(program, Some(k), &config, |_| {})
            .map(|out| out.timed_out)
            .unwrap_or(true),
        Mode::Smart => smart_enumerate(program, k, &config)
            .map(|out| out.summary.timed_out)
            .unwrap_or(true),
    };
    CellResult { seconds: started.elapsed().as_secs_f64(), timed_out }
}

fn cmd_bench(args: BenchArgs) -> i32 {
    let instances = match bench_instances(&args.source) {
        Ok(i) => i,
        Err(msg) => {
            eprintln!("error: {msg}");
            return 1;
        }
    };
    let modes: Vec<Mode> = match args
        .modes
        .split(',')
        .filter(|s| !s.is_empty())
        .map(|s| match s.trim() {
            "naive" => Ok(Mode::Naive),
            "weight" => Ok(Mode::Weight),
            "smart" => Ok(Mode::Smart),
            other => Err(format!("unknown mode `{other}`")),
        })
        .collect()
    {
        Ok(m) => m,
        Err(msg) => {
            eprintln!("error: {msg}");
            return 1;
        }
    };
    let ks: Vec<usize> = match args
        .k_sweep
        .split(',')
        .filter(|s| !s.is_empty())
        .map(|s| s.trim().parse::<usize>().map_err(|_| format!("bad k `{s}`")))
        .collect()
    {
        Ok(ks) => ks,
        Err(msg) => {
            eprintln!("error: {msg}");
            return 1;
        }
    };
    let timeout = Duration::from_secs_f64(args.timeout);
    let jobs = args.jobs.max(1);

    // Every (instance, mode, k) is one independent cell.
    let mut cells: Vec<(usize, usize, usize)> = Vec::new();
    for i in 0..instances.len() {
        for m in 0..modes.len() {
            for kx in 0..ks.len() {
                cells.push((i, m, kx));
            }
        }
    }
    let results: Mutex<Vec<Option<CellResult>>> = Mutex::new(vec![None; cells.len()]);
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(cells.len().max(1)) {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(i, m, kx)) = cells.get(idx) else { break };
                let cell = run_cell(&instances[i].program, modes[m], ks[kx], timeout);
                results.lock().unwrap()[idx] = Some(cell);
            });
        }
    });
    let results = results.into_inner().unwrap();

    let mut csv = String::new();
    let k_headers: Vec<String> = ks.iter().map(|k| format!("k{k}")).collect();
    let _ = writeln!(csv, "instance,mode,atoms,{},timeouts", k_headers.join(","));
    for (i, instance) in instances.iter().enumerate() {
        for (m, mode) in modes.iter().enumerate() {
            let mut row = format!("{},{},{}", instance.name, mode.name(), instance.program.atom_count());
            let mut timeouts = 0usize;
            for kx in 0..ks.len() {
                let idx = (i * modes.len() + m) * ks.len() + kx;
                let cell = results[idx].expect("cell ran");
                if cell.timed_out {
                    timeouts += 1;
                    let _ = write!(row, ",TO");
                } else {
                    let _ = write!(row, ",{:.4}", cell.seconds);
                }
            }
            let _ = writeln!(csv, "{row},{timeouts}");
        }
    }
    if !instances.is_empty() {
        for (m, mode) in modes.iter().enumerate() {
            let mut row = format!("avg,{},", mode.name());
            let mut timeouts = 0usize;
            for kx in 0..ks.len() {
                let mut total = 0.0;
                for i in 0..instances.len() {
                    let idx = (i * modes.len() + m) * ks.len() + kx;
                    let cell = results[idx].expect("cell ran");
                    total += if cell.timed_out { timeout.as_secs_f64() } else { cell.seconds };
                    timeouts += cell.timed_out as usize;
                }
                let _ = write!(row, ",{:.4}", total / instances.len() as f64);
            }
            let _ = writeln!(csv, "{row},{timeouts}");
        }
    }

    if args.out == "-" {
        print!("{csv}");
        0
    } else {
        match std::fs::File::create(&args.out).and_then(|mut f| f.write_all(csv.as_bytes())) {
            Ok(()) => 0,
            Err(e) => {
                eprintln!("error: cannot write {}: {e}", args.out);
                1
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evidence_parsing() {
        let e = parse_evidence(&["a=true".into(), "b=false".into()]).unwrap();
        assert_eq!(e.get("a"), Some(&true));
        assert_eq!(e.get("b"), Some(&false));
        assert!(parse_evidence(&["a".into()]).is_err());
        assert!(parse_evidence(&["a=yes".into()]).is_err());
        assert!(parse_evidence(&["a=true".into(), "a=false".into()]).is_err());
    }

    #[test]
    fn generator_specs() {
        let instances = bench_instances("pn:1-2").unwrap();
        assert_eq!(instances.len(), 2);
        assert_eq!(instances[0].name, "pn1");
        assert_eq!(instances[1].name, "pn2");
        let single = bench_instances("pn:3").unwrap();
        assert_eq!(single.len(), 1);
        assert!(bench_instances("pn:x").is_err());
    }
}
