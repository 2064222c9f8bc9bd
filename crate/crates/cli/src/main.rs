//! `abl` — trace-driven experiment runner and verification harness for
//! adaptive binary search trees with a flat restructuring charge.
//!
//! Exit codes: 0 success, 1 verification check failed, 2 usage or parse
//! error.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use abl_cli::output::{adversary_csv, OracleComparisons, OracleJson, ScheduleJson, TranscriptJson};
use abl_cli::verify::{run_suite, VerifyReport};
use abl_core::adversary::{deepest_node_adversary, matching_adversary};
use abl_core::builders::{mehlhorn_build, optimal_static, FrequencyTable};
use abl_core::cost::{schedule_cost, CostSpec, Model, Schedule, Stage};
use abl_core::offline::{offline_all_to_all, offline_single_source};
use abl_core::online::{
    run_online, BudgetRunner, BudgetSemantics, BuilderKind, OnlinePolicy, StaticRunner, SummarizerKind,
};
use abl_core::oracle::exact_opt;
use abl_core::trace::{generate, TraceFile, TraceKind};
use abl_core::tree::{Tree, TreeCode};
use abl_core::CostParams;

const DEFAULT_SEED: u64 = 0xAB1;

#[derive(Parser)]
#[command(name = "abl", version, about = "Adaptive BSTs with a flat restructuring charge: runner and verifier")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a trace file.
    GenTrace(GenTraceArgs),
    /// Run an algorithm over a trace and emit its cost report.
    Run(RunArgs),
    /// Run a verification suite; exits 1 if any check fails.
    Verify(VerifyArgs),
    /// Exact small-instance optimum for a trace.
    Oracle(OracleArgs),
    /// Drive an adaptive adversary against an online algorithm.
    Adversary(AdversaryArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Ss,
    A2a,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Model {
        match m {
            ModelArg::Ss => Model::SingleSource,
            ModelArg::A2a => Model::AllToAll,
        }
    }
}

#[derive(Args)]
struct GenTraceArgs {
    /// round_robin | fixed_source | uniform_random | zipf[:s]
    #[arg(long)]
    kind: String,
    #[arg(long, value_enum, default_value = "ss")]
    model: ModelArg,
    #[arg(long)]
    n: u32,
    #[arg(long)]
    m: usize,
    /// Reconfiguration cost written into the header: number or profile
    /// (const:k, log2n, sqrtn, n).
    #[arg(long, default_value = "4")]
    c: String,
    /// Generator seed; defaults to ABL_SEED or a fixed constant.
    #[arg(long)]
    seed: Option<u64>,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Offline,
    OnlineBudget,
    StaticMehlhorn,
    StaticOpt,
}

#[derive(Args)]
struct RunArgs {
    /// Trace file path.
    #[arg(long)]
    trace: PathBuf,
    #[arg(long, value_enum, default_value = "offline")]
    algo: AlgoArg,
    /// Cross-checked against the trace header when given.
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    /// Override the header's reconfiguration cost.
    #[arg(long)]
    c: Option<String>,
    /// Summarizer: freq or freq:W (sliding window of W requests).
    #[arg(long, default_value = "freq")]
    q: String,
    /// Builder: mehlhorn | opt | freq-root.
    #[arg(long, default_value = "mehlhorn")]
    g: String,
    /// Sliding window length (same as --q freq:W).
    #[arg(long)]
    window: Option<usize>,
    /// Budget accounting: consumed | leftover.
    #[arg(long, default_value = "consumed")]
    semantics: String,
    /// Initial tree as a preorder code (online runs; balanced default).
    #[arg(long)]
    initial: Option<String>,
    /// Write the stage decomposition as JSON.
    #[arg(long)]
    schedule: Option<PathBuf>,
    /// Write the online event log as JSONL.
    #[arg(long)]
    events: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// offline-ss | offline-a2a | entropy | oracle | adversary | properties | all
    #[arg(long)]
    suite: String,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    trace: PathBuf,
    /// Also report block-partition, static and online costs on the trace.
    #[arg(long)]
    compare: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum AdversaryKind {
    Deepest,
    Matching,
}

#[derive(Clone, Copy, ValueEnum)]
enum OpponentArg {
    OnlineBudget,
    StaticBalanced,
}

#[derive(Args)]
struct AdversaryArgs {
    #[arg(long, value_enum)]
    kind: AdversaryKind,
    #[arg(long, value_enum, default_value = "online-budget")]
    algo: OpponentArg,
    #[arg(long)]
    n: u32,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    c: String,
    /// Per-request CSV output path.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write the emitted request sequence as a trace file.
    #[arg(long)]
    trace_out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::GenTrace(args) => gen_trace(args),
        Command::Run(args) => run(args),
        Command::Verify(args) => verify(args),
        Command::Oracle(args) => oracle(args),
        Command::Adversary(args) => adversary(args),
    }
}

fn env_seed() -> u64 {
    std::env::var("ABL_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(DEFAULT_SEED)
}

fn gen_trace(args: GenTraceArgs) -> Result<ExitCode, String> {
    let kind: TraceKind = args.kind.parse().map_err(|e| format!("{e}"))?;
    let c_spec: CostSpec = args.c.parse().map_err(|e| format!("{e}"))?;
    let seed = args.seed.unwrap_or_else(env_seed);
    let seq = generate(kind, args.model.into(), args.n, args.m, seed).map_err(|e| format!("{e}"))?;
    let trace = TraceFile::new(c_spec, seq);
    match args.out {
        Some(path) => fs::write(&path, trace.to_text()).map_err(|e| format!("writing {}: {e}", path.display()))?,
        None => print!("{}", trace.to_text()),
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_policy(args: &RunArgs) -> Result<OnlinePolicy, String> {
    let window = match (args.q.as_str(), args.window) {
        ("freq", w) => w,
        (q, explicit) => {
            let w = q
                .strip_prefix("freq:")
                .ok_or_else(|| format!("unknown summarizer {q:?}; expected freq or freq:W"))?
                .parse::<usize>()
                .map_err(|e| format!("bad window in {q:?}: {e}"))?;
            if explicit.is_some_and(|e| e != w) {
                return Err("conflicting --q freq:W and --window".into());
            }
            Some(w)
        }
    };
    let builder = match args.g.as_str() {
        "mehlhorn" => BuilderKind::Mehlhorn,
        "opt" => BuilderKind::OptimalDp,
        "freq-root" => BuilderKind::FrequentRoot,
        other => return Err(format!("unknown builder {other:?}; expected mehlhorn, opt or freq-root")),
    };
    let semantics = match args.semantics.as_str() {
        "consumed" => BudgetSemantics::Consumed,
        "leftover" => BudgetSemantics::Leftover,
        other => return Err(format!("unknown semantics {other:?}; expected consumed or leftover")),
    };
    Ok(OnlinePolicy { summarizer: SummarizerKind::Frequency { window }, builder, semantics })
}

fn load_trace(path: &PathBuf) -> Result<TraceFile, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("reading {}: {e}", path.display()))?;
    text.parse().map_err(|e| format!("{e}"))
}

fn run(args: RunArgs) -> Result<ExitCode, String> {
    let trace = load_trace(&args.trace)?;
    if let Some(model) = args.model {
        if Model::from(model) != trace.seq.model {
            return Err(format!("--model disagrees with trace header model {:?}", trace.seq.model));
        }
    }
    let params = match &args.c {
        Some(spec) => {
            let spec: CostSpec = spec.parse().map_err(|e| format!("{e}"))?;
            CostParams::from_spec(trace.seq.n, &spec)
        }
        None => trace.params(),
    };
    if params.exceeds_model_assumption() {
        eprintln!("warning: C(n) = {} exceeds n = {}; the analysis assumes C(n) <= n", params.c, params.n);
    }

    let (schedule, report, events) = match args.algo {
        AlgoArg::Offline => {
            let (schedule, report) = match trace.seq.model {
                Model::SingleSource => offline_single_source(&trace.seq, &params).map_err(|e| format!("{e}"))?,
                Model::AllToAll => offline_all_to_all(&trace.seq, &params).map_err(|e| format!("{e}"))?,
            };
            (schedule, report, None)
        }
        AlgoArg::OnlineBudget => {
            let policy = parse_policy(&args)?;
            let initial = match &args.initial {
                Some(code) => {
                    let code: TreeCode = code.parse().map_err(|e| format!("{e}"))?;
                    Tree::from_code(&code).map_err(|e| format!("{e}"))?
                }
                None => Tree::balanced(trace.seq.n).map_err(|e| format!("{e}"))?,
            };
            let out = run_online(&trace.seq, policy, &params, initial).map_err(|e| format!("{e}"))?;
            (out.schedule, out.report, Some(out.events))
        }
        AlgoArg::StaticMehlhorn | AlgoArg::StaticOpt => {
            let table = FrequencyTable::from_sequence(&trace.seq);
            let tree = match args.algo {
                AlgoArg::StaticMehlhorn => mehlhorn_build(&table).map_err(|e| format!("{e}"))?,
                _ => optimal_static(&table).map_err(|e| format!("{e}"))?.0,
            };
            let schedule = Schedule { stages: vec![Stage { tree, len: trace.seq.len() }] };
            let report = schedule_cost(&trace.seq, &schedule, &params).map_err(|e| format!("{e}"))?;
            (schedule, report, None)
        }
    };

    if let Some(path) = &args.schedule {
        let json = serde_json::to_string_pretty(&ScheduleJson::from(&schedule)).unwrap();
        fs::write(path, json).map_err(|e| format!("writing {}: {e}", path.display()))?;
    }
    if let Some(path) = &args.events {
        let events = events.ok_or("--events only applies to --algo online-budget")?;
        let mut file = fs::File::create(path).map_err(|e| format!("writing {}: {e}", path.display()))?;
        for event in &events {
            writeln!(file, "{}", event.to_json()).map_err(|e| format!("writing {}: {e}", path.display()))?;
        }
    }
    println!("{}", serde_json::to_string(&report).unwrap());
    Ok(ExitCode::SUCCESS)
}

fn print_report_table(report: &VerifyReport, elapsed_ms: u128) {
    eprintln!("suite {} — {} checks, {} metrics, {} ms", report.suite, report.checks.len(), report.metrics.len(), elapsed_ms);
    for check in &report.checks {
        let rel = match check.relation {
            abl_cli::verify::Relation::Le => "<=",
            abl_cli::verify::Relation::Ge => ">=",
            abl_cli::verify::Relation::Gt => ">",
            abl_cli::verify::Relation::Eq => "==",
        };
        eprintln!(
            "  [{}] {} {} {} {}  ({})",
            if check.pass { "PASS" } else { "FAIL" },
            check.name,
            check.measured,
            rel,
            check.bound,
            check.instance
        );
    }
    for metric in &report.metrics {
        eprintln!("  (metric) {} = {}  ({})", metric.name, metric.value, metric.instance);
    }
}

fn verify(args: VerifyArgs) -> Result<ExitCode, String> {
    let seed = args.seed.unwrap_or_else(env_seed);
    let suites: Vec<&str> = if args.suite == "all" {
        abl_cli::verify::SUITES.to_vec()
    } else {
        vec![args.suite.as_str()]
    };
    let mut all_pass = true;
    let mut reports = Vec::new();
    for suite in suites {
        let start = Instant::now();
        let report = run_suite(suite, seed)?;
        print_report_table(&report, start.elapsed().as_millis());
        all_pass &= report.pass;
        reports.push(report);
    }
    for report in &reports {
        println!("{}", serde_json::to_string(report).unwrap());
    }
    Ok(if all_pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn oracle(args: OracleArgs) -> Result<ExitCode, String> {
    let trace = load_trace(&args.trace)?;
    let params = trace.params();
    let (cost, schedule) = exact_opt(&trace.seq, &params).map_err(|e| format!("{e}"))?;
    let comparisons = if args.compare {
        let (_, alg1) = match trace.seq.model {
            Model::SingleSource => offline_single_source(&trace.seq, &params).map_err(|e| format!("{e}"))?,
            Model::AllToAll => offline_all_to_all(&trace.seq, &params).map_err(|e| format!("{e}"))?,
        };
        let table = FrequencyTable::from_sequence(&trace.seq);
        let static_cost = |tree: &Tree| -> Result<f64, String> {
            let schedule = Schedule { stages: vec![Stage { tree: tree.clone(), len: trace.seq.len() }] };
            Ok(schedule_cost(&trace.seq, &schedule, &params).map_err(|e| format!("{e}"))?.total)
        };
        let mehlhorn = static_cost(&mehlhorn_build(&table).map_err(|e| format!("{e}"))?)?;
        let opt = static_cost(&optimal_static(&table).map_err(|e| format!("{e}"))?.0)?;
        let online = run_online(
            &trace.seq,
            OnlinePolicy::default(),
            &params,
            Tree::balanced(trace.seq.n).map_err(|e| format!("{e}"))?,
        )
        .map_err(|e| format!("{e}"))?;
        Some(OracleComparisons {
            block_partition: alg1.total,
            static_mehlhorn: mehlhorn,
            static_opt: opt,
            online_budget: online.report.total,
        })
    } else {
        None
    };
    let out = OracleJson { cost, schedule: ScheduleJson::from(&schedule), comparisons };
    println!("{}", serde_json::to_string(&out).unwrap());
    Ok(ExitCode::SUCCESS)
}

fn adversary(args: AdversaryArgs) -> Result<ExitCode, String> {
    let c_spec: CostSpec = args.c.parse().map_err(|e| format!("{e}"))?;
    let params = CostParams::from_spec(args.n, &c_spec);
    let policy = OnlinePolicy::default();

    let run = |alg: &mut dyn abl_core::online::OnlineAlgorithm| match args.kind {
        AdversaryKind::Deepest => deepest_node_adversary(alg, args.n, args.m, &params),
        AdversaryKind::Matching => matching_adversary(alg, args.n, args.m, &params),
    };
    let transcript = match args.algo {
        OpponentArg::OnlineBudget => {
            let mut alg = BudgetRunner::balanced_start(params, policy).map_err(|e| format!("{e}"))?;
            run(&mut alg).map_err(|e| format!("{e}"))?
        }
        OpponentArg::StaticBalanced => {
            let mut alg = StaticRunner::new(Tree::balanced(args.n).map_err(|e| format!("{e}"))?);
            run(&mut alg).map_err(|e| format!("{e}"))?
        }
    };

    if let Some(path) = &args.csv {
        fs::write(path, adversary_csv(&transcript, params.c))
            .map_err(|e| format!("writing {}: {e}", path.display()))?;
    }
    if let Some(path) = &args.trace_out {
        let trace = TraceFile::new(c_spec.clone(), transcript.sequence.clone());
        fs::write(path, trace.to_text()).map_err(|e| format!("writing {}: {e}", path.display()))?;
    }
    let kind = match args.kind {
        AdversaryKind::Deepest => "deepest",
        AdversaryKind::Matching => "matching",
    };
    let json = TranscriptJson::new(kind, args.n, args.m, params.c, &transcript);
    println!("{}", serde_json::to_string(&json).unwrap());
    Ok(ExitCode::SUCCESS)
}
