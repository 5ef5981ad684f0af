mod dot;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use tracing_subscriber::EnvFilter;

use dctforge_core::circuit::parse_expr;
use dctforge_core::detect::oracle_dct;
use dctforge_core::trojanlab::parse_edges;
use dctforge_core::{
    compute_dct, detect_trojan, gen_random_fsm, inject_trojan, oracle_analyze, parse_blif, parse_rtl, print_rtl,
    Circuit, Depth, ExploreConfig, ExprStore, FsmParams, Mode, PayloadSpec, SolverLimits, StateSpec,
    TriggerSpec, Verdict,
};

const EXIT_OK: u8 = 0;
const EXIT_ERROR: u8 = 1;
const EXIT_DCT: u8 = 2;
const EXIT_TROJAN: u8 = 3;

#[derive(Parser)]
#[command(name = "dctforge", version, about = "Find don't-care transitions and the Trojans they can trigger")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute reachable states, transitions and don't-care transitions.
    Analyze(AnalyzeArgs),
    /// Three-stage Trojan detection.
    Trojan(TrojanArgs),
    /// Emit the state-transition graph as DOT.
    Stg(StgArgs),
    /// Brute-force reference analysis, compared against the symbolic engine.
    Oracle(OracleArgs),
    /// Insert a DCT-triggered Trojan into a circuit.
    Inject(InjectArgs),
    /// Generate a random FSM with a known number of DCTs.
    Gen(GenArgs),
}

#[derive(Args, Clone)]
struct Common {
    /// Circuit file (`.blif` for netlists, anything else is RTL-FSM).
    #[arg(long)]
    circuit: PathBuf,
    /// State registers, most significant first, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    state: Vec<String>,
    /// Cycle bound or `fixpoint`.
    #[arg(long, default_value = "fixpoint")]
    depth: Depth,
    #[arg(long, default_value = "bfs-prune")]
    mode: Mode,
    /// Outputs to monitor (default: all).
    #[arg(long, value_delimiter = ',')]
    outputs: Vec<String>,
    /// 1-bit constraint over registers and inputs, applied every cycle.
    #[arg(long = "assume")]
    assumes: Vec<String>,
    /// Worker threads (0 = all CPUs).
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long)]
    conflict_limit: Option<u64>,
    #[arg(long)]
    clause_limit: Option<usize>,
    #[arg(long)]
    path_cap: Option<usize>,
    #[arg(long)]
    value_cap: Option<usize>,
    /// Write every solver query as DIMACS into this directory.
    #[arg(long)]
    dump_cnf: Option<PathBuf>,
    /// JSON report path (default: stdout).
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    common: Common,
    /// Write one constraint file per DCT witness into this directory.
    #[arg(long)]
    dump_constraints: Option<PathBuf>,
}

#[derive(Args)]
struct TrojanArgs {
    #[command(flatten)]
    common: Common,
    /// Depth of the post-DCT exploration (default: --depth).
    #[arg(long)]
    stage3_depth: Option<Depth>,
    /// Only follow states entered through a DCT edge.
    #[arg(long)]
    lineage_only: bool,
}

#[derive(Args)]
struct StgArgs {
    #[command(flatten)]
    common: Common,
    /// DOT output path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    common: Common,
    /// Skip the symbolic engine comparison.
    #[arg(long)]
    no_compare: bool,
}

#[derive(Args)]
struct InjectArgs {
    #[arg(long)]
    circuit: PathBuf,
    /// Registers the trigger observes.
    #[arg(long, value_delimiter = ',', required = true)]
    state: Vec<String>,
    /// Trigger edges, e.g. `6:0,7:0`.
    #[arg(long)]
    dct: String,
    /// `stuck-at:<output>:<value>`
    #[arg(long)]
    payload: PayloadSpec,
    /// Output path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 3)]
    state_bits: u32,
    #[arg(long, default_value_t = 2)]
    input_bits: u32,
    #[arg(long, default_value_t = 0.75)]
    reachable_fraction: f64,
    #[arg(long, default_value_t = 2)]
    dct_count: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn init_logging() {
    let level = std::env::var("DCTFORGE_LOG").unwrap_or_else(|_| "error".into());
    let filter = EnvFilter::try_new(&level).unwrap_or_else(|_| EnvFilter::new("error"));
    let _ = tracing_subscriber::fmt()
        .json()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .try_init();
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR } else { EXIT_OK });
        }
    };
    init_logging();
    let r = match cli.cmd {
        Command::Analyze(a) => cmd_analyze(a),
        Command::Trojan(a) => cmd_trojan(a),
        Command::Stg(a) => cmd_stg(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Inject(a) => cmd_inject(a),
        Command::Gen(a) => cmd_gen(a),
    };
    match r {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn load_circuit(path: &Path) -> Result<Circuit> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let parsed = if path.extension().is_some_and(|e| e == "blif") {
        parse_blif(&text)
    } else {
        parse_rtl(&text)
    };
    parsed.with_context(|| format!("parsing {}", path.display()))
}

fn build_config(c: &Circuit, a: &Common) -> Result<ExploreConfig> {
    let spec = StateSpec::new(c, &a.state).context("bad --state")?;
    let mut cfg = ExploreConfig::new(c, spec).with_depth(a.depth).with_mode(a.mode);
    if !a.outputs.is_empty() {
        cfg.monitored_outputs = a.outputs.clone();
    }
    for text in &a.assumes {
        cfg.assumes.push(parse_expr(c, text).with_context(|| format!("bad --assume `{text}`"))?);
    }
    cfg.jobs = a.jobs;
    if let Some(v) = a.path_cap {
        cfg.path_cap = v;
    }
    if let Some(v) = a.value_cap {
        cfg.value_cap = v;
    }
    let defaults = SolverLimits::default();
    cfg.limits = SolverLimits {
        conflict_limit: a.conflict_limit.unwrap_or(defaults.conflict_limit),
        clause_limit: a.clause_limit.unwrap_or(defaults.clause_limit),
        dump_dir: a.dump_cnf.clone(),
    };
    if let Some(d) = &a.dump_cnf {
        std::fs::create_dir_all(d).with_context(|| format!("creating {}", d.display()))?;
    }
    cfg.validate(c)?;
    Ok(cfg)
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_analyze(a: AnalyzeArgs) -> Result<u8> {
    let t0 = Instant::now();
    let c = load_circuit(&a.common.circuit)?;
    let cfg = build_config(&c, &a.common)?;
    let parse_ms = t0.elapsed().as_millis();
    let store = ExprStore::new();
    let r = compute_dct(&store, &c, &cfg)?;
    let total_ms = t0.elapsed().as_millis();
    for w in r.stage1.warnings.iter().chain(&r.stage2.warnings) {
        eprintln!("warning: {w}");
    }
    if let Some(dir) = &a.dump_constraints {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for ((s, d), text) in &r.constraint_dumps {
            let p = dir.join(format!("dct_{}_{}.txt", s.0, d.0));
            std::fs::write(&p, format!("{text}\n")).with_context(|| format!("writing {}", p.display()))?;
        }
    }
    let json = report::analyze(&c, &cfg, &r, report::timing(&[("parse", parse_ms), ("total", total_ms)]));
    write_out(a.common.report.as_deref(), &report::render(&json))?;
    Ok(if r.dct.is_empty() { EXIT_OK } else { EXIT_DCT })
}

fn cmd_trojan(a: TrojanArgs) -> Result<u8> {
    let t0 = Instant::now();
    let c = load_circuit(&a.common.circuit)?;
    let mut cfg = build_config(&c, &a.common)?;
    cfg.stage3_depth = a.stage3_depth;
    cfg.dct_lineage_only = a.lineage_only;
    let store = ExprStore::new();
    let r = detect_trojan(&store, &c, &cfg)?;
    let total_ms = t0.elapsed().as_millis();
    let json = report::trojan(&c, &cfg, &r, report::timing(&[("total", total_ms)]));
    write_out(a.common.report.as_deref(), &report::render(&json))?;
    Ok(match r.verdict {
        Verdict::TrojanDetected => {
            eprintln!("Trojan detected");
            EXIT_TROJAN
        }
        Verdict::Clean | Verdict::NoDct => EXIT_OK,
    })
}

fn cmd_stg(a: StgArgs) -> Result<u8> {
    let c = load_circuit(&a.common.circuit)?;
    let cfg = build_config(&c, &a.common)?;
    let store = ExprStore::new();
    let r = compute_dct(&store, &c, &cfg)?;
    write_out(a.out.as_deref(), &dot::render(&c.name, &cfg.state_spec, &r))?;
    Ok(EXIT_OK)
}

fn cmd_oracle(a: OracleArgs) -> Result<u8> {
    let t0 = Instant::now();
    let c = load_circuit(&a.common.circuit)?;
    let cfg = build_config(&c, &a.common)?;
    let md = oracle_analyze(&c, &cfg.state_spec, cfg.depth)?;
    let oracle_ms = t0.elapsed().as_millis();
    let diff = if a.no_compare {
        None
    } else {
        let store = ExprStore::new();
        let r = compute_dct(&store, &c, &cfg)?;
        Some(report::Diff::new(&md, &oracle_dct(&md), &r))
    };
    let total_ms = t0.elapsed().as_millis();
    let json = report::oracle(
        &c,
        &cfg,
        &md,
        diff.as_ref(),
        report::timing(&[("oracle", oracle_ms), ("total", total_ms)]),
    );
    write_out(a.common.report.as_deref(), &report::render(&json))?;
    if diff.is_some_and(|d| !d.is_empty()) {
        bail!("symbolic engine and oracle disagree (see the report's diff section)");
    }
    Ok(EXIT_OK)
}

fn cmd_inject(a: InjectArgs) -> Result<u8> {
    let c = load_circuit(&a.circuit)?;
    let edges = parse_edges(&a.dct).map_err(anyhow::Error::msg).context("bad --dct")?;
    let trig = TriggerSpec {
        dct_edges: edges,
        state_spec: StateSpec::new(&c, &a.state).context("bad --state")?,
    };
    let t = inject_trojan(&c, &trig, &a.payload)?;
    write_out(a.out.as_deref(), &print_rtl(&t))?;
    Ok(EXIT_OK)
}

fn cmd_gen(a: GenArgs) -> Result<u8> {
    let p = FsmParams {
        state_bits: a.state_bits,
        input_bits: a.input_bits,
        reachable_fraction: a.reachable_fraction,
        dct_count: a.dct_count,
    };
    let c = gen_random_fsm(a.seed, p)?;
    write_out(a.out.as_deref(), &print_rtl(&c))?;
    Ok(EXIT_OK)
}
