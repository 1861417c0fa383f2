use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use subdiv_core::classify::{classify_extremal, ExtremalKind};
use subdiv_core::gen::{planted_extremal, random_min_semidegree, tightness_witness};
use subdiv_core::harness::{run_experiment, ExperimentConfig};
use subdiv_core::hampath::Search;
use subdiv_core::oracle::{find_perfect_tiling_exact, find_spanning_subdivision_exact, OracleConfig, DEFAULT_BUDGET};
use subdiv_core::params::ParameterLadder;
use subdiv_core::pattern::{subdivision_from_json, subdivision_to_json, tiling_from_json, tiling_to_json};
use subdiv_core::solve::{solve, verify_solution, Solution, SolveOptions, Task, WITNESS_RESTARTS};
use subdiv_core::stability::{find_ec_witness, StabilityReport};
use subdiv_core::{Digraph, Error, Pattern};

const EXIT_INPUT: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_VERIFY: u8 = 4;

#[derive(Parser)]
#[command(name = "subdiv", version, about = "Spanning subdivisions and tilings in dense digraphs")]
struct Cli {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Parameter ladder JSON; missing fields take defaults.
    #[arg(long, global = true)]
    params: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a digraph in digraph-v1 format.
    Gen(GenArgs),
    /// Search for an extremal witness and classify it.
    Classify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = WITNESS_RESTARTS)]
        restarts: usize,
    },
    /// Find a spanning subdivision or a perfect tiling.
    Solve {
        #[command(flatten)]
        task: TaskArgs,
        #[arg(long, value_parser = parse_kind)]
        force_extremal: Option<ExtremalKind>,
    },
    /// Check a certificate against a digraph.
    Verify {
        #[arg(long)]
        cert: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// When given, the certificate's pattern must equal this one.
        #[arg(long)]
        pattern: Option<String>,
        /// Accept subdivisions that do not cover every vertex.
        #[arg(long)]
        partial: bool,
    },
    /// Exhaustive search on small hosts.
    Oracle {
        #[command(flatten)]
        task: TaskArgs,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Run an experiment matrix and write a report-v1 CSV.
    Experiment {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: GenKind,
    #[arg(long)]
    n: usize,
    /// Semi-degree floor for `random`; defaults to ceil(n/2).
    #[arg(long)]
    d: Option<usize>,
    /// Extremal class for `planted`: ec1, ec2 or ec3.
    #[arg(long, value_parser = parse_kind)]
    class: Option<ExtremalKind>,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Random,
    Planted,
    Tightness,
    Complete,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Spanning,
    Tiling,
}

#[derive(Args)]
struct TaskArgs {
    #[arg(long)]
    input: PathBuf,
    /// Built-in name (arc, 2-cycle, tt3) or a digraph-v1 file.
    #[arg(long)]
    pattern: String,
    #[arg(long, value_enum, default_value_t = Mode::Spanning)]
    mode: Mode,
    /// Route lengths per pattern arc, comma separated.
    #[arg(long, value_delimiter = ',')]
    lengths: Option<Vec<usize>>,
    /// Part orders for tiling mode, comma separated.
    #[arg(long, value_delimiter = ',')]
    orders: Option<Vec<usize>>,
}

struct Fail {
    code: u8,
    msg: String,
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let code = match e.stage_tag() {
            None => EXIT_INPUT,
            Some("verify") => EXIT_VERIFY,
            Some(_) => EXIT_SOLVER,
        };
        Fail { code, msg: e.to_string() }
    }
}

fn input(msg: impl Into<String>) -> Fail {
    Fail { code: EXIT_INPUT, msg: msg.into() }
}

fn parse_kind(s: &str) -> Result<ExtremalKind, String> {
    ExtremalKind::parse(s).ok_or_else(|| format!("unknown extremal class {s}; expected ec1, ec2 or ec3"))
}

fn read(path: &Path) -> Result<String, Fail> {
    fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn read_digraph(path: &Path) -> Result<Digraph, Fail> {
    Digraph::parse_v1(&read(path)?).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn read_pattern(spec: &str) -> Result<Pattern, Fail> {
    if let Some(p) = Pattern::named(spec) {
        return Ok(p);
    }
    Ok(Pattern::new(read_digraph(Path::new(spec))?)?)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Fail> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn ladder(cli: &Cli) -> Result<ParameterLadder, Fail> {
    let l = match &cli.params {
        Some(p) => ParameterLadder::from_json(&read(p)?)?,
        None => ParameterLadder::default(),
    };
    l.validate()?;
    Ok(l)
}

fn task_of(t: &TaskArgs) -> Result<Task, Fail> {
    match t.mode {
        Mode::Spanning => {
            if t.orders.is_some() {
                return Err(input("--orders needs --mode tiling"));
            }
            Ok(Task::Spanning(t.lengths.clone()))
        }
        Mode::Tiling => {
            if t.lengths.is_some() {
                return Err(input("--lengths needs --mode spanning"));
            }
            t.orders.clone().map(Task::Tiling).ok_or_else(|| input("--mode tiling needs --orders"))
        }
    }
}

/// Verifies, then writes. Every certificate leaves through here.
fn write_solution(out: Option<&Path>, d: &Digraph, p: &Pattern, task: &Task, sol: &Solution) -> Result<(), Fail> {
    let bad = verify_solution(d, p, task, sol)?;
    if !bad.is_empty() {
        return Err(Fail { code: EXIT_VERIFY, msg: format!("certificate failed verification: {}", bad.join("; ")) });
    }
    let text = match sol {
        Solution::Spanning(c) => subdivision_to_json(p, c),
        Solution::Tiling(t) => tiling_to_json(p, t),
    };
    emit(out, &(text + "\n"))
}

fn sidecar(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn cmd_gen(cli: &Cli, g: &GenArgs) -> Result<(), Fail> {
    let l = ladder(cli)?;
    let (d, truth) = match g.kind {
        GenKind::Random => (random_min_semidegree(g.n, g.d.unwrap_or(g.n.div_ceil(2)), cli.seed)?, None),
        GenKind::Tightness => (tightness_witness(g.n)?, None),
        GenKind::Complete => (Digraph::complete(g.n), None),
        GenKind::Planted => {
            let kind = g.class.ok_or_else(|| input("--kind planted needs --class"))?;
            let (d, pl) = planted_extremal(kind, g.n, &l, g.noise, cli.seed)?;
            (d, Some(json!({"kind": pl.kind, "parts": pl.parts, "n": g.n, "noise": g.noise, "seed": cli.seed})))
        }
    };
    emit(cli.out.as_deref(), &d.to_v1())?;
    if let (Some(t), Some(out)) = (truth, cli.out.as_deref()) {
        let path = sidecar(out);
        fs::write(&path, serde_json::to_string_pretty(&t).expect("plain data") + "\n").map_err(|e| input(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn cmd_classify(cli: &Cli, path: &Path, restarts: usize) -> Result<(), Fail> {
    let l = ladder(cli)?;
    let d = read_digraph(path)?;
    let w = find_ec_witness(&d, l.eps_prime, restarts, cli.seed)?;
    let report = StabilityReport::new(w.as_ref(), l.eps_prime, cli.seed, restarts);
    let (partition, error) = match &w {
        Some(w) => match classify_extremal(&d, w, &l) {
            Ok(p) => (Some(p), None),
            Err(e) => (None, Some(e.to_string())),
        },
        None => (None, None),
    };
    let j = json!({"report": report, "partition": partition, "classify_error": error});
    emit(cli.out.as_deref(), &(serde_json::to_string_pretty(&j).expect("plain data") + "\n"))
}

fn cmd_solve(cli: &Cli, t: &TaskArgs, force: Option<ExtremalKind>) -> Result<(), Fail> {
    let l = ladder(cli)?;
    let d = read_digraph(&t.input)?;
    let p = read_pattern(&t.pattern)?;
    let task = task_of(t)?;
    let opts = SolveOptions { force_extremal: force, ..Default::default() };
    let r = solve(&d, &p, &task, &l, cli.seed, &opts);
    eprint!("{}", r.trace.render());
    eprintln!("route={}", r.route.tag());
    let sol = r.result?;
    write_solution(cli.out.as_deref(), &d, &p, &task, &sol)
}

fn cmd_verify(cli: &Cli, cert: &Path, host: &Path, pattern: Option<&str>, partial: bool) -> Result<(), Fail> {
    let d = read_digraph(host)?;
    let text = read(cert)?;
    let j: serde_json::Value = serde_json::from_str(&text).map_err(|e| input(format!("{}: {e}", cert.display())))?;
    let (p, clauses) = if j.get("orders").is_some() {
        let (p, t) = tiling_from_json(&text)?;
        let v = subdiv_core::pattern::verify_tiling(&d, &p, &t)?;
        (p, v.clauses())
    } else {
        let (p, c) = subdivision_from_json(&text)?;
        let v = subdiv_core::pattern::verify_subdivision(&d, &p, &c, !partial, None)?;
        (p, v.clauses())
    };
    let mut clauses = clauses;
    if let Some(spec) = pattern {
        if read_pattern(spec)? != p {
            clauses.push("certificate pattern differs from --pattern".into());
        }
    }
    if clauses.is_empty() {
        emit(cli.out.as_deref(), "pass\n")
    } else {
        for c in &clauses {
            eprintln!("{c}");
        }
        Err(Fail { code: EXIT_VERIFY, msg: format!("{} clause(s) violated", clauses.len()) })
    }
}

fn cmd_oracle(cli: &Cli, t: &TaskArgs, budget: u64) -> Result<(), Fail> {
    let d = read_digraph(&t.input)?;
    let p = read_pattern(&t.pattern)?;
    let task = task_of(t)?;
    let cfg = OracleConfig { budget: Some(budget), ..Default::default() };
    let found = match &task {
        Task::Spanning(l) => match find_spanning_subdivision_exact(&d, &p, l.as_deref(), cfg)? {
            Search::Found(c) => Search::Found(Solution::Spanning(c)),
            Search::Absent => Search::Absent,
            Search::Exhausted => Search::Exhausted,
        },
        Task::Tiling(o) => match find_perfect_tiling_exact(&d, &p, o, cfg)? {
            Search::Found(c) => Search::Found(Solution::Tiling(c)),
            Search::Absent => Search::Absent,
            Search::Exhausted => Search::Exhausted,
        },
    };
    match found {
        Search::Found(sol) => write_solution(cli.out.as_deref(), &d, &p, &task, &sol),
        Search::Absent => Err(Fail { code: EXIT_SOLVER, msg: "oracle: infeasible".into() }),
        Search::Exhausted => Err(Fail { code: EXIT_SOLVER, msg: "oracle: budget exhausted".into() }),
    }
}

fn cmd_experiment(cli: &Cli, config: &Path) -> Result<(), Fail> {
    let l = ladder(cli)?;
    let mut cfg = ExperimentConfig::from_json(&read(config)?)?;
    if cli.seed != 0 {
        cfg.seed = cli.seed;
    }
    let report = run_experiment(&cfg, &l)?;
    emit(cli.out.as_deref(), &report.to_csv())?;
    if let Some(out) = cli.out.as_deref() {
        let path = sidecar(out);
        fs::write(&path, report.to_json() + "\n").map_err(|e| input(format!("{}: {e}", path.display())))?;
    }
    eprintln!("rows={} hash={}", report.rows.len(), report.hash());
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Fail> {
    match &cli.cmd {
        Cmd::Gen(g) => cmd_gen(cli, g),
        Cmd::Classify { input, restarts } => cmd_classify(cli, input, *restarts),
        Cmd::Solve { task, force_extremal } => cmd_solve(cli, task, *force_extremal),
        Cmd::Verify { cert, input, pattern, partial } => cmd_verify(cli, cert, input, pattern.as_deref(), *partial),
        Cmd::Oracle { task, budget } => cmd_oracle(cli, task, *budget),
        Cmd::Experiment { config } => cmd_experiment(cli, config),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
