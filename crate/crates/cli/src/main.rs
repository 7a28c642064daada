use std::io::{self, Write};
use std::path::PathBuf;

use anticoord::benchmarks::{self, Kind};
use anticoord::greedy::{run_greedy, TieBreak, Variant};
use anticoord::learning::{controlled_run, run};
use anticoord::policy::{validate_dynamic, validate_static};
use anticoord::{
    exact, vertex_cover, ActionProfile, DynamicPolicy, Game, Graph, PayoffConstants, Policy,
};
use anticoord_cli::{
    run_experiment, write_csv, write_csv_file, Constants, Density, Generator, SweepConfig,
};
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "anticoord",
    version,
    about = "Learning and control in anti-coordination network games"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the learning dynamics and print the trajectory as JSON.
    Simulate(SimulateArgs),
    /// Compute a control policy and its cost report.
    Solve(SolveArgs),
    /// Monte-Carlo sweep of the greedy variants, written as CSV.
    Sweep(SweepArgs),
    /// Check the closed-form benchmark policies against exhaustive search.
    BenchVerify(BenchVerifyArgs),
}

#[derive(Args)]
struct InstanceArgs {
    /// Graph file: {"n": .., "types": [..], "edges": [[i, j], ..]}.
    #[arg(long, conflicts_with = "bench")]
    graph: Option<PathBuf>,
    /// Built-in network instead of a graph file.
    #[arg(long, value_enum, requires = "n")]
    bench: Option<BenchKind>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    c0: f64,
    #[arg(long)]
    c1: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum BenchKind {
    Star,
    Line,
    Ring,
}

impl From<BenchKind> for Kind {
    fn from(k: BenchKind) -> Self {
        match k {
            BenchKind::Star => Kind::Star,
            BenchKind::Line => Kind::Line,
            BenchKind::Ring => Kind::Ring,
        }
    }
}

impl InstanceArgs {
    fn game(&self) -> Result<Game> {
        let graph = match (&self.graph, self.bench, self.n) {
            (Some(path), _, _) => Graph::load(path)?,
            (None, Some(kind), Some(n)) => benchmarks::make_benchmark(kind.into(), n)?,
            _ => bail!("give either --graph or --bench with --n"),
        };
        Ok(Game::new(graph, PayoffConstants::new(self.c0, self.c1)?))
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Policy file: {"static": {...}} or {"dynamic": {...}}.
    #[arg(long)]
    policy: Option<PathBuf>,
    /// Starting profile such as "1e0e"; all undecided by default.
    #[arg(long)]
    initial: Option<String>,
    /// Number of steps; defaults to 2n.
    #[arg(long)]
    horizon: Option<usize>,
    /// One profile per line instead of a single JSON object.
    #[arg(long)]
    jsonl: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Cp,
    Cp2,
    Maxdeg,
    Rand,
    Vc,
    ExactStatic,
    ExactDynamic,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, value_enum)]
    method: Method,
    /// Tie-break seed for the greedy methods.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Break ties by lowest index instead of at random.
    #[arg(long)]
    deterministic: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON sweep configuration; other sweep flags are ignored when given.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Network sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "20")]
    n: Vec<usize>,
    /// Edge probability between opposite types.
    #[arg(long, conflicts_with = "p_over_n")]
    p: Option<f64>,
    /// Edge probability k / n.
    #[arg(long)]
    p_over_n: Option<f64>,
    #[arg(long, requires = "c1", conflicts_with = "grid")]
    c0: Option<f64>,
    #[arg(long, requires = "c0")]
    c1: Option<f64>,
    /// Sweep the m x m grid of constant cells.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long, value_delimiter = ',', default_value = "cp,cp2,maxdeg,rand,vc")]
    variants: Vec<String>,
    #[arg(long, default_value_t = 100)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Draw player types at random (allows odd n).
    #[arg(long)]
    typed: bool,
    #[arg(long)]
    deterministic: bool,
    /// Worker threads; defaults to the available cores.
    #[arg(long)]
    workers: Option<usize>,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl SweepArgs {
    fn config(&self) -> Result<SweepConfig> {
        if let Some(path) = &self.config {
            return SweepConfig::load(path);
        }
        let density = match (self.p, self.p_over_n) {
            (Some(p), _) => Density::Fixed(p),
            (None, Some(k)) => Density::OverN(k),
            (None, None) => Density::Fixed(0.3),
        };
        let constants = match (self.c0, self.c1, self.grid) {
            (Some(c0), Some(c1), _) => Constants::Values(vec![(c0, c1)]),
            (_, _, Some(m)) => Constants::Grid(m),
            _ => Constants::Grid(10),
        };
        let variants = self
            .variants
            .iter()
            .map(|v| v.parse::<Variant>().map_err(anyhow::Error::from))
            .collect::<Result<Vec<_>>>()?;
        Ok(SweepConfig {
            sizes: self.n.clone(),
            density,
            constants,
            variants,
            reps: self.reps,
            seed: self.seed,
            generator: if self.typed {
                Generator::Typed
            } else {
                Generator::Halves
            },
            deterministic: self.deterministic,
        })
    }
}

#[derive(Args)]
struct BenchVerifyArgs {
    /// Only this network kind.
    #[arg(long, value_enum)]
    kind: Option<BenchKind>,
    /// JSON lines output; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with an error if any row disagrees.
    #[arg(long)]
    strict: bool,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate(args) => simulate(args),
        Command::Solve(args) => solve(args),
        Command::Sweep(args) => sweep(args),
        Command::BenchVerify(args) => bench_verify(args),
    }
}

fn print_json(value: &serde_json::Value) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let game = args.instance.game()?;
    let n = game.n();
    let a0 = match &args.initial {
        Some(text) => {
            ActionProfile::parse(text).with_context(|| format!("bad profile {text:?}"))?
        }
        None => ActionProfile::undecided(n),
    };
    let horizon = args.horizon.unwrap_or(2 * n);
    let trajectory = match &args.policy {
        None => run(&game, &a0, horizon)?,
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let policy = match Policy::from_json_str(&text)? {
                Policy::Static(c) => DynamicPolicy::repeat(c),
                Policy::Dynamic(d) => d,
            };
            controlled_run(&game, &a0, &policy, horizon)?
        }
    };
    if args.jsonl {
        trajectory.write_jsonl(io::stdout().lock())?;
        Ok(())
    } else {
        print_json(&serde_json::to_value(&trajectory)?)
    }
}

fn solve(args: SolveArgs) -> Result<()> {
    let game = args.instance.game()?;
    let tie = if args.deterministic {
        TieBreak::Lowest
    } else {
        TieBreak::Seeded(args.seed)
    };
    let greedy = |variant| -> Result<serde_json::Value> {
        let r = run_greedy(&game, variant, tie)?;
        Ok(json!({
            "method": variant.name(),
            "controlled": r.controlled,
            "effort": format!("{}/{}", r.selections(), game.n()),
            "convergence_times": r.convergence_times,
            "static": { "policy": Policy::Static(r.static_policy.clone()), "report": validate_static(&game, &r.static_policy)? },
            "dynamic": { "policy": Policy::Dynamic(r.dynamic_policy.clone()), "report": validate_dynamic(&game, &r.dynamic_policy)? },
        }))
    };
    let value = match args.method {
        Method::Cp => greedy(Variant::Cp)?,
        Method::Cp2 => greedy(Variant::Cp2)?,
        Method::Maxdeg => greedy(Variant::MaxDegree)?,
        Method::Rand => greedy(Variant::Rand)?,
        Method::Vc => {
            let sol = vertex_cover::solve(&game);
            json!({
                "method": "vc",
                "residual": sol.residual,
                "cover": sol.cover,
                "rho_positive": sol.rho_positive,
                "policy": Policy::Dynamic(sol.policy.clone()),
                "report": validate_dynamic(&game, &sol.policy)?,
            })
        }
        Method::ExactStatic => {
            let sol = exact::brute_static(&game)?;
            json!({
                "method": "exact-static",
                "policy": Policy::Static(sol.policy.clone()),
                "report": validate_static(&game, &sol.policy)?,
            })
        }
        Method::ExactDynamic => {
            let sol = exact::brute_dynamic_restricted(&game)?;
            json!({
                "method": "exact-dynamic",
                "class": exact::RESTRICTED_CLASS,
                "policy": Policy::Dynamic(sol.policy.clone()),
                "report": validate_dynamic(&game, &sol.policy)?,
            })
        }
    };
    print_json(&value)
}

fn sweep(args: SweepArgs) -> Result<()> {
    let config = args.config()?;
    let workers = args.workers.unwrap_or_else(|| {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    });
    let rows = run_experiment(&config, workers)?;
    match &args.out {
        Some(path) => write_csv_file(&rows, path)?,
        None => write_csv(&rows, io::stdout().lock())?,
    }
    eprintln!("{} rows", rows.len());
    Ok(())
}

fn bench_verify(args: BenchVerifyArgs) -> Result<()> {
    let mut out: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(
            std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
        ),
        None => Box::new(io::stdout().lock()),
    };
    let only: Option<Kind> = args.kind.map(Into::into);
    let (mut total, mut failed) = (0, 0);
    for (kind, n, constants) in benchmarks::table_instances() {
        if only.is_some_and(|k| k != kind) {
            continue;
        }
        let row = benchmarks::verify(kind, n, constants)?;
        total += 1;
        if !row.passed() {
            failed += 1;
        }
        serde_json::to_writer(&mut out, &row)?;
        writeln!(out)?;
    }
    out.flush()?;
    eprintln!("{} rows, {} discrepancies", total, failed);
    if args.strict && failed > 0 {
        bail!("{failed} rows disagree with exhaustive search");
    }
    Ok(())
}
