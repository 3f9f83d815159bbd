use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crp_cli::experiments::{self, BenchConfig, ExternalResult, SamplingChoice, TwoStageConfig};
use crp_core::analysis::{convergence_csv, convergence_experiment, special_column_check, special_column_rng};
use crp_core::astar::{solve, SolverConfig, UpperBound};
use crp_core::bay::InstanceSpec;
use crp_core::bounds::LookAhead;
use crp_core::io;

#[derive(Parser)]
#[command(name = "crp", version, about = "Restricted container relocation problem solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate random bays as JSON lines.
    Gen(GenArgs),
    /// Solve one bay file and print the outcome as JSON.
    Solve(SolveArgs),
    /// Compare heuristics against A* optima.
    Bench(BenchArgs),
    /// Nodes needed for optimality per look-ahead depth.
    LbStudy(LbArgs),
    /// Certified gap per node budget, or lower-bound gap along optimal paths.
    GapCurve(GapArgs),
    /// Counting bound versus heuristic H as the bay widens.
    Asymptotic(AsymptoticArgs),
    /// Incomplete-information experiments.
    TwoStage(TwoStageArgs),
    /// Closed-form loss bounds for sampling and pruning.
    ErrorBounds(ErrorBoundArgs),
}

#[derive(Args, Clone)]
struct BatchArgs {
    #[arg(long, default_value_t = 4)]
    tiers: usize,
    #[arg(long, default_value_t = 7)]
    cols: usize,
    /// Containers per column.
    #[arg(long, default_value_t = 3)]
    fill: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 10_000)]
    instances: usize,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl BatchArgs {
    fn spec(&self) -> Result<InstanceSpec> {
        let spec = InstanceSpec::new(self.tiers, self.cols, self.fill, self.seed);
        spec.validate().context("invalid instance spec")?;
        Ok(spec)
    }
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    batch: BatchArgs,
}

#[derive(Args)]
struct SolveArgs {
    /// Bay file (JSON or text).
    file: PathBuf,
    #[arg(long, default_value_t = 1_000_000)]
    budget: usize,
    /// Look-ahead depth, or `N` for the full recursion.
    #[arg(long, default_value = "N", value_parser = parse_depth)]
    lb_depth: LookAhead,
    /// Use the tree heuristic with this width as upper bound (1 means H).
    #[arg(long, default_value_t = 1)]
    th_width: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    batch: BatchArgs,
    #[arg(long, default_value_t = 400_000)]
    budget: usize,
    #[arg(long, default_value = "N", value_parser = parse_depth)]
    lb_depth: LookAhead,
    /// Tree-heuristic widths to benchmark.
    #[arg(long, value_delimiter = ',', default_value = "2")]
    th_width: Vec<usize>,
    /// CSV with columns `heuristic,instance,relocations` to merge.
    #[arg(long)]
    external: Option<PathBuf>,
}

#[derive(Args)]
struct LbArgs {
    #[command(flatten)]
    batch: BatchArgs,
    #[arg(long, default_value_t = 400_000)]
    budget: usize,
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,N", value_parser = parse_depth)]
    lb_depth: Vec<LookAhead>,
}

#[derive(Args)]
struct GapArgs {
    #[command(flatten)]
    batch: BatchArgs,
    /// Node budgets (ascending).
    #[arg(long, value_delimiter = ',', default_value = "1,10,100,1000,10000,100000")]
    budget: Vec<usize>,
    #[arg(long, default_value = "N", value_parser = parse_depth)]
    lb_depth: LookAhead,
    /// Report `z_opt - S_N` per level of the optimal path instead.
    #[arg(long)]
    path: bool,
}

#[derive(Args)]
struct AsymptoticArgs {
    #[arg(long, default_value_t = 4)]
    tiers: usize,
    #[arg(long, default_value_t = 3)]
    fill: usize,
    /// Column counts.
    #[arg(long, value_delimiter = ',', default_value = "5,10,20,40")]
    cols: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 10_000)]
    instances: usize,
    /// Also solve to optimality with this node budget.
    #[arg(long)]
    budget: Option<usize>,
    /// Report the special-column frequency instead.
    #[arg(long)]
    special: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum Study {
    /// Gaps against full information per known fraction.
    Value,
    /// Myopic heuristic against H and nearest relocation per bay width.
    Myopic,
}

#[derive(Args)]
struct TwoStageArgs {
    #[command(flatten)]
    batch: BatchArgs,
    #[arg(long, value_enum, default_value = "value")]
    study: Study,
    /// Known fractions of N.
    #[arg(long, value_delimiter = ',', default_value = "0.25,0.375,0.5,0.625,0.75,0.9")]
    known_frac: Vec<f64>,
    /// Reveal time; defaults to ceil(N/4) + 1.
    #[arg(long)]
    t_star: Option<usize>,
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    #[arg(long, default_value_t = 0.05)]
    eps: f64,
    /// Fixed scenario count instead of the Hoeffding size.
    #[arg(long)]
    samples: Option<usize>,
    /// Extra pruning times before the reveal.
    #[arg(long, value_delimiter = ',')]
    prune_at: Vec<usize>,
    /// Skip ASA* and report only the myopic heuristic.
    #[arg(long)]
    myopic_only: bool,
    #[arg(long, default_value_t = 100_000)]
    budget: usize,
    /// Column counts for the myopic study.
    #[arg(long, value_delimiter = ',', default_value = "5,10,20,40,60")]
    widths: Vec<usize>,
}

#[derive(Args)]
struct ErrorBoundArgs {
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.5,1")]
    delta: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.01,0.05,0.1")]
    eps: Vec<f64>,
    /// Early pruning rounds for the right panel.
    #[arg(long, default_value_t = 5)]
    rounds: usize,
    #[arg(long, default_value_t = 1.0)]
    d_min: f64,
    #[arg(long, value_delimiter = ',', default_value = "10,15,20,25,30,35,40,45,50")]
    cols: Vec<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_depth(s: &str) -> Result<LookAhead, String> {
    match s {
        "N" | "n" | "full" => Ok(LookAhead::FULL),
        _ => s
            .parse()
            .map(LookAhead)
            .map_err(|e| format!("expected a depth or N: {e}")),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct SolveJson {
    z: u32,
    gap: u32,
    lower_bound: u32,
    nodes: usize,
    depth: u32,
    budget_exhausted: bool,
    moves: Vec<String>,
}

fn cmd_solve(args: &SolveArgs) -> Result<ExitCode> {
    let text = fs::read_to_string(&args.file)
        .with_context(|| format!("reading {}", args.file.display()))?;
    let bay = io::parse_instance(&text).with_context(|| format!("parsing {}", args.file.display()))?;
    if args.th_width == 0 {
        bail!("--th-width must be at least 1");
    }
    let upper = if args.th_width == 1 {
        UpperBound::H
    } else {
        UpperBound::Tree(args.th_width)
    };
    let cfg = SolverConfig::default()
        .with_budget(args.budget)
        .with_lower_bound(args.lb_depth)
        .with_upper_bound(upper);
    let out = solve(&bay, &cfg)?;
    let json = SolveJson {
        z: out.relocations,
        gap: out.gap,
        lower_bound: out.lower_bound,
        nodes: out.nodes,
        depth: out.depth,
        budget_exhausted: out.budget_exhausted,
        moves: out.moves.iter().map(ToString::to_string).collect(),
    };
    emit(args.out.as_deref(), &(serde_json::to_string(&json)? + "\n"))?;
    Ok(if out.is_optimal() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn read_external(path: &Path) -> Result<Vec<ExternalResult>> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    reader
        .deserialize()
        .collect::<Result<Vec<ExternalResult>, _>>()
        .with_context(|| format!("parsing {}", path.display()))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Gen(args) => {
            let spec = args.batch.spec()?;
            let mut text = String::new();
            for i in 0..args.batch.instances {
                text.push_str(&io::to_json(&spec.generate_nth(i as u64)?));
                text.push('\n');
            }
            emit(args.batch.out.as_deref(), &text)?;
        }
        Command::Solve(args) => return cmd_solve(&args),
        Command::Bench(args) => {
            let cfg = BenchConfig {
                spec: args.batch.spec()?,
                instances: args.batch.instances,
                widths: args.th_width.clone(),
                solver: SolverConfig::default()
                    .with_budget(args.budget)
                    .with_lower_bound(args.lb_depth),
                workers: args.batch.workers,
                external: match &args.external {
                    Some(p) => read_external(p)?,
                    None => Vec::new(),
                },
            };
            if cfg.widths.contains(&0) {
                bail!("--th-width values must be at least 1");
            }
            let report = experiments::bench(&cfg);
            emit(args.batch.out.as_deref(), &experiments::bench_csv(&report))?;
            eprintln!(
                "solved {} excluded {} root-certified {:.4} mean root lower-bound gap {:.4}",
                report.solved,
                report.excluded,
                report.root_certified_fraction(),
                report.mean_root_lower_gap()
            );
        }
        Command::LbStudy(args) => {
            let study = experiments::lb_study(
                &args.batch.spec()?,
                args.batch.instances,
                &args.lb_depth,
                args.budget,
                args.batch.workers,
            );
            emit(args.batch.out.as_deref(), &experiments::lb_study_csv(&study))?;
        }
        Command::GapCurve(args) => {
            if args.budget.is_empty() || args.budget.windows(2).any(|w| w[0] > w[1]) || args.budget[0] == 0 {
                bail!("--budget needs ascending positive values");
            }
            let spec = args.batch.spec()?;
            let text = if args.path {
                let budget = *args.budget.last().unwrap();
                let (rows, excluded) =
                    experiments::path_gap_curve(&spec, args.batch.instances, budget, args.batch.workers);
                eprintln!("excluded {excluded}");
                experiments::path_gap_csv(&rows)
            } else {
                let rows = experiments::budget_curve(
                    &spec,
                    args.batch.instances,
                    &args.budget,
                    args.lb_depth,
                    args.batch.workers,
                );
                experiments::budget_curve_csv(&rows)
            };
            emit(args.batch.out.as_deref(), &text)?;
        }
        Command::Asymptotic(args) => {
            let text = if args.special {
                let mut text = String::from("C,columns,samples,frequency,bound,sigma,holds\n");
                for &c in &args.cols {
                    let mut rng = special_column_rng(args.seed, c);
                    let s = special_column_check(args.fill, c, args.instances, &mut rng);
                    text.push_str(&format!(
                        "{},{},{},{:.6},{:.6},{:.6},{}\n",
                        c, s.columns, s.samples, s.frequency, s.bound, s.sigma, s.holds()
                    ));
                }
                text
            } else {
                InstanceSpec::new(args.tiers, 1, args.fill, args.seed)
                    .validate()
                    .context("invalid instance spec")?;
                let rows = convergence_experiment(
                    args.fill,
                    args.tiers,
                    &args.cols,
                    args.instances,
                    args.seed,
                    args.budget,
                );
                convergence_csv(&rows)
            };
            emit(args.out.as_deref(), &text)?;
        }
        Command::TwoStage(args) => {
            let batch = &args.batch;
            let text = match args.study {
                Study::Value => {
                    let cfg = TwoStageConfig {
                        spec: batch.spec()?,
                        instances: batch.instances,
                        known_fractions: args.known_frac.clone(),
                        reveal_fraction: 0.25,
                        t_star: args.t_star,
                        sampling: match args.samples {
                            Some(n) => SamplingChoice::Fixed(n),
                            None => SamplingChoice::Hoeffding {
                                delta: args.delta,
                                epsilon: args.eps,
                            },
                        },
                        prune_times: args.prune_at.clone(),
                        run_asa: !args.myopic_only,
                        solver: SolverConfig::default().with_budget(args.budget),
                        workers: batch.workers,
                    };
                    let (rows, _) = experiments::value_of_information(&cfg)?;
                    experiments::info_csv(&rows)
                }
                Study::Myopic => {
                    let rows = experiments::myopic_study(
                        batch.tiers,
                        batch.fill,
                        &args.widths,
                        &args.known_frac,
                        0.25,
                        batch.instances,
                        batch.seed,
                        batch.workers,
                    );
                    experiments::myopic_csv(&rows)
                }
            };
            emit(batch.out.as_deref(), &text)?;
        }
        Command::ErrorBounds(args) => {
            let left = experiments::sampling_loss_table(&args.delta, &args.eps);
            let right = experiments::pruning_loss_table(&args.cols, 0.5, 0.05, args.rounds, args.d_min);
            emit(args.out.as_deref(), &experiments::error_bounds_csv(&left, &right))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
