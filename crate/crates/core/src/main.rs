use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fairtopk::dp::solve_dp;
use fairtopk::experiments::{self, LambdaGrid, StopMetric, SweepConfig};
use fairtopk::ingest::{self, CodingConfig, SyntheticSpec};
use fairtopk::model::{Instance, PolicyParams, Selection};
use fairtopk::oracle;
use fairtopk::solve::{self, SolverKind, Solved};
use fairtopk::Error;

#[derive(Parser)]
#[command(name = "fairtopk", version, about = "Intersectional fair top-k selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and print the objective breakdown.
    Solve(SolveArgs),
    /// Sweep lambda from 0 until parity for each selection rate.
    Sweep(SweepArgs),
    /// Generate a synthetic candidate file.
    #[command(alias = "generate")]
    Gen(GenArgs),
    /// Exhaustive optimum for cross-checking (small instances only).
    Oracle(OracleArgs),
    /// Per-class score statistics.
    #[command(alias = "audit")]
    Stats(StatsArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Candidate CSV file.
    #[arg(long)]
    input: PathBuf,
    /// Attribute coding JSON.
    #[arg(long)]
    coding: PathBuf,
    /// Drop classes with fewer members.
    #[arg(long, default_value_t = 1)]
    min_class_size: usize,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct QuotaArgs {
    /// Number of candidates to select.
    #[arg(long)]
    k: Option<usize>,
    /// Selection rate; k = floor(rate * n).
    #[arg(long)]
    rate: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Dp,
    Greedy,
    GreedyMerged,
    Lp,
}

impl From<SolverArg> for SolverKind {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Dp => SolverKind::Dp,
            SolverArg::Greedy => SolverKind::Greedy,
            SolverArg::GreedyMerged => SolverKind::GreedyMerged,
            SolverArg::Lp => SolverKind::Lp,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SelectionFormat {
    /// `id,class_label,score`.
    Csv,
    /// One id per line.
    Ids,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    quota: QuotaArgs,
    #[arg(long)]
    lambda: f64,
    #[arg(long, value_enum, default_value = "dp")]
    solver: SolverArg,
    /// Write the selection here instead of after the summary on stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: SelectionFormat,
    /// Dump the DP value table as CSV (dp solver only).
    #[arg(long)]
    dump_table: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum StopArg {
    Mean,
    Total,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_delimiter = ',', default_values_t = experiments::DEFAULT_RATES.to_vec())]
    rates: Vec<f64>,
    /// Stop once the discrepancy falls below this value.
    #[arg(long, default_value_t = experiments::DEFAULT_PARITY_THRESHOLD)]
    threshold: f64,
    /// Compare the mean (D/|C|) or total discrepancy against the threshold.
    #[arg(long, value_enum, default_value = "mean")]
    stop_on: StopArg,
    #[arg(long, default_value_t = experiments::DEFAULT_MAX_DOUBLINGS)]
    max_doublings: u32,
    #[arg(long, value_enum, default_value = "dp")]
    solver: SolverArg,
    #[arg(long)]
    out_dir: PathBuf,
    /// Solve grid points one at a time.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct GenArgs {
    /// Synthetic spec JSON.
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Overrides the spec's seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    quota: QuotaArgs,
    #[arg(long)]
    lambda: f64,
    /// Also enumerate candidate subsets (n <= 20).
    #[arg(long)]
    subsets: bool,
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(io) if io.kind() != io::ErrorKind::NotFound => 1,
        _ => 2,
    }
}

fn run(cli: Cli) -> fairtopk::Result<()> {
    match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Stats(a) => cmd_stats(a),
    }
}

fn load(input: &InputArgs) -> fairtopk::Result<Instance> {
    let coding = CodingConfig::from_path(&input.coding)?;
    let instance = ingest::load_csv(&input.input, &coding)?;
    if input.min_class_size > 1 {
        let (kept, removed) = instance.filter_small_classes(input.min_class_size)?;
        if !removed.is_empty() {
            eprintln!("ignoring classes smaller than {}: {}", input.min_class_size, removed.join(", "));
        }
        return Ok(kept);
    }
    Ok(instance)
}

fn params(instance: &Instance, quota: &QuotaArgs, lambda: f64) -> fairtopk::Result<PolicyParams> {
    let n = instance.total_candidates();
    match (quota.k, quota.rate) {
        (Some(k), _) => PolicyParams::from_quota(n, k, lambda),
        (None, Some(rate)) => PolicyParams::from_rate(n, rate, lambda),
        (None, None) => Err(Error::InvalidParams("one of --k or --rate is required".into())),
    }
}

fn write_selection<W: Write>(
    instance: &Instance,
    selection: &Selection,
    format: SelectionFormat,
    mut out: W,
) -> fairtopk::Result<()> {
    match format {
        SelectionFormat::Csv => solve::write_selection_csv(instance, selection, out),
        SelectionFormat::Ids => {
            for c in selection.selected(instance) {
                writeln!(out, "{}", c.id)?;
            }
            Ok(())
        }
    }
}

fn cmd_solve(a: SolveArgs) -> fairtopk::Result<()> {
    let instance = load(&a.input)?;
    let params = params(&instance, &a.quota, a.lambda)?;
    let kind = SolverKind::from(a.solver);
    let solved: Solved = if let Some(path) = &a.dump_table {
        if kind != SolverKind::Dp {
            return Err(Error::InvalidParams("--dump-table requires --solver dp".into()));
        }
        let sol = solve_dp(&instance, &params)?;
        sol.table.write_csv(BufWriter::new(File::create(path)?))?;
        Solved {
            selection: sol.selection,
            breakdown: sol.breakdown,
            relaxed_total: None,
        }
    } else {
        solve::solve(&instance, &params, kind)?
    };

    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    solve::write_summary(&instance, &params, kind, &solved, &mut out)?;
    match &a.out {
        Some(path) => write_selection(&instance, &solved.selection, a.format, BufWriter::new(File::create(path)?))?,
        None => {
            writeln!(out)?;
            write_selection(&instance, &solved.selection, a.format, &mut out)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn cmd_sweep(a: SweepArgs) -> fairtopk::Result<()> {
    let instance = load(&a.input)?;
    let config = SweepConfig {
        rates: a.rates,
        lambda_grid: LambdaGrid::Geometric {
            max_doublings: a.max_doublings,
        },
        parity_threshold: a.threshold,
        stop_metric: match a.stop_on {
            StopArg::Mean => StopMetric::MeanDiscrepancy,
            StopArg::Total => StopMetric::TotalDiscrepancy,
        },
        // classes were already filtered at load time
        min_class_size: 1,
        solver: a.solver.into(),
        parallel: !a.sequential,
    };
    config.validate()?;
    for &rate in &config.rates {
        let outcome = experiments::run_sweep(&instance, rate, &config)?;
        let files = experiments::write_outputs(&outcome, &a.out_dir)?;
        let last = outcome.last();
        eprintln!(
            "p={rate}: {} points, final lambda {}, mean discrepancy {}, utility decrease {} -> {}",
            outcome.results.len(),
            last.lambda,
            last.mean_discrepancy,
            last.avg_utility_decrease,
            display(&files.results_csv)
        );
        if !outcome.parity_reached {
            eprintln!("warning: p={rate}: parity threshold {} not reached on the lambda grid", a.threshold);
        }
    }
    Ok(())
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

fn cmd_gen(a: GenArgs) -> fairtopk::Result<()> {
    let mut spec = SyntheticSpec::from_path(&a.spec)?;
    if let Some(seed) = a.seed {
        spec.seed = seed;
    }
    let instance = ingest::generate_synthetic(&spec)?;
    ingest::write_synthetic_csv(&instance, BufWriter::new(File::create(&a.out)?))?;
    eprintln!(
        "wrote {} candidates in {} classes to {}",
        instance.total_candidates(),
        instance.num_classes(),
        display(&a.out)
    );
    Ok(())
}

fn cmd_oracle(a: OracleArgs) -> fairtopk::Result<()> {
    let instance = load(&a.input)?;
    let params = params(&instance, &a.quota, a.lambda)?;
    let (selection, j) = oracle::oracle_counts(&instance, &params)?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    writeln!(out, "k: {}", params.quota)?;
    writeln!(out, "lambda: {}", params.tradeoff)?;
    writeln!(out, "J: {j}")?;
    let counts: Vec<String> = selection.counts.iter().map(|c| c.to_string()).collect();
    writeln!(out, "counts: {}", counts.join(","))?;
    if a.subsets {
        let (_, js) = oracle::oracle_subsets(&instance, &params)?;
        writeln!(out, "subsets_J: {js}")?;
    }
    Ok(())
}

fn cmd_stats(a: StatsArgs) -> fairtopk::Result<()> {
    let instance = load(&a.input)?;
    let stats = ingest::class_stats(&instance);
    match &a.out {
        Some(path) => ingest::write_stats_csv(&stats, BufWriter::new(File::create(path)?)),
        None => ingest::write_stats_csv(&stats, io::stdout().lock()),
    }
}
