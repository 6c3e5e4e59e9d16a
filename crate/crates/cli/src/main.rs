mod settings;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use c2knn::analysis::{
    check_theorem1, check_theorem2, profile_pair, Theorem1Report, Theorem2Report,
};
use c2knn::baselines::{run_bruteforce, run_greedy_full, run_lsh};
use c2knn::clustering::{build_clusters, dump_clusters, ClusteringConfig};
use c2knn::dataset::{binarize_and_filter, is_snapshot, load_ratings, make_folds};
use c2knn::io::{load_graph, save_graph};
use c2knn::metrics::{quality, recall_at_n, recommend, RecallAveraging};
use c2knn::pipeline::build_c2;
use c2knn::report::{DatasetInfo, RunReport};
use c2knn::{BuildRun, Dataset, GreedyVariant, KnnGraph, OracleMode};

use settings::{Algo, InputArgs, ParamArgs, Settings, UsageError};

#[derive(Debug, Parser)]
#[command(
    name = "c2knn",
    version,
    about = "Approximate KNN graphs over user/item profiles"
)]
struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a KNN graph and write it with a JSON report.
    Build(BuildCmd),
    /// Build with one algorithm and report time, quality and oracle calls.
    Bench(BenchCmd),
    /// Quality and recall of an algorithm (or of a saved graph).
    Eval(EvalCmd),
    /// Top-N items for one user from a saved graph.
    Recommend(RecommendCmd),
    /// Grid over t, b and N; one CSV row per combination.
    Sweep(SweepCmd),
    /// Monte Carlo checks of the co-clustering bounds.
    VerifyTheorems(VerifyCmd),
    /// Dataset utilities.
    #[command(subcommand)]
    Dataset(DatasetCmd),
}

#[derive(Debug, Args)]
struct BuildCmd {
    #[arg(long, value_enum, default_value = "c2")]
    algo: Algo,
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    params: ParamArgs,
    /// Graph output; `.bin`/`.c2kg` selects the binary format.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// JSON report path (stdout when absent).
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write `func bucket chain size` per cluster (c2 only).
    #[arg(long)]
    dump_clusters: Option<PathBuf>,
    /// Include the per-cluster audit in the report.
    #[arg(long)]
    audit: bool,
}

#[derive(Debug, Args)]
struct BenchCmd {
    #[arg(value_enum)]
    algo: Algo,
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    params: ParamArgs,
    /// Skip the exact reference graph and quality.
    #[arg(long)]
    no_quality: bool,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalCmd {
    #[arg(long, value_enum, default_value = "c2")]
    algo: Algo,
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    params: ParamArgs,
    /// Evaluate this saved graph's quality instead of building one.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Cross-validation folds for recall (0 disables recall).
    #[arg(long, default_value_t = 5)]
    folds: usize,
    /// Recommendations per user.
    #[arg(long, default_value_t = 30)]
    n_rec: usize,
    #[arg(long, value_enum, default_value = "macro")]
    recall_averaging: Averaging,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Averaging {
    Macro,
    Micro,
}

#[derive(Debug, Args)]
struct RecommendCmd {
    #[command(flatten)]
    input: InputArgs,
    /// Saved graph over the same dataset.
    #[arg(long)]
    graph: PathBuf,
    /// External user id.
    #[arg(long)]
    user: String,
    #[arg(long, short, default_value_t = 30)]
    n: usize,
    #[arg(long, default_value_t = 30)]
    k: usize,
}

#[derive(Debug, Args)]
struct SweepCmd {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    params: ParamArgs,
    /// Comma-separated t values.
    #[arg(long = "t-grid", value_delimiter = ',')]
    t_grid: Vec<usize>,
    /// Comma-separated b values.
    #[arg(long = "b-grid", value_delimiter = ',')]
    b_grid: Vec<u32>,
    /// Comma-separated N values.
    #[arg(long = "N-grid", value_delimiter = ',')]
    n_grid: Vec<usize>,
    /// CSV output (stdout when absent).
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyCmd {
    #[arg(long, default_value_t = 100_000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "json")]
    format: ReportFormat,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ReportFormat {
    Json,
    Markdown,
}

#[derive(Debug, Subcommand)]
enum DatasetCmd {
    /// Binarize and filter a ratings file into a snapshot.
    Prepare {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, short)]
        output: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Build(c) => cmd_build(c),
        Command::Bench(c) => cmd_bench(c),
        Command::Eval(c) => cmd_eval(c),
        Command::Recommend(c) => cmd_recommend(c),
        Command::Sweep(c) => cmd_sweep(c),
        Command::VerifyTheorems(c) => cmd_verify(c),
        Command::Dataset(DatasetCmd::Prepare { input, output }) => cmd_prepare(input, output),
    }
}

fn init_threads(threads: usize) {
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
    {
        log::debug!("thread pool already initialised: {e}");
    }
}

fn load_dataset(input: &InputArgs, s: &Settings) -> Result<Dataset> {
    let path = &input.input;
    if !path.exists() {
        bail!(UsageError(format!(
            "input {} does not exist",
            path.display()
        )));
    }
    let ds = if is_snapshot(path)? {
        Dataset::load_snapshot(path)?
    } else {
        let records = load_ratings(path, s.input_format()?)?;
        binarize_and_filter(&records, s.threshold, s.min_profile)?
    };
    log::info!(
        "dataset: {} users, {} items, {} ratings ({} users dropped)",
        ds.n_users(),
        ds.n_items(),
        ds.n_ratings(),
        ds.dropped_users()
    );
    Ok(ds)
}

fn run_algo(ds: &Dataset, algo: Algo, s: &Settings) -> Result<BuildRun> {
    Ok(match algo {
        Algo::C2 => build_c2(ds, &s.c2())?,
        Algo::Bruteforce => run_bruteforce(ds, s.oracle(), s.k, s.seed)?,
        Algo::Hyrec => {
            run_greedy_full(ds, s.oracle(), s.k, &s.greedy_params(GreedyVariant::Hyrec))?
        }
        Algo::Nndescent => run_greedy_full(
            ds,
            s.oracle(),
            s.k,
            &s.greedy_params(GreedyVariant::NnDescent),
        )?,
        Algo::Lsh => run_lsh(ds, &s.lsh())?,
    })
}

fn exact_graph(ds: &Dataset, k: usize) -> Result<KnnGraph> {
    Ok(run_bruteforce(ds, OracleMode::ExactJaccard, k, 0)?.graph)
}

fn params_json(algo: Algo, s: &Settings) -> serde_json::Value {
    let mut v = serde_json::to_value(s).expect("settings serialize");
    v["algo"] = serde_json::Value::from(algo.name());
    v
}

fn write_json(value: &impl Serialize, path: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match path {
        Some(p) => {
            std::fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display()))?
        }
        None => {
            let mut out = std::io::stdout().lock();
            if let Err(e) = writeln!(out, "{text}").and_then(|()| out.flush()) {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    return Err(e.into());
                }
            }
        }
    }
    Ok(())
}

fn cmd_build(c: BuildCmd) -> Result<()> {
    let s = Settings::resolve(&c.params, Some(&c.input))?;
    init_threads(s.threads);
    let ds = load_dataset(&c.input, &s)?;
    if let Some(path) = &c.dump_clusters {
        if c.algo != Algo::C2 {
            bail!(UsageError(
                "--dump-clusters applies to --algo c2 only".into()
            ));
        }
        let cfg = ClusteringConfig::new(s.t, s.b, s.n_max, s.seed)?;
        std::fs::write(path, dump_clusters(&build_clusters(&ds, &cfg)))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let run = run_algo(&ds, c.algo, &s)?;
    if let Some(out) = &c.output {
        save_graph(&run.graph, &ds, out)?;
    }
    let mut report = RunReport::new(
        DatasetInfo::of(&ds, c.input.input.display().to_string()),
        c.algo.name(),
        params_json(c.algo, &s),
        &run,
    );
    if c.audit {
        report.audit = run.audit.clone();
    }
    write_json(&report, c.report.as_deref())
}

fn cmd_bench(c: BenchCmd) -> Result<()> {
    let s = Settings::resolve(&c.params, Some(&c.input))?;
    init_threads(s.threads);
    let ds = load_dataset(&c.input, &s)?;
    let run = run_algo(&ds, c.algo, &s)?;
    let mut report = RunReport::new(
        DatasetInfo::of(&ds, c.input.input.display().to_string()),
        c.algo.name(),
        params_json(c.algo, &s),
        &run,
    );
    if !c.no_quality {
        report.quality = Some(quality(&run.graph, &exact_graph(&ds, s.k)?, &ds)?);
    }
    write_json(&report, c.report.as_deref())
}

fn cmd_eval(c: EvalCmd) -> Result<()> {
    let s = Settings::resolve(&c.params, Some(&c.input))?;
    init_threads(s.threads);
    let ds = load_dataset(&c.input, &s)?;
    let exact = exact_graph(&ds, s.k)?;
    let (run, algo_name) = match &c.graph {
        Some(path) => {
            let g = load_graph(&ds, s.k, path)?;
            (run_placeholder(g), "saved-graph")
        }
        None => (run_algo(&ds, c.algo, &s)?, c.algo.name()),
    };
    let mut report = RunReport::new(
        DatasetInfo::of(&ds, c.input.input.display().to_string()),
        algo_name,
        params_json(c.algo, &s),
        &run,
    );
    report.quality = Some(quality(&run.graph, &exact, &ds)?);
    if c.folds > 0 && c.graph.is_none() {
        let averaging = match c.recall_averaging {
            Averaging::Macro => RecallAveraging::Macro,
            Averaging::Micro => RecallAveraging::Micro,
        };
        let folds = make_folds(&ds, c.folds, s.seed)?;
        let graphs = folds
            .iter()
            .map(|f| run_algo(&f.train, c.algo, &s).map(|r| r.graph))
            .collect::<Result<Vec<_>>>()?;
        report.recall = Some(recall_at_n(&graphs, &folds, c.n_rec, averaging)?);
    }
    write_json(&report, c.report.as_deref())
}

fn run_placeholder(graph: KnnGraph) -> BuildRun {
    BuildRun {
        graph,
        evaluations: 0,
        phases: Vec::new(),
        cluster_stats: None,
        schedule: None,
        audit: Vec::new(),
        updates: Vec::new(),
    }
}

fn cmd_recommend(c: RecommendCmd) -> Result<()> {
    let s = Settings::resolve(&ParamArgs::default(), Some(&c.input))?;
    let ds = load_dataset(&c.input, &s)?;
    let g = load_graph(&ds, c.k, &c.graph)?;
    let u = ds
        .user_internal(&c.user)
        .ok_or_else(|| UsageError(format!("unknown user {:?}", c.user)))?;
    let out = std::io::stdout();
    let mut w = out.lock();
    for (item, score) in recommend(&g, &ds, u, c.n)? {
        writeln!(w, "{}\t{:.6}", ds.item_external(item), score)?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct SweepRow {
    t: usize,
    b: u32,
    #[serde(rename = "N")]
    n_max: usize,
    seconds: f64,
    quality: f64,
    oracle_invocations: u64,
    clusters: usize,
}

fn cmd_sweep(c: SweepCmd) -> Result<()> {
    let s = Settings::resolve(&c.params, Some(&c.input))?;
    init_threads(s.threads);
    let t_grid = if c.t_grid.is_empty() {
        vec![s.t]
    } else {
        c.t_grid.clone()
    };
    let b_grid = if c.b_grid.is_empty() {
        vec![s.b]
    } else {
        c.b_grid.clone()
    };
    let n_grid = if c.n_grid.is_empty() {
        vec![s.n_max]
    } else {
        c.n_grid.clone()
    };
    if t_grid.contains(&0) || b_grid.contains(&0) || n_grid.contains(&0) {
        bail!(UsageError("grid values must be at least 1".into()));
    }
    let ds = load_dataset(&c.input, &s)?;
    let exact = exact_graph(&ds, s.k)?;
    let mut rows = Vec::new();
    for &b in &b_grid {
        for &n_max in &n_grid {
            let mut last: Option<f64> = None;
            for &t in &t_grid {
                let point = Settings {
                    t,
                    b,
                    n_max,
                    ..s.clone()
                };
                let run = run_algo(&ds, Algo::C2, &point)?;
                let q = quality(&run.graph, &exact, &ds)?;
                if let Some(prev) = last {
                    if q + 1e-9 < prev {
                        log::warn!("quality fell from {prev:.4} to {q:.4} when t rose to {t} (b={b}, N={n_max})");
                    }
                }
                last = Some(q);
                rows.push(SweepRow {
                    t,
                    b,
                    n_max,
                    seconds: run.seconds(),
                    quality: q,
                    oracle_invocations: run.evaluations,
                    clusters: run.cluster_stats.map_or(0, |c| c.clusters),
                });
            }
        }
    }
    let sink: Box<dyn Write> = match &c.output {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    };
    write_csv(sink, &rows)
}

fn write_csv(mut w: impl Write, rows: &[SweepRow]) -> Result<()> {
    writeln!(w, "t,b,N,seconds,quality,oracle_invocations,clusters")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{:.6},{:.6},{},{}",
            r.t, r.b, r.n_max, r.seconds, r.quality, r.oracle_invocations, r.clusters
        )?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct VerifyReport {
    version: u32,
    seed: u64,
    theorem1: Vec<Theorem1Report>,
    theorem2: Vec<Theorem2Report>,
}

fn cmd_verify(c: VerifyCmd) -> Result<()> {
    if c.trials == 0 {
        bail!(UsageError("trials must be at least 1".into()));
    }
    let mut t1 = Vec::new();
    for (size, shared) in [(160, 64), (200, 144), (130, 4)] {
        let (p1, p2) = profile_pair(size, size, shared);
        let j = c2knn::similarity::jaccard(&p1, &p2);
        t1.push(check_theorem1(
            &p1,
            &p2,
            4096,
            c.trials,
            c.seed,
            Some((j - 0.078, j + 0.234)),
        )?);
    }
    let mut t2 = Vec::new();
    for (ell, b, d) in [
        (256, 4096, 0.5),
        (256, 4096, 1.5),
        (64, 512, 1.0),
        (512, 4096, 0.25),
    ] {
        t2.push(check_theorem2(ell, b, d, c.trials, c.seed)?);
    }
    let report = VerifyReport {
        version: c2knn::report::REPORT_VERSION,
        seed: c.seed,
        theorem1: t1,
        theorem2: t2,
    };
    match c.format {
        ReportFormat::Json => write_json(&report, None),
        ReportFormat::Markdown => {
            println!("## Co-hash probability (b = 4096, {} trials)\n", c.trials);
            println!("| ℓ∪ | J | mean κ/ℓ∪ | P̂ | J − κ/ℓ∪ | J + 3κ/ℓ∪ | violations | in [J−0.078, J+0.234] |");
            println!("|---|---|---|---|---|---|---|---|");
            for r in &report.theorem1 {
                println!(
                    "| {} | {:.4} | {:.5} | {:.4} | {:.4} | {:.4} | {:.4}% | {:.4} |",
                    r.ell_union,
                    r.jaccard,
                    r.mean_density,
                    r.p_hat,
                    r.lower_bound,
                    r.upper_bound,
                    100.0 * r.violation_rate(),
                    r.interval_rate()
                );
            }
            println!("\n## Collision density ({} trials)\n", c.trials);
            println!("| ℓ∪ | b | d | threshold | bound | frequency | std err |");
            println!("|---|---|---|---|---|---|---|");
            for r in &report.theorem2 {
                println!(
                    "| {} | {} | {} | {:.5} | {:.5} | {:.5} | {:.5} |",
                    r.ell_union, r.b, r.d, r.threshold, r.bound, r.frequency, r.std_error
                );
            }
            Ok(())
        }
    }
}

fn cmd_prepare(input: InputArgs, output: PathBuf) -> Result<()> {
    let s = Settings::resolve(&ParamArgs::default(), Some(&input))?;
    let ds = load_dataset(&input, &s)?;
    ds.save_snapshot(&output)?;
    write_json(
        &DatasetInfo::of(&ds, input.input.display().to_string()),
        None,
    )
}
