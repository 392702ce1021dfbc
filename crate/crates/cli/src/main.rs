use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use selfloop::ensembles::{configuration_model, sbm, LabeledGraphData, Probability, SbmConfig};
use selfloop::experiments::{
    emit_report, ingest_external, run_accuracy_grid, run_walk_tables, walk_rows_for_graphs,
    write_walk_csv, ExperimentPlan, ExperimentResult, ExternalDataset, SelfLoopMode,
};
use selfloop::gnn::{influence_distribution, train, ModelConfig, ModelKind, TrainConfig};
use selfloop::walks::paradox_verdict;
use selfloop::{Graph, RngSeed};

const AFTER_HELP: &str = "Exit codes: 0 success, 2 usage error, 3 data error, 4 internal error.";

/// Walk statistics, random graph ensembles and GCN experiments on self-loops.
#[derive(Parser, Serialize)]
#[command(name = "selfloop", version, after_help = AFTER_HELP)]
struct Cli {
    /// Random seed [default: 0; `grid` falls back to the plan's base_seed]
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output path: a file for generate/stats/verify-paradox/train, a directory for grid/ingest
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for `grid` [default: number of CPUs]
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
enum Command {
    /// Sample a graph and write it as an edge list (plus features and labels for sbm)
    Generate(GraphSource),
    /// Print degree statistics of a graph
    Stats(GraphSource),
    /// Compare closed-walk proportions with and without self-loops
    VerifyParadox {
        #[command(flatten)]
        source: GraphSource,
        /// Longest walk length
        #[arg(long, default_value_t = 6)]
        kmax: usize,
    },
    /// Relative influence of every input node on node `v` after `k` linear aggregation steps
    Influence {
        #[command(flatten)]
        source: GraphSource,
        /// Target node
        #[arg(long)]
        node: usize,
        /// Number of aggregation steps
        #[arg(long)]
        k: usize,
        /// Only report the influence of this source node
        #[arg(long)]
        from: Option<usize>,
        /// Add self-loops before aggregating
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        self_loops: bool,
    },
    /// Train one model and report the final-epoch test accuracy
    Train(TrainArgs),
    /// Run an experiment plan and write accuracies.csv, walk_stats.csv and summary.json
    Grid {
        /// Plan file (JSON)
        #[arg(long)]
        plan: PathBuf,
    },
    /// Clean an exported dataset: drop self-loops and isolated nodes, renumber densely
    Ingest {
        /// Edge list file
        #[arg(long)]
        edges: PathBuf,
        /// Feature CSV without header, one row per node
        #[arg(long)]
        features: PathBuf,
        /// Label CSV with rows `node,label`
        #[arg(long)]
        labels: PathBuf,
        /// Dataset name
        #[arg(long, default_value = "dataset")]
        name: String,
    },
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum GraphModel {
    Sbm,
    Config,
}

#[derive(Args, Serialize)]
struct GraphSource {
    /// Edge list file (`u v` per line, `#` comments)
    #[arg(long, conflicts_with = "model")]
    input: Option<PathBuf>,

    /// Random graph model
    #[arg(long)]
    model: Option<GraphModel>,

    #[command(flatten)]
    sbm: SbmArgs,

    /// Degree sequence for `--model config`, comma separated
    #[arg(long, value_delimiter = ',')]
    degrees: Option<Vec<usize>>,
}

#[derive(Args, Serialize)]
struct SbmArgs {
    /// Intra-class edge probability, as a ratio ("6/100") or decimal
    #[arg(long)]
    p_intra: Option<Probability>,
    /// Inter-class edge probability, as a ratio ("3/900") or decimal
    #[arg(long)]
    p_inter: Option<Probability>,
    /// Number of classes
    #[arg(long, default_value_t = 10)]
    classes: usize,
    /// Nodes per class
    #[arg(long, default_value_t = 100)]
    per_class: usize,
    /// Feature dimension
    #[arg(long, default_value_t = 16)]
    feature_dim: usize,
    /// Standard deviation of the feature noise
    #[arg(long, default_value_t = 0.4)]
    sigma: f64,
}

#[derive(Args, Serialize)]
struct TrainArgs {
    /// Edge list file; requires --features and --labels
    #[arg(long, requires_all = ["features", "labels"])]
    input: Option<PathBuf>,
    /// Feature CSV without header, one row per node
    #[arg(long)]
    features: Option<PathBuf>,
    /// Label CSV with rows `node,label`
    #[arg(long)]
    labels: Option<PathBuf>,
    #[command(flatten)]
    sbm: SbmArgs,

    /// Model kind (gcn or mlp)
    #[arg(long, default_value = "gcn")]
    kind: ModelKind,
    /// Number of layers
    #[arg(long, default_value_t = 2)]
    layers: usize,
    /// GCN propagation over A + I (true) or A (false)
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    self_loops: bool,
    /// Hidden dimension
    #[arg(long, default_value_t = 16)]
    hidden: usize,
    /// Training epochs
    #[arg(long, default_value_t = 70)]
    epochs: usize,
    /// Adam learning rate
    #[arg(long, default_value_t = 0.01)]
    lr: f64,
    /// Share of nodes used for training
    #[arg(long, default_value_t = 0.8)]
    train_fraction: f64,
    /// Dropout rate after hidden layers (0.2 is the usual choice for real-world data)
    #[arg(long, default_value_t = 0.0)]
    dropout: f64,
}

/// Errors that should exit with the usage code.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            if let Some(u) = err.downcast_ref::<Usage>() {
                let _ = Cli::command()
                    .error(clap::error::ErrorKind::ArgumentConflict, &u.0)
                    .print();
                return ExitCode::from(2);
            }
            // library errors already include their source in the message
            let mut msg = err.to_string();
            for cause in err.chain().skip(1) {
                let cause = cause.to_string();
                if !msg.contains(&cause) {
                    msg = format!("{msg}: {cause}");
                }
            }
            eprintln!("error: {msg}");
            let data = err
                .chain()
                .find_map(|e| e.downcast_ref::<selfloop::Error>())
                .is_some_and(selfloop::Error::is_data_error);
            ExitCode::from(if data { 3 } else { 4 })
        }
    }
}

fn seed(cli: &Cli) -> RngSeed {
    RngSeed(cli.seed.unwrap_or(0))
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Generate(source) => generate(cli, source)?,
        Command::Stats(source) => stats(cli, source)?,
        Command::VerifyParadox { source, kmax } => verify_paradox(cli, source, *kmax)?,
        Command::Influence {
            source,
            node,
            k,
            from,
            self_loops,
        } => influence(cli, source, *node, *k, *from, *self_loops)?,
        Command::Train(args) => train_one(cli, args)?,
        Command::Grid { plan } => grid(cli, plan)?,
        Command::Ingest {
            edges,
            features,
            labels,
            name,
        } => ingest(
            cli,
            ExternalDataset {
                name: name.clone(),
                edge_file: edges.clone(),
                feature_file: features.clone(),
                label_file: labels.clone(),
            },
        )?,
    }
    Ok(())
}

#[derive(Serialize)]
struct RunConfig<'a> {
    seed: u64,
    workers: Option<usize>,
    out: Option<&'a Path>,
    #[serde(flatten)]
    command: &'a Command,
    #[serde(skip_serializing_if = "Option::is_none")]
    plan: Option<&'a ExperimentPlan>,
}

/// Writes `run_config.json` into `dir` (the current directory if `None`).
fn write_run_config(
    cli: &Cli,
    dir: Option<&Path>,
    plan: Option<&ExperimentPlan>,
) -> anyhow::Result<()> {
    let config = RunConfig {
        seed: plan.map_or(seed(cli).0, |p| p.base_seed.0),
        workers: cli.workers,
        out: cli.out.as_deref(),
        command: &cli.command,
        plan,
    };
    let dir = dir
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let path = dir.join("run_config.json");
    let text = serde_json::to_string_pretty(&config)? + "\n";
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

/// Directory that holds the output file `out`.
fn parent_dir(out: Option<&Path>) -> Option<&Path> {
    out.and_then(Path::parent)
}

fn sbm_config(args: &SbmArgs) -> anyhow::Result<SbmConfig> {
    let (Some(p_intra), Some(p_inter)) = (args.p_intra, args.p_inter) else {
        return Err(usage("--model sbm needs --p-intra and --p-inter"));
    };
    let cfg = SbmConfig {
        num_classes: args.classes,
        nodes_per_class: args.per_class,
        p_intra,
        p_inter,
        feature_dim: args.feature_dim,
        feature_sigma: args.sigma,
    };
    cfg.validate()?;
    Ok(cfg)
}

enum Loaded {
    Plain(Graph),
    Labeled(LabeledGraphData),
}

impl Loaded {
    fn graph(&self) -> &Graph {
        match self {
            Loaded::Plain(g) => g,
            Loaded::Labeled(d) => &d.graph,
        }
    }
}

fn load_graph(cli: &Cli, source: &GraphSource) -> anyhow::Result<Loaded> {
    match (&source.input, source.model) {
        (Some(path), _) => Ok(Loaded::Plain(Graph::read_edge_list(path, None)?)),
        (None, Some(GraphModel::Sbm)) => {
            Ok(Loaded::Labeled(sbm(&sbm_config(&source.sbm)?, seed(cli))?))
        }
        (None, Some(GraphModel::Config)) => {
            let degrees = source
                .degrees
                .as_ref()
                .ok_or_else(|| usage("--model config needs --degrees"))?;
            Ok(Loaded::Plain(configuration_model(degrees, seed(cli))?))
        }
        (None, None) => Err(usage("give --input or --model")),
    }
}

fn write_labeled(data: &LabeledGraphData, edges: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let stem = edges.with_extension("");
    let features_path = PathBuf::from(format!("{}.features.csv", stem.display()));
    let labels_path = PathBuf::from(format!("{}.labels.csv", stem.display()));
    data.graph.write_edge_list(edges)?;

    let mut text = String::new();
    for v in 0..data.n() {
        let row: Vec<String> = data.features.row(v).iter().map(f64::to_string).collect();
        writeln!(text, "{}", row.join(","))?;
    }
    std::fs::write(&features_path, text)
        .with_context(|| format!("writing {}", features_path.display()))?;

    let mut text = String::from("node,label\n");
    for (v, label) in data.labels.iter().enumerate() {
        writeln!(text, "{v},{label}")?;
    }
    std::fs::write(&labels_path, text)
        .with_context(|| format!("writing {}", labels_path.display()))?;
    Ok(vec![edges.to_path_buf(), features_path, labels_path])
}

fn generate(cli: &Cli, source: &GraphSource) -> anyhow::Result<()> {
    if source.model.is_none() {
        return Err(usage("generate needs --model sbm|config"));
    }
    let out = cli
        .out
        .as_deref()
        .ok_or_else(|| usage("generate needs --out FILE"))?;
    if let Some(dir) = parent_dir(Some(out)).filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let files = match load_graph(cli, source)? {
        Loaded::Plain(g) => {
            g.write_edge_list(out)?;
            vec![out.to_path_buf()]
        }
        Loaded::Labeled(data) => write_labeled(&data, out)?,
    };
    write_run_config(cli, parent_dir(Some(out)), None)?;
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn stats(cli: &Cli, source: &GraphSource) -> anyhow::Result<()> {
    let loaded = load_graph(cli, source)?;
    let g = loaded.graph();
    let isolated = g.isolated_nodes().len();
    let mut text = format!(
        "nodes {}\nedges {}\nisolated {}\nlargest_component {}\n",
        g.n(),
        g.num_edges(),
        isolated,
        g.largest_component().len()
    );
    match g.degree_stats() {
        Ok(s) => {
            writeln!(text, "mean_degree {}", s.mean_degree)?;
            writeln!(text, "mean_sq_degree {}", s.mean_sq_degree)?;
            writeln!(text, "mean_neighbor_degree {}", s.mean_neighbor_degree)?;
        }
        Err(e) => writeln!(text, "degree statistics unavailable: {e}")?,
    }
    print!("{text}");
    if let Some(out) = &cli.out {
        std::fs::write(out, &text).with_context(|| format!("writing {}", out.display()))?;
    }
    write_run_config(cli, parent_dir(cli.out.as_deref()), None)
}

fn verify_paradox(cli: &Cli, source: &GraphSource, kmax: usize) -> anyhow::Result<()> {
    if kmax == 0 {
        return Err(usage("--kmax must be at least 1"));
    }
    let loaded = load_graph(cli, source)?;
    let label = match (&source.input, &loaded) {
        (Some(path), _) => path.display().to_string(),
        (None, Loaded::Labeled(_)) => sbm_config(&source.sbm)?.label(),
        (None, Loaded::Plain(_)) => "configuration model".to_string(),
    };
    let g = loaded.graph().induced_subgraph(
        &(0..loaded.graph().n())
            .filter(|&v| loaded.graph().degree(v) > 0)
            .collect::<Vec<_>>(),
    );
    if g.n() == 0 {
        return Err(selfloop::Error::EdgelessGraph.into());
    }
    let modes = [SelfLoopMode::Without, SelfLoopMode::With];
    let rows = walk_rows_for_graphs(&label, std::slice::from_ref(&g), &modes, kmax)?;
    let verdict = paradox_verdict(&g)?;

    println!("{label}: {} nodes, {} edges", g.n(), g.num_edges());
    println!(
        "{:>3}  {:>12} {:>10} {:>10}  {:>12} {:>10} {:>10}",
        "k", "mean w/o", "std w/o", "est w/o", "mean with", "std with", "est with"
    );
    let est = |e: Option<f64>| e.map_or_else(|| "-".to_string(), |v| format!("{v:.6}"));
    for k in 1..=kmax {
        let without = &rows[k - 1];
        let with = &rows[kmax + k - 1];
        println!(
            "{k:>3}  {:>12.6} {:>10.6} {:>10}  {:>12.6} {:>10.6} {:>10}",
            without.mean,
            without.std,
            est(without.estimate),
            with.mean,
            with.std,
            est(with.estimate)
        );
    }
    println!(
        "verdict: k=2 proportion without self-loops {:.6} {} with self-loops {:.6} (estimates {:.6} vs {:.6}); paradox {}",
        verdict.empirical_without,
        if verdict.holds_empirically { ">" } else { "<=" },
        verdict.empirical_with,
        verdict.estimate_without,
        verdict.estimate_with,
        if verdict.holds_empirically { "holds" } else { "does not hold" },
    );
    if let Some(out) = &cli.out {
        let file =
            std::fs::File::create(out).with_context(|| format!("creating {}", out.display()))?;
        write_walk_csv(&rows, file, out)?;
    }
    write_run_config(cli, parent_dir(cli.out.as_deref()), None)
}

fn influence(
    cli: &Cli,
    source: &GraphSource,
    node: usize,
    k: usize,
    from: Option<usize>,
    self_loops: bool,
) -> anyhow::Result<()> {
    let loaded = load_graph(cli, source)?;
    let g = loaded.graph();
    let dist = influence_distribution(g, self_loops, k, node)?;
    let mut text = String::from("source,influence\n");
    match from {
        Some(u) => {
            let value = dist.get(u).ok_or_else(|| {
                anyhow!(selfloop::Error::NodeOutOfRange {
                    line: 0,
                    index: u,
                    n: g.n()
                })
            })?;
            writeln!(text, "{u},{value}")?;
        }
        None => {
            for (u, value) in dist.iter().enumerate() {
                writeln!(text, "{u},{value}")?;
            }
        }
    }
    print!("{text}");
    if let Some(out) = &cli.out {
        std::fs::write(out, &text).with_context(|| format!("writing {}", out.display()))?;
    }
    write_run_config(cli, parent_dir(cli.out.as_deref()), None)
}

fn train_one(cli: &Cli, args: &TrainArgs) -> anyhow::Result<()> {
    let data = match &args.input {
        Some(edges) => {
            let ds = ExternalDataset {
                name: "input".into(),
                edge_file: edges.clone(),
                feature_file: args.features.clone().expect("required by clap"),
                label_file: args.labels.clone().expect("required by clap"),
            };
            let ingested = ingest_external(&ds)?;
            for w in &ingested.warnings {
                log::warn!("{w}");
            }
            ingested.data
        }
        None => sbm(&sbm_config(&args.sbm)?, seed(cli))?.remove_isolated(),
    };
    if data.n() == 0 {
        return Err(selfloop::Error::EdgelessGraph.into());
    }
    let model_cfg = ModelConfig {
        kind: args.kind,
        num_layers: args.layers,
        self_loops: args.kind == ModelKind::Gcn && args.self_loops,
        hidden_dim: args.hidden,
    };
    let train_cfg = TrainConfig {
        epochs: args.epochs,
        learning_rate: args.lr,
        train_fraction: args.train_fraction,
        dropout: args.dropout,
        seed: seed(cli),
        ..TrainConfig::default()
    };
    let outcome = train(&data, &model_cfg, &train_cfg)?;
    println!(
        "{} k={} self_loops={}: test accuracy {:.4} on {} nodes, final loss {:.6}",
        args.kind.as_str(),
        args.layers,
        model_cfg.self_loops,
        outcome.test_accuracy,
        outcome.test_nodes.len(),
        outcome.final_loss
    );
    if let Some(out) = &cli.out {
        let text = serde_json::to_string(&outcome.model)? + "\n";
        std::fs::write(out, text).with_context(|| format!("writing {}", out.display()))?;
    }
    write_run_config(cli, parent_dir(cli.out.as_deref()), None)
}

fn grid(cli: &Cli, plan_path: &Path) -> anyhow::Result<()> {
    let out = cli
        .out
        .as_deref()
        .ok_or_else(|| usage("grid needs --out DIR"))?;
    let mut plan = ExperimentPlan::read(plan_path)?;
    if let Some(s) = cli.seed {
        plan.base_seed = RngSeed(s);
    }
    plan.validate()?;
    let workers = match cli.workers {
        Some(0) => bail!(usage("--workers must be at least 1")),
        Some(w) => w,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let accuracies = run_accuracy_grid(&plan, workers)?;
    let failed = accuracies.iter().filter(|r| r.error.is_some()).count();
    for row in accuracies.iter().filter(|r| r.error.is_some()) {
        log::error!(
            "{} {} k={} self_loops={} run {}: {}",
            row.setting,
            row.kind.as_str(),
            row.k,
            row.self_loops,
            row.run,
            row.error.as_deref().unwrap_or_default()
        );
    }
    let walk_rows = run_walk_tables(&plan)?;
    let results = ExperimentResult {
        accuracies,
        walk_rows,
    };
    let files = emit_report(&results, out)?;
    write_run_config(cli, Some(out), Some(&plan))?;
    for f in files {
        println!("wrote {}", f.display());
    }
    if failed == results.accuracies.len() && failed > 0 {
        return Err(selfloop::Error::Config(format!("all {failed} grid cells failed")).into());
    }
    if failed > 0 {
        eprintln!(
            "warning: {failed} of {} cells failed",
            results.accuracies.len()
        );
    }
    Ok(())
}

fn ingest(cli: &Cli, ds: ExternalDataset) -> anyhow::Result<()> {
    let out = cli
        .out
        .as_deref()
        .ok_or_else(|| usage("ingest needs --out DIR"))?;
    let ingested = ingest_external(&ds)?;
    for w in &ingested.warnings {
        eprintln!("warning: {w}");
    }
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let files = write_labeled(&ingested.data, &out.join("edges.txt"))?;
    let ids_path = out.join("node_ids.csv");
    let mut text = String::from("node,original\n");
    let ids = ingested.data.graph.node_ids();
    for v in 0..ingested.data.n() {
        writeln!(text, "{v},{}", ids.map_or(v, |ids| ids[v]))?;
    }
    std::fs::write(&ids_path, text).with_context(|| format!("writing {}", ids_path.display()))?;
    write_run_config(cli, Some(out), None)?;
    println!(
        "{}: {} nodes, {} edges, {} classes, {} isolated nodes dropped",
        ds.name,
        ingested.data.n(),
        ingested.data.graph.num_edges(),
        ingested.data.num_classes(),
        ingested.dropped.len()
    );
    for f in files.iter().chain([&ids_path]) {
        println!("wrote {}", f.display());
    }
    Ok(())
}
