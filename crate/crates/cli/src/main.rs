//! `argbench`: the command-line pipeline around `argbench-core`.
//!
//! Verbs mirror the benchmark workflow: `generate` a labelled dataset,
//! `evaluate` it against a model, `score` the finished run, `report` across
//! scored runs, and `hard-subset` the instances that defeated earlier runs.
//! A `label` verb prints grounded labellings for debugging.
//!
//! Exit codes: 0 success, 2 flag validation (the message names the flag),
//! 3 environment trouble (unreadable/unwritable paths), 4 data integrity
//! (malformed or mismatched files). Nothing is written before flag
//! validation passes.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{ArgGroup, Args, Parser, Subcommand};

use argbench_core::{
    breakdown, breakdown_split_by_label, build_client, compute_metrics, dataset_records,
    generate_dataset, grounded_labelling, load_model_config, read_dataset, read_results,
    render_reports, root_accepted, run_evaluation, select_hard_subset, write_breakdown_csv,
    write_dataset, write_labelled_breakdown_csv, write_manifest, write_metrics_csv, ArgumentId,
    AttackGraph, BreakdownKey, ConfusionMatrix, DataError, DatasetSpec, EvalError, EvalItem,
    Family, GatewayError, GraphError, MetricsSummary, Ontology, OntologyError, PuzzleError,
    ReportError, RunManifest, Topology,
};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {}", error.message());
            ExitCode::from(error.exit_code())
        }
    }
}

#[derive(Parser)]
#[command(
    name = "argbench",
    version,
    about = "Witness-testimony reasoning benchmarks: generate, evaluate, score, report",
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labelled dataset of witness puzzles
    Generate(GenerateArgs),
    /// Query a model with every prompt in a dataset, resumably
    Evaluate(EvaluateArgs),
    /// Score a finished run against its dataset
    Score(ScoreArgs),
    /// Render charts and a combined table from scored runs
    Report(ReportArgs),
    /// Keep the instances that at least one run got wrong
    HardSubset(HardSubsetArgs),
    /// Print the grounded labelling of a graph (debugging aid)
    Label(LabelArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Graph family: "linear" chains or "nonlinear" star graphs
    #[arg(long)]
    family: Family,
    /// Smallest argument count to include
    #[arg(long)]
    n_min: usize,
    /// Largest argument count to include
    #[arg(long)]
    n_max: usize,
    /// Instances per topology
    #[arg(long, default_value_t = 1)]
    variations: usize,
    /// Master seed; everything else derives from it
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Shuffle the presentation order of the fact lines
    #[arg(long)]
    shuffled: bool,
    /// Witness-name list overriding the built-in one (one name per line)
    #[arg(long, value_name = "FILE")]
    names: Option<PathBuf>,
    /// Statement list overriding the built-in one (one statement per line)
    #[arg(long, value_name = "FILE")]
    statements: Option<PathBuf>,
    /// Dataset file to write (JSON lines)
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Dataset to evaluate (JSON lines)
    #[arg(long, value_name = "FILE")]
    dataset: PathBuf,
    /// Model configuration (TOML)
    #[arg(long, value_name = "FILE")]
    model_config: PathBuf,
    /// Run directory; receives manifest.json and results.jsonl
    #[arg(long, value_name = "DIR")]
    run: PathBuf,
}

#[derive(Args)]
struct ScoreArgs {
    /// Results file from an evaluation run
    #[arg(long, value_name = "FILE")]
    results: PathBuf,
    /// The dataset those results answer
    #[arg(long, value_name = "FILE")]
    dataset: PathBuf,
    /// Breakdown key to tabulate (repeatable): n_args, num_paths, label
    #[arg(long = "breakdown", value_name = "KEY")]
    breakdowns: Vec<BreakdownKey>,
    /// Directory for the score tables
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Scored run directory (repeatable); the basename names the run
    #[arg(long = "run", value_name = "DIR", required = true)]
    runs: Vec<PathBuf>,
    /// Directory for the report files
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Args)]
struct HardSubsetArgs {
    /// The dataset every run answered
    #[arg(long, value_name = "FILE")]
    dataset: PathBuf,
    /// Results file of a full run over the dataset (repeatable)
    #[arg(long = "results", value_name = "FILE", required = true)]
    results: Vec<PathBuf>,
    /// Dataset file to write with only the hard instances
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Args)]
#[command(group = ArgGroup::new("graph").required(true).args(["topology", "n"]))]
struct LabelArgs {
    /// Topology to label, e.g. "linear:4" or "star:1+2"
    #[arg(long, value_name = "TOPOLOGY")]
    topology: Option<String>,
    /// Argument count of an explicit graph
    #[arg(long, conflicts_with = "topology")]
    n: Option<usize>,
    /// Attack edges of an explicit graph, e.g. "1>0,2>1"
    #[arg(
        long,
        value_name = "EDGES",
        requires = "n",
        conflicts_with = "topology"
    )]
    edges: Option<String>,
}

/// Everything a verb can fail with, folded to the three failure exits.
enum CliError {
    /// A flag value is unusable; the message names the flag. Exit 2.
    Flags(String),
    /// The environment got in the way: unreadable or unwritable paths. Exit 3.
    Environment(String),
    /// A file was read but its content is wrong or inconsistent. Exit 4.
    Data(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Flags(_) => 2,
            CliError::Environment(_) => 3,
            CliError::Data(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Flags(m) | CliError::Environment(m) | CliError::Data(m) => m,
        }
    }
}

impl From<OntologyError> for CliError {
    fn from(error: OntologyError) -> Self {
        match error {
            OntologyError::Io { .. } => CliError::Environment(error.to_string()),
            _ => CliError::Data(error.to_string()),
        }
    }
}

impl From<PuzzleError> for CliError {
    fn from(error: PuzzleError) -> Self {
        match error {
            // flag problems normally caught before the library runs
            PuzzleError::Graph(GraphError::ZeroCount) => {
                CliError::Flags("--n-min must be at least 1".into())
            }
            PuzzleError::Graph(GraphError::InvertedRange { n_min, n_max }) => CliError::Flags(
                format!("--n-min ({n_min}) must not exceed --n-max ({n_max})"),
            ),
            PuzzleError::ZeroVariations => {
                CliError::Flags("--variations must be at least 1".into())
            }
            _ => CliError::Data(error.to_string()),
        }
    }
}

impl From<DataError> for CliError {
    fn from(error: DataError) -> Self {
        match error {
            DataError::Io { .. } => CliError::Environment(error.to_string()),
            _ => CliError::Data(error.to_string()),
        }
    }
}

impl From<GatewayError> for CliError {
    fn from(error: GatewayError) -> Self {
        match error {
            GatewayError::Io { .. } => CliError::Environment(error.to_string()),
            _ => CliError::Data(error.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(error: EvalError) -> Self {
        match error {
            EvalError::Io { .. } => CliError::Environment(error.to_string()),
            _ => CliError::Data(error.to_string()),
        }
    }
}

impl From<ReportError> for CliError {
    fn from(error: ReportError) -> Self {
        match error {
            ReportError::Io { .. } => CliError::Environment(error.to_string()),
            ReportError::Malformed { .. } => CliError::Data(error.to_string()),
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Generate(args) => cmd_generate(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Score(args) => cmd_score(args),
        Command::Report(args) => cmd_report(args),
        Command::HardSubset(args) => cmd_hard_subset(args),
        Command::Label(args) => cmd_label(args),
    }
}

fn cmd_generate(args: GenerateArgs) -> Result<(), CliError> {
    if args.n_min == 0 {
        return Err(CliError::Flags("--n-min must be at least 1".into()));
    }
    if args.n_min > args.n_max {
        return Err(CliError::Flags(format!(
            "--n-min ({}) must not exceed --n-max ({})",
            args.n_min, args.n_max
        )));
    }
    if args.variations == 0 {
        return Err(CliError::Flags("--variations must be at least 1".into()));
    }
    let ontology = Ontology::with_overrides(args.names.as_deref(), args.statements.as_deref())?;
    let spec = DatasetSpec {
        family: args.family,
        n_min: args.n_min,
        n_max: args.n_max,
        variations: args.variations,
        master_seed: args.seed,
        shuffled: args.shuffled,
    };
    let instances = generate_dataset(&spec, &ontology)?;
    let records = dataset_records(&instances);
    write_dataset(&args.out, &records)?;
    let yes = records.iter().filter(|r| r.label).count();
    println!(
        "wrote {} instances to {}",
        records.len(),
        args.out.display()
    );
    println!(
        "yes labels: {yes}/{} ({:.2}%)",
        records.len(),
        100.0 * yes as f64 / records.len() as f64
    );
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<(), CliError> {
    let dataset = read_dataset(&args.dataset)?;
    let config = load_model_config(&args.model_config)?;
    let client = build_client(&config)?;
    fs::create_dir_all(&args.run).map_err(|e| {
        CliError::Environment(format!(
            "failed to create run directory {}: {e}",
            args.run.display()
        ))
    })?;
    // the manifest records what is about to run, so it lands first
    let manifest = RunManifest::new(
        &args.dataset,
        &args.model_config,
        config.provider.as_str(),
        dataset.len(),
    );
    write_manifest(&args.run.join("manifest.json"), &manifest)?;
    let items: Vec<EvalItem> = dataset.iter().map(EvalItem::from).collect();
    let outcome = run_evaluation(&items, client.as_ref(), &args.run.join("results.jsonl"))?;
    let matrix = ConfusionMatrix::from_records(&outcome.records);
    println!("{} new requests", outcome.new_requests);
    println!(
        "parsed {} unparsed {} failed {}",
        matrix.parsed, matrix.unparsed, matrix.failed
    );
    Ok(())
}

fn cmd_score(args: ScoreArgs) -> Result<(), CliError> {
    let records = read_results(&args.results)?;
    let dataset = read_dataset(&args.dataset)?;
    if records.len() != dataset.len() {
        return Err(CliError::Data(format!(
            "{} holds {} records but the dataset has {} instances",
            args.results.display(),
            records.len(),
            dataset.len()
        )));
    }
    for (line, (record, instance)) in records.iter().zip(&dataset).enumerate() {
        if record.id != instance.id {
            return Err(CliError::Data(format!(
                "{} line {}: found results for {} where the dataset has {}",
                args.results.display(),
                line + 1,
                record.id,
                instance.id
            )));
        }
    }
    let mut keys: Vec<BreakdownKey> = Vec::new();
    for key in args.breakdowns {
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    if keys.is_empty() {
        keys = vec![
            BreakdownKey::NArgs,
            BreakdownKey::NumPaths,
            BreakdownKey::Label,
        ];
    }
    fs::create_dir_all(&args.out).map_err(|e| {
        CliError::Environment(format!(
            "failed to create output directory {}: {e}",
            args.out.display()
        ))
    })?;
    let matrix = ConfusionMatrix::from_records(&records);
    let metrics = compute_metrics(&matrix)?;
    let summary = MetricsSummary { metrics, matrix };
    write_metrics_csv(&args.out.join("metrics.csv"), &summary)?;
    for key in &keys {
        let rows = breakdown(&records, &dataset, *key)?;
        write_breakdown_csv(&args.out.join(format!("breakdown_{key}.csv")), &rows)?;
    }
    let nonlinear = dataset.iter().any(|r| r.family == Family::Nonlinear);
    if nonlinear && keys.contains(&BreakdownKey::NArgs) {
        let rows = breakdown_split_by_label(&records, &dataset, BreakdownKey::NArgs)?;
        write_labelled_breakdown_csv(&args.out.join("breakdown_n_args_by_label.csv"), &rows)?;
    }
    println!(
        "accuracy {:.2} f1 {:.2} mcc {:.2} recall {:.2} precision {:.2}",
        metrics.accuracy, metrics.f1, metrics.mcc, metrics.recall, metrics.precision
    );
    println!(
        "parsed {} unparsed {} failed {}",
        matrix.parsed, matrix.unparsed, matrix.failed
    );
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<(), CliError> {
    let mut named: Vec<(String, PathBuf)> = Vec::with_capacity(args.runs.len());
    for dir in args.runs {
        let base = dir
            .file_name()
            .map(|name| name.to_string_lossy().into_owned())
            .unwrap_or_else(|| "run".to_string());
        // basenames name the runs in tables and charts; disambiguate repeats
        let mut name = base.clone();
        let mut suffix = 2;
        while named.iter().any(|(existing, _)| *existing == name) {
            name = format!("{base}-{suffix}");
            suffix += 1;
        }
        named.push((name, dir));
    }
    let written = render_reports(&named, &args.out)?;
    println!(
        "wrote {} report files to {}",
        written.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_hard_subset(args: HardSubsetArgs) -> Result<(), CliError> {
    let dataset = read_dataset(&args.dataset)?;
    let mut runs = Vec::with_capacity(args.results.len());
    for path in &args.results {
        runs.push(read_results(path)?);
    }
    let hard = select_hard_subset(&runs, &dataset)?;
    let subset: Vec<_> = dataset
        .iter()
        .filter(|record| hard.contains(&record.id))
        .cloned()
        .collect();
    write_dataset(&args.out, &subset)?;
    if subset.is_empty() {
        eprintln!(
            "warning: the hard subset is empty; every instance was answered correctly in every run"
        );
    }
    println!("hard subset size {}", subset.len());
    println!("wrote {} instances to {}", subset.len(), args.out.display());
    Ok(())
}

fn cmd_label(args: LabelArgs) -> Result<(), CliError> {
    let (graph, is_benchmark) = match (&args.topology, args.n) {
        (Some(text), _) => {
            let topology = Topology::from_str(text)
                .map_err(|e| CliError::Flags(format!("--topology: {e}")))?;
            let graph = topology
                .to_graph()
                .map_err(|e| CliError::Flags(format!("--topology: {e}")))?;
            (graph, true)
        }
        (None, Some(n)) => {
            let edges = parse_edges(args.edges.as_deref().unwrap_or(""))?;
            let graph = AttackGraph::new(n, edges)
                .map_err(|e| CliError::Flags(format!("--n/--edges: {e}")))?;
            (graph, false)
        }
        (None, None) => unreachable!("clap requires --topology or --n"),
    };
    let labelling = grounded_labelling(&graph);
    for (id, label) in labelling.iter() {
        println!("{}:{}", id.0, label.as_str());
    }
    if is_benchmark {
        let accepted = if root_accepted(&graph) { "yes" } else { "no" };
        println!("root accepted: {accepted}");
    }
    Ok(())
}

fn parse_edges(text: &str) -> Result<Vec<(ArgumentId, ArgumentId)>, CliError> {
    let mut edges = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let parsed = part.split_once('>').and_then(|(attacker, target)| {
            let attacker = attacker.trim().parse::<usize>().ok()?;
            let target = target.trim().parse::<usize>().ok()?;
            Some((ArgumentId(attacker), ArgumentId(target)))
        });
        match parsed {
            Some(edge) => edges.push(edge),
            None => {
                return Err(CliError::Flags(format!(
                    "--edges entries must look like attacker>target, got {part:?}"
                )))
            }
        }
    }
    Ok(edges)
}
