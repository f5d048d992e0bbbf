//! Command-line surface for conditional anomaly detection: ingestion,
//! structure learning, attribute weighting, per-case detection, leave-one-out
//! evaluation, and synthetic-data generation.
//!
//! Exit status: 0 on success, 1 on usage errors, 2 on data errors.

use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use condanom::bayes::{learn_structure, parse_structure, random_model, write_structure};
use condanom::dataset::{
    attach_labels, parse_dataset, port_schema, AttributeSchema, CaseRecord, Dataset, GoldLabel,
};
use condanom::pipeline::{
    detect_case, inject_anomalies, leave_one_out, write_report_csvs, DetectionConfig, ModelKind,
    Population,
};
use condanom::similarity::rank_sum_weights;

#[derive(Parser)]
#[command(
    name = "condanom",
    version,
    about = "Conditional anomaly detection over binary case records"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score one case against a repository and print its verdict
    Detect(DetectArgs),
    /// Leave-one-out evaluation; writes ROC/PR report CSVs
    Evaluate(EvaluateArgs),
    /// Learn a network structure and write it as a structure file
    #[command(name = "learn-structure")]
    LearnStructure(LearnStructureArgs),
    /// Write rank-sum attribute-importance weights as CSV
    Weights(WeightsArgs),
    /// Sample a synthetic dataset from a seeded random network
    Synth(SynthArgs),
    /// Print schema and dataset summary counts
    Inspect(InspectArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    /// Naive Bayes with the target as class variable
    Nb,
    /// Network with a learned (or supplied) structure
    Bbn,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PopulationArg {
    /// Fit on the whole repository
    All,
    /// Fit on the k best matches under the Mahalanobis metric
    Mahalanobis,
    /// Fit on the k best matches under the rank-sum-weighted Mahalanobis metric
    Weighted,
}

/// Flags shared by the detection-flavored subcommands.
#[derive(Args)]
struct DetectionFlags {
    /// Probabilistic model kind
    #[arg(long, value_enum, default_value = "nb")]
    model: ModelArg,
    /// Reference population selection
    #[arg(long, value_enum, default_value = "all")]
    population: PopulationArg,
    /// Number of best matches for similarity-based populations
    #[arg(long, default_value_t = 40)]
    k: usize,
    /// Absolute detection threshold on the predictive probability
    #[arg(long, default_value_t = 0.05)]
    threshold: f64,
    /// Dirichlet prior strength (pseudo-count per table cell)
    #[arg(long, default_value_t = 1.0)]
    prior: f64,
    /// Covariance regularization added before inversion
    #[arg(long, default_value_t = 1e-6)]
    epsilon: f64,
    /// In-degree bound for structure learning
    #[arg(long, default_value_t = 4)]
    max_parents: usize,
    /// Structure file to use for --model bbn instead of learning one
    #[arg(long)]
    structure: Option<PathBuf>,
}

#[derive(Args)]
struct DetectArgs {
    /// Repository CSV
    #[arg(long)]
    data: PathBuf,
    /// Target attribute name
    #[arg(long)]
    target: String,
    /// Score the repository case with this id (excluded from the repository)
    #[arg(long, conflicts_with = "record")]
    case_id: Option<String>,
    /// Score an inline case: comma-separated values aligned with the schema
    #[arg(long)]
    record: Option<String>,
    #[command(flatten)]
    detection: DetectionFlags,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Repository CSV (must carry a case_id column)
    #[arg(long)]
    data: PathBuf,
    /// Gold labels CSV (case_id,label); labeled cases form the eval set
    #[arg(long)]
    labels: PathBuf,
    /// Target attribute name
    #[arg(long)]
    target: String,
    /// Directory for the report CSVs (created if missing)
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[command(flatten)]
    detection: DetectionFlags,
}

#[derive(Args)]
struct LearnStructureArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    target: String,
    #[arg(long, default_value_t = 4)]
    max_parents: usize,
    #[arg(long, default_value_t = 1.0)]
    prior: f64,
    /// Output structure file
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct WeightsArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    target: String,
    /// Output CSV (attribute,weight)
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    /// Number of attributes (including the target)
    #[arg(long, default_value_t = 19)]
    nodes: usize,
    /// Number of records to sample
    #[arg(long, default_value_t = 2287)]
    n: usize,
    /// Seed driving the generator, the sampler, and the injector
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// In-degree bound of the generating network
    #[arg(long, default_value_t = 3)]
    max_parents: usize,
    /// Flip this fraction of confidently predicted targets and write gold labels
    #[arg(long)]
    inject: Option<f64>,
    /// Use the built-in 19-attribute admission schema instead of generic names
    #[arg(long)]
    port_schema: bool,
    /// Output dataset CSV
    #[arg(long)]
    out_data: PathBuf,
    /// Output labels CSV (required with --inject)
    #[arg(long)]
    out_labels: Option<PathBuf>,
}

#[derive(Args)]
struct InspectArgs {
    #[arg(long)]
    data: PathBuf,
    /// Target attribute name; defaults to the first attribute
    #[arg(long)]
    target: Option<String>,
    /// Optional labels CSV to summarize
    #[arg(long)]
    labels: Option<PathBuf>,
}

enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(message) | CliError::Data(message) => write!(f, "{message}"),
        }
    }
}

/// Attaches the offending file path to a library error.
fn data_err(path: &Path, err: impl fmt::Display) -> CliError {
    CliError::Data(format!("{}: {err}", path.display()))
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| data_err(path, e))
}

fn load_dataset(path: &Path, target: &str) -> Result<Dataset, CliError> {
    parse_dataset(open(path)?, target).map_err(|e| data_err(path, e))
}

fn build_config(
    flags: &DetectionFlags,
    schema: &AttributeSchema,
) -> Result<DetectionConfig, CliError> {
    let fixed_structure = match &flags.structure {
        Some(path) => Some(parse_structure(open(path)?, schema).map_err(|e| data_err(path, e))?),
        None => None,
    };
    Ok(DetectionConfig {
        model_kind: match flags.model {
            ModelArg::Nb => ModelKind::NaiveBayes,
            ModelArg::Bbn => ModelKind::LearnedBbn,
        },
        population: match flags.population {
            PopulationArg::All => Population::All,
            PopulationArg::Mahalanobis => Population::MahalanobisK,
            PopulationArg::Weighted => Population::WeightedMahalanobisK,
        },
        k: flags.k,
        threshold: flags.threshold,
        prior_strength: flags.prior,
        epsilon: flags.epsilon,
        max_parents: flags.max_parents,
        fixed_structure,
    })
}

fn parse_inline_record(text: &str, schema: &AttributeSchema) -> Result<CaseRecord, CliError> {
    let mut values = Vec::new();
    for (i, token) in text.split(',').enumerate() {
        let v = token.trim();
        if v == "1" || v.eq_ignore_ascii_case("true") {
            values.push(true);
        } else if v == "0" || v.eq_ignore_ascii_case("false") {
            values.push(false);
        } else {
            return Err(CliError::Usage(format!(
                "--record value `{v}` at position {} is not binary",
                i + 1
            )));
        }
    }
    if values.len() != schema.arity() {
        return Err(CliError::Usage(format!(
            "--record has {} values but the schema has {} attributes",
            values.len(),
            schema.arity()
        )));
    }
    Ok(CaseRecord::new(values))
}

fn fmt_opt(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_else(|| "n/a".into())
}

fn cmd_detect(args: DetectArgs) -> Result<(), CliError> {
    if args.case_id.is_some() == args.record.is_some() {
        return Err(CliError::Usage(
            "detect needs exactly one of --case-id or --record".into(),
        ));
    }
    let data = load_dataset(&args.data, &args.target)?;
    let mut config = build_config(&args.detection, data.schema())?;

    let (repository, query) = match (&args.case_id, &args.record) {
        (Some(id), None) => {
            let index = data.index_of_case_id(id).ok_or_else(|| {
                CliError::Data(format!(
                    "case_id `{id}` not found in {}",
                    args.data.display()
                ))
            })?;
            let query = data.records()[index].clone();
            (data.without_case_id(id), query)
        }
        (None, Some(text)) => {
            let query = parse_inline_record(text, data.schema())?;
            (data, query)
        }
        _ => unreachable!("selector validated above"),
    };

    // for --model bbn without --structure, learn on the repository (which
    // already excludes the queried case)
    if config.model_kind == ModelKind::LearnedBbn && config.fixed_structure.is_none() {
        config.fixed_structure = Some(
            learn_structure(&repository, config.max_parents, config.prior_strength)
                .map_err(|e| data_err(&args.data, e))?,
        );
    }

    let outcome = detect_case(&repository, &query, &config).map_err(|e| data_err(&args.data, e))?;
    println!(
        "case_id={} prob={} status={}",
        outcome.case_id.as_deref().unwrap_or("-"),
        fmt_opt(outcome.predictive_prob),
        outcome.status
    );
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<(), CliError> {
    let data = load_dataset(&args.data, &args.target)?;
    let (labeled, warnings) =
        attach_labels(&data, open(&args.labels)?).map_err(|e| data_err(&args.labels, e))?;
    for warning in &warnings {
        eprintln!("warning: {}: {warning}", args.labels.display());
    }
    let eval_indices: Vec<usize> = (0..labeled.len())
        .filter(|&i| labeled.records()[i].gold_label.is_some())
        .collect();
    if eval_indices.is_empty() {
        return Err(CliError::Data(format!(
            "{}: no repository case carries a gold label",
            args.labels.display()
        )));
    }
    let eval_cases = labeled.subset(&eval_indices);
    let config = build_config(&args.detection, labeled.schema())?;

    let report =
        leave_one_out(&eval_cases, &labeled, &config).map_err(|e| CliError::Data(e.to_string()))?;
    for warning in &report.warnings {
        eprintln!("warning: {warning}");
    }
    std::fs::create_dir_all(&args.out).map_err(|e| data_err(&args.out, e))?;
    write_report_csvs(&report, &args.out).map_err(|e| data_err(&args.out, e))?;
    println!(
        "scored={} indeterminate={} auc_roc={} auc_pr={} reports={}",
        report.scored_cases.len(),
        report.indeterminate_count,
        fmt_opt(report.auc_roc),
        fmt_opt(report.auc_pr),
        args.out.display()
    );
    Ok(())
}

fn cmd_learn_structure(args: LearnStructureArgs) -> Result<(), CliError> {
    let data = load_dataset(&args.data, &args.target)?;
    let structure =
        learn_structure(&data, args.max_parents, args.prior).map_err(|e| data_err(&args.data, e))?;
    let file = File::create(&args.out).map_err(|e| data_err(&args.out, e))?;
    write_structure(&structure, data.schema(), BufWriter::new(file))
        .map_err(|e| data_err(&args.out, e))?;
    println!(
        "nodes={} edges={} structure={}",
        structure.node_count(),
        structure.edge_count(),
        args.out.display()
    );
    Ok(())
}

fn cmd_weights(args: WeightsArgs) -> Result<(), CliError> {
    let data = load_dataset(&args.data, &args.target)?;
    let weights = rank_sum_weights(&data).map_err(|e| data_err(&args.data, e))?;
    let file = File::create(&args.out).map_err(|e| data_err(&args.out, e))?;
    let mut out = BufWriter::new(file);
    let result: std::io::Result<()> = (|| {
        writeln!(out, "attribute,weight")?;
        for (name, weight) in data.schema().context_names().iter().zip(weights.values()) {
            writeln!(out, "{name},{weight}")?;
        }
        out.flush()
    })();
    result.map_err(|e| data_err(&args.out, e))?;
    println!("attributes={} weights={}", weights.len(), args.out.display());
    Ok(())
}

fn generic_schema(nodes: usize) -> Result<AttributeSchema, CliError> {
    let names = std::iter::once("target".to_string())
        .chain((1..nodes).map(|i| format!("x{i:02}")))
        .collect();
    AttributeSchema::new(names, 0).map_err(|e| CliError::Usage(e.to_string()))
}

fn cmd_synth(args: SynthArgs) -> Result<(), CliError> {
    if args.nodes == 0 {
        return Err(CliError::Usage("--nodes must be at least 1".into()));
    }
    let schema = if args.port_schema {
        if args.nodes != 19 {
            return Err(CliError::Usage("--port-schema requires --nodes 19".into()));
        }
        port_schema()
    } else {
        generic_schema(args.nodes)?
    };
    let model = random_model(&schema, args.max_parents, args.seed)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let sampled = model.sample(args.n, args.seed.wrapping_add(1));

    let data = match args.inject {
        Some(fraction) => {
            if args.out_labels.is_none() {
                return Err(CliError::Usage("--inject requires --out-labels".into()));
            }
            inject_anomalies(&sampled, &model, fraction, args.seed.wrapping_add(2))
                .map_err(|e| CliError::Data(e.to_string()))?
        }
        None => sampled,
    };

    let file = File::create(&args.out_data).map_err(|e| data_err(&args.out_data, e))?;
    data.write_csv(BufWriter::new(file))
        .map_err(|e| data_err(&args.out_data, e))?;
    if let Some(path) = &args.out_labels {
        let file = File::create(path).map_err(|e| data_err(path, e))?;
        data.write_labels_csv(BufWriter::new(file))
            .map_err(|e| data_err(path, e))?;
    }
    let anomalies = data
        .records()
        .iter()
        .filter(|r| r.gold_label == Some(GoldLabel::Anomalous))
        .count();
    println!(
        "records={} anomalies={} data={}{}",
        data.len(),
        anomalies,
        args.out_data.display(),
        args.out_labels
            .as_ref()
            .map(|p| format!(" labels={}", p.display()))
            .unwrap_or_default()
    );
    Ok(())
}

/// First non-`case_id` header name, used when `inspect` gets no --target.
fn default_target(path: &Path) -> Result<String, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(open(path)?);
    let mut records = reader.records();
    let header = records
        .next()
        .transpose()
        .map_err(|e| data_err(path, e))?
        .ok_or_else(|| data_err(path, "missing header row"))?;
    header
        .iter()
        .map(str::trim)
        .find(|name| *name != "case_id")
        .map(str::to_string)
        .ok_or_else(|| data_err(path, "header has no attribute columns"))
}

fn cmd_inspect(args: InspectArgs) -> Result<(), CliError> {
    let target = match &args.target {
        Some(name) => name.clone(),
        None => default_target(&args.data)?,
    };
    let data = load_dataset(&args.data, &target)?;
    let data = match &args.labels {
        Some(path) => {
            let (labeled, warnings) =
                attach_labels(&data, open(path)?).map_err(|e| data_err(path, e))?;
            for warning in &warnings {
                eprintln!("warning: {}: {warning}", path.display());
            }
            labeled
        }
        None => data,
    };

    println!(
        "records={} attributes={}",
        data.len(),
        data.schema().arity()
    );
    println!("target={}", data.schema().target_name());
    for (i, name) in data.schema().names().iter().enumerate() {
        let trues = data.records().iter().filter(|r| r.values[i]).count();
        let marker = if i == data.schema().target_index() {
            " [target]"
        } else {
            ""
        };
        println!(
            "  {name}: true={trues} false={}{marker}",
            data.len() - trues
        );
    }
    if args.labels.is_some() {
        let anomalous = data
            .records()
            .iter()
            .filter(|r| r.gold_label == Some(GoldLabel::Anomalous))
            .count();
        let normal = data
            .records()
            .iter()
            .filter(|r| r.gold_label == Some(GoldLabel::Normal))
            .count();
        println!(
            "labels: anomalous={anomalous} normal={normal} unlabeled={}",
            data.len() - anomalous - normal
        );
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Detect(args) => cmd_detect(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::LearnStructure(args) => cmd_learn_structure(args),
        Command::Weights(args) => cmd_weights(args),
        Command::Synth(args) => cmd_synth(args),
        Command::Inspect(args) => cmd_inspect(args),
    }
}

fn main() -> ExitCode {
    // die quietly when a downstream pipe closes, like other line-oriented tools
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            if matches!(
                err.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            ) {
                let _ = err.print();
                return ExitCode::SUCCESS;
            }
            let _ = err.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
