//! `readlevel` command-line interface.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use readlevel::corpusio::{
    extract_corpus, load_model, read_corpus, read_feature_matrix, save_model, write_feature_matrix, write_report,
    ColumnCheck, ReadMode,
};
use readlevel::dataset::{Dataset, Level, LevelMapping};
use readlevel::evaluation::{cohen_kappa, cross_validate, EvalConfig};
use readlevel::features::{FeatureConfig, FillPolicy};
use readlevel::learnloop::{
    active_learning_run, merge_levels, rfe, select_batch_with, AlConfig, OracleAnswer, SelectionStrategy,
};
use readlevel::lexicons::{ResourceKind, Resources};
use readlevel::svm::{train_multiclass, Aggregation, TrainConfig};
use readlevel::textmodel::TextConfig;
use readlevel_service::{router, AppState, Environment};

#[derive(Parser)]
#[command(name = "readlevel", version, about = "Grade-level readability assessment for Portuguese texts")]
struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract the full feature registry from a JSONL corpus into a matrix.
    Extract(ExtractArgs),
    /// Train a one-vs-one linear SVM on a matrix.
    Train(TrainArgs),
    /// Predict levels for a matrix or corpus with a saved model.
    Predict(PredictArgs),
    /// Cross-validate on a matrix.
    Cv(CvArgs),
    /// Recursive feature elimination.
    Rfe(RfeArgs),
    /// Select the next annotation batch from a pool matrix.
    Select(SelectArgs),
    /// Merge grade levels through a mapping such as 1:1,2:2,3:2,4:3,5:3.
    Merge(MergeArgs),
    /// Cohen's kappa between two label files (one label per line).
    Kappa(KappaArgs),
    /// Scripted active-learning run with labels from a file.
    AlRun(AlRunArgs),
    /// Run the HTTP annotation service.
    Serve(ServeArgs),
}

#[derive(Args, Clone)]
struct ResourceArgs {
    /// Directory holding lexicons under their conventional names (default: bundled lists).
    #[arg(long)]
    resources: Option<PathBuf>,
    /// Override one resource, e.g. `--resource simple_words=/path/list.txt`.
    #[arg(long = "resource", value_name = "NAME=PATH")]
    overrides: Vec<String>,
    /// Abbreviation list used by the sentence splitter.
    #[arg(long)]
    abbreviations: Option<PathBuf>,
}

impl ResourceArgs {
    fn load(&self) -> Result<Resources, CliError> {
        let mut res = match &self.resources {
            Some(dir) => Resources::load_dir(dir)?,
            None => Resources::bundled(),
        };
        for o in &self.overrides {
            let (name, path) = o
                .split_once('=')
                .ok_or_else(|| CliError::usage(format!("--resource expects NAME=PATH, got {o:?}")))?;
            let kind = ResourceKind::all()
                .into_iter()
                .find(|k| k.file_name().trim_end_matches(".txt") == name)
                .ok_or_else(|| CliError::usage(format!("unknown resource {name:?}")))?;
            res.load_file(kind, Path::new(path))?;
        }
        Ok(res)
    }

    fn text_config(&self) -> Result<TextConfig, CliError> {
        let cfg = TextConfig::default();
        Ok(match &self.abbreviations {
            Some(p) => cfg.with_abbreviations_file(p)?,
            None => cfg,
        })
    }
}

#[derive(Args, Clone)]
struct MatrixArgs {
    /// Feature matrix (CSV).
    #[arg(long)]
    matrix: PathBuf,
    /// Accept matrices holding a subset of the registry features.
    #[arg(long)]
    allow_subset: bool,
    /// Accept arbitrary feature column names (synthetic data).
    #[arg(long, conflicts_with = "allow_subset")]
    free_columns: bool,
}

impl MatrixArgs {
    fn check(&self) -> ColumnCheck {
        column_check(self.allow_subset, self.free_columns)
    }

    fn read(&self) -> Result<Dataset, CliError> {
        Ok(read_feature_matrix(&self.matrix, self.check())?)
    }
}

fn column_check(subset: bool, free: bool) -> ColumnCheck {
    if free {
        ColumnCheck::Free
    } else if subset {
        ColumnCheck::Subset
    } else {
        ColumnCheck::Registry
    }
}

#[derive(Args, Clone)]
struct SvmArgs {
    /// SVM regularization constant.
    #[arg(long = "C", default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-4)]
    tolerance: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iterations: usize,
    /// How unavailable features are handled.
    #[arg(long, value_enum, default_value_t = Fill::Zero)]
    fill: Fill,
}

impl SvmArgs {
    fn config(&self) -> TrainConfig {
        TrainConfig {
            c: self.c,
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
            seed: self.seed,
            fill_policy: self.fill.into(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Fill {
    Zero,
    Error,
}

impl From<Fill> for FillPolicy {
    fn from(f: Fill) -> FillPolicy {
        match f {
            Fill::Zero => FillPolicy::Zero,
            Fill::Error => FillPolicy::Error,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Strategy {
    MostUncertain,
    MostConfident,
}

impl From<Strategy> for SelectionStrategy {
    fn from(s: Strategy) -> SelectionStrategy {
        match s {
            Strategy::MostUncertain => SelectionStrategy::MostUncertain,
            Strategy::MostConfident => SelectionStrategy::MostConfident,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Aggr {
    Min,
    Mean,
    VoteMargin,
}

impl From<Aggr> for Aggregation {
    fn from(a: Aggr) -> Aggregation {
        match a {
            Aggr::Min => Aggregation::Min,
            Aggr::Mean => Aggregation::Mean,
            Aggr::VoteMargin => Aggregation::VoteMargin,
        }
    }
}

#[derive(Args)]
struct ExtractArgs {
    /// JSONL corpus.
    #[arg(long)]
    corpus: PathBuf,
    /// Output matrix (CSV).
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    resources: ResourceArgs,
    /// Skip malformed corpus lines instead of aborting.
    #[arg(long)]
    lenient: bool,
    #[arg(long, value_enum, default_value_t = Fill::Zero)]
    fill: Fill,
    /// Words per incidence unit.
    #[arg(long, default_value_t = 1000)]
    incidence_base: u32,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    matrix: MatrixArgs,
    /// Output model file (JSON).
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    svm: SvmArgs,
    /// Comma-separated feature subset to train on (e.g. RFE survivors).
    #[arg(long, value_delimiter = ',')]
    features: Vec<String>,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    /// Matrix to predict; alternatively --corpus.
    #[arg(long, required_unless_present = "corpus")]
    matrix: Option<PathBuf>,
    #[arg(long, conflicts_with = "matrix")]
    corpus: Option<PathBuf>,
    #[arg(long)]
    allow_subset: bool,
    #[arg(long)]
    free_columns: bool,
    #[command(flatten)]
    resources: ResourceArgs,
    /// Write predictions here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CvArgs {
    #[command(flatten)]
    matrix: MatrixArgs,
    /// Number of folds.
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long)]
    unstratified: bool,
    #[command(flatten)]
    svm: SvmArgs,
    /// Write the full report (JSON) here.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct RfeArgs {
    #[command(flatten)]
    matrix: MatrixArgs,
    /// Number of features to keep.
    #[arg(long)]
    target: usize,
    /// Features eliminated per round.
    #[arg(long, default_value_t = 1)]
    step: usize,
    #[command(flatten)]
    svm: SvmArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SelectArgs {
    #[arg(long)]
    model: PathBuf,
    /// Unlabeled pool matrix.
    #[command(flatten)]
    matrix: MatrixArgs,
    #[arg(long, default_value_t = 100)]
    k: usize,
    #[arg(long, value_enum, default_value_t = Strategy::MostUncertain)]
    strategy: Strategy,
    #[arg(long, value_enum, default_value_t = Aggr::Min)]
    aggregation: Aggr,
}

#[derive(Args)]
struct MergeArgs {
    #[command(flatten)]
    matrix: MatrixArgs,
    /// Level mapping, e.g. 1:1,2:2,3:2,4:3,5:3.
    #[arg(long)]
    map: String,
    /// Write the merged matrix here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct KappaArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
}

#[derive(Args)]
struct AlRunArgs {
    /// Labeled starting matrix.
    #[arg(long)]
    labeled: PathBuf,
    /// Unlabeled pool matrix.
    #[arg(long)]
    pool: PathBuf,
    /// Answers file: `id<TAB>level`, or `id<TAB>-` for unprocessable texts.
    #[arg(long)]
    oracle: PathBuf,
    #[arg(long, default_value_t = 4)]
    steps: usize,
    #[arg(long, default_value_t = 100)]
    k: usize,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, value_enum, default_value_t = Strategy::MostUncertain)]
    strategy: Strategy,
    #[arg(long)]
    allow_subset: bool,
    #[arg(long)]
    free_columns: bool,
    #[command(flatten)]
    svm: SvmArgs,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: String,
    /// Where session event logs and snapshots live (omit for in-memory sessions).
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// Built workbench UI to serve at /.
    #[arg(long = "static")]
    static_dir: Option<PathBuf>,
    #[command(flatten)]
    resources: ResourceArgs,
}

#[derive(Debug)]
struct CliError {
    code: String,
    message: String,
    usage: bool,
}

impl CliError {
    fn new(code: &str, message: impl Into<String>) -> CliError {
        CliError {
            code: code.into(),
            message: message.into(),
            usage: false,
        }
    }

    fn usage(message: impl Into<String>) -> CliError {
        CliError {
            usage: true,
            ..CliError::new("usage", message)
        }
    }
}

impl From<readlevel::Error> for CliError {
    fn from(e: readlevel::Error) -> CliError {
        CliError::new(e.code(), e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(std::io::stderr)
        .init();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("warning: could not cap worker threads: {e}");
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: code={} msg={}", e.code, e.message.replace('\n', " "));
            if e.usage {
                eprintln!("run `readlevel --help` for usage");
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Extract(a) => extract(a),
        Command::Train(a) => train(a),
        Command::Predict(a) => predict(a),
        Command::Cv(a) => cv(a),
        Command::Rfe(a) => run_rfe(a),
        Command::Select(a) => select(a),
        Command::Merge(a) => merge(a),
        Command::Kappa(a) => kappa(a),
        Command::AlRun(a) => al_run(a),
        Command::Serve(a) => serve(a),
    }
}

/// Writes to stdout; a closed pipe (`readlevel ... | head`) ends the process quietly.
fn emit(text: &str) {
    let mut stdout = std::io::stdout().lock();
    if let Err(e) = stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()) {
        if e.kind() != std::io::ErrorKind::BrokenPipe {
            eprintln!("error: code=io msg=writing output: {e}");
            std::process::exit(1);
        }
        std::process::exit(0);
    }
}

macro_rules! out {
    ($($arg:tt)*) => { emit(&format!($($arg)*)) };
}

macro_rules! outln {
    ($($arg:tt)*) => { emit(&format!("{}\n", format_args!($($arg)*))) };
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::new("json", e.to_string()))?;
    outln!("{text}");
    Ok(())
}

fn extract(a: ExtractArgs) -> Result<(), CliError> {
    let mode = if a.lenient { ReadMode::Lenient } else { ReadMode::Strict };
    let corpus = read_corpus(&a.corpus, mode)?;
    let cfg = FeatureConfig {
        incidence_base: a.incidence_base,
        fill_policy: a.fill.into(),
        ..FeatureConfig::default()
    };
    let (dataset, failures) = extract_corpus(&corpus.records, &a.resources.load()?, &cfg, &a.resources.text_config()?)?;
    write_feature_matrix(&dataset, &a.out)?;
    for (line, msg) in &corpus.skipped {
        eprintln!("skipped line {line}: {msg}");
    }
    for (id, e) in &failures {
        eprintln!("dropped {id}: {e}");
    }
    print_json(&serde_json::json!({
        "instances": dataset.len(),
        "features": dataset.feature_count(),
        "skipped_lines": corpus.skipped.len(),
        "dropped": failures.len(),
        "out": a.out,
    }))
}

fn train(a: TrainArgs) -> Result<(), CliError> {
    let mut ds = a.matrix.read()?;
    if !a.features.is_empty() {
        ds = ds.select_features(&a.features)?;
    }
    let model = train_multiclass(&ds, &a.svm.config())?;
    save_model(&model, &a.model)?;
    print_json(&serde_json::json!({
        "instances": ds.len(),
        "features": ds.feature_count(),
        "labels": model.labels,
        "pairs": model.pair_count(),
        "C": a.svm.c,
        "seed": a.svm.seed,
        "model": a.model,
    }))
}

fn predict(a: PredictArgs) -> Result<(), CliError> {
    let model = load_model(&a.model)?;
    let ds = match (&a.matrix, &a.corpus) {
        (Some(m), _) => read_feature_matrix(m, column_check(a.allow_subset, a.free_columns))?,
        (None, Some(c)) => {
            let corpus = read_corpus(c, ReadMode::Strict)?;
            let (ds, failures) = extract_corpus(
                &corpus.records,
                &a.resources.load()?,
                &FeatureConfig::default(),
                &a.resources.text_config()?,
            )?;
            for (id, e) in &failures {
                eprintln!("dropped {id}: {e}");
            }
            ds
        }
        (None, None) => return Err(CliError::usage("give --matrix or --corpus")),
    };
    let rows = model.align(&ds)?;
    let mut out = String::from("id,predicted,gold,uncertainty\n");
    for (inst, row) in ds.instances.iter().zip(&rows) {
        out.push_str(&format!(
            "{},{},{},{}\n",
            inst.id,
            model.predict(row)?,
            inst.level.map(|l| l.to_string()).unwrap_or_default(),
            model.uncertainty(row)?
        ));
    }
    match &a.out {
        Some(p) => fs::write(p, out).map_err(|e| CliError::new("io", format!("{}: {e}", p.display())))?,
        None => out!("{out}"),
    }
    Ok(())
}

fn cv(a: CvArgs) -> Result<(), CliError> {
    let ds = a.matrix.read()?;
    let eval = EvalConfig {
        k: a.k,
        seed: a.svm.seed,
        stratified: !a.unstratified,
    };
    let report = cross_validate(&ds, &a.svm.config(), &eval)?;
    out!("{}", report.render());
    outln!("C={} seed={} instances={}", a.svm.c, a.svm.seed, ds.len());
    if let Some(p) = &a.report {
        write_report(&report, p)?;
    }
    Ok(())
}

fn run_rfe(a: RfeArgs) -> Result<(), CliError> {
    let ds = a.matrix.read()?;
    let ranking = rfe(&ds, &a.svm.config(), a.target, a.step)?;
    if let Some(p) = &a.out {
        write_report(&ranking, p)?;
    }
    print_json(&serde_json::json!({
        "target": a.target,
        "step": a.step,
        "seed": a.svm.seed,
        "survivors": ranking.survivor_set,
        "elimination_order": ranking.elimination_order,
    }))
}

fn select(a: SelectArgs) -> Result<(), CliError> {
    let model = load_model(&a.model)?;
    let pool = a.matrix.read()?;
    let batch = select_batch_with(&model, &pool, a.k, a.strategy.into(), a.aggregation.into())?;
    print_json(&batch)
}

fn merge(a: MergeArgs) -> Result<(), CliError> {
    let ds = a.matrix.read()?;
    let mapping: LevelMapping = a.map.parse()?;
    let merged = merge_levels(&ds, &mapping)?;
    for (level, count) in merged.class_counts() {
        outln!("level {level}: {count}");
    }
    outln!("total: {}", merged.len());
    if let Some(p) = &a.out {
        write_feature_matrix(&merged, p)?;
    }
    Ok(())
}

fn read_lines(path: &Path) -> Result<Vec<String>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::new("io", format!("{}: {e}", path.display())))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect())
}

fn kappa(a: KappaArgs) -> Result<(), CliError> {
    let report = cohen_kappa(&read_lines(&a.a)?, &read_lines(&a.b)?)?;
    outln!(
        "kappa={:.4} observed={:.4} expected={:.4} n={} band={}",
        report.kappa, report.observed_agreement, report.expected_agreement, report.n, report.band
    );
    Ok(())
}

fn al_run(a: AlRunArgs) -> Result<(), CliError> {
    let check = column_check(a.allow_subset, a.free_columns);
    let labeled = read_feature_matrix(&a.labeled, check)?;
    let pool = read_feature_matrix(&a.pool, check)?;
    let mut answers: HashMap<String, OracleAnswer> = HashMap::new();
    for (i, line) in read_lines(&a.oracle)?.iter().enumerate() {
        let (id, level) = line
            .split_once('\t')
            .ok_or_else(|| CliError::new("malformed", format!("oracle line {}: expected id<TAB>level", i + 1)))?;
        let answer = match level.trim() {
            "-" => OracleAnswer::Unprocessable("marked unprocessable".into()),
            l => OracleAnswer::Labeled(
                l.parse::<Level>()
                    .map_err(|_| CliError::new("malformed", format!("oracle line {}: bad level {l:?}", i + 1)))?,
            ),
        };
        answers.insert(id.to_string(), answer);
    }
    let mut oracle = |ids: &[String]| -> readlevel::Result<Vec<(String, OracleAnswer)>> {
        ids.iter()
            .map(|id| {
                answers
                    .get(id)
                    .cloned()
                    .map(|ans| (id.clone(), ans))
                    .ok_or_else(|| readlevel::Error::Oracle(format!("no answer for {id}")))
            })
            .collect()
    };
    let cfg = AlConfig {
        steps: a.steps,
        k: a.k,
        strategy: a.strategy.into(),
        train: a.svm.config(),
        eval: EvalConfig {
            k: a.folds,
            seed: a.svm.seed,
            stratified: true,
        },
    };
    let report = active_learning_run(labeled, pool, &mut oracle, &cfg)?;
    outln!("step  texts  accuracy  spread  dropped");
    for r in &report.records {
        outln!(
            "{:>4}  {:>5}  {:>8.4}  {:>6.4}  {:>7}",
            r.step, r.dataset_size, r.mean_accuracy, r.spread, r.dropped
        );
    }
    outln!("seed={} C={} k={}", a.svm.seed, a.svm.c, a.k);
    if let Some(reason) = &report.aborted {
        eprintln!("run stopped early: {reason}");
    }
    if let Some(p) = &a.report {
        write_report(&report, p)?;
    }
    Ok(())
}

fn serve(a: ServeArgs) -> Result<(), CliError> {
    let env = Environment {
        resources: a.resources.load()?,
        text: a.resources.text_config()?,
        ..Environment::default()
    };
    let state = AppState::open(env, a.data_dir.clone()).map_err(|e| CliError::new(&e.code, e.message))?;
    let app = router(state, a.static_dir.clone());
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::new("io", e.to_string()))?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&a.addr)
            .await
            .map_err(|e| CliError::new("io", format!("bind {}: {e}", a.addr)))?;
        eprintln!("listening on http://{}", listener.local_addr().map_err(|e| CliError::new("io", e.to_string()))?);
        readlevel_service::serve(listener, app)
            .await
            .map_err(|e| CliError::new("io", e.to_string()))
    })
}
