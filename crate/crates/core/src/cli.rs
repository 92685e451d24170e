//! Command-line interface.
//!
//! Settings resolve in the order: command-line flag, environment variable
//! (model path and worker count only), config file, built-in default.
//! Stdout carries only the payload; diagnostics go to stderr.
//!
//! Exit codes: 0 success, 1 partial failure, 2 usage or input error, 3 backend error.

use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::backend::{load_backend, AlignmentBackend, Backend, BackendConfig, BackendKind, DEFAULT_BATCH_SIZE};
use crate::datasets::{
    convert_jsonl, load_dataset, load_manifest, stratified_subsample, write_dataset, DatasetManifest, FieldNames,
    LabelMapping, Task,
};
use crate::error::Error;
use crate::evaluation::{binary_gold, predict_records, run_task_eval, EvalReport, TaskMetrics};
use crate::metrics::{calibrate_threshold, DEFAULT_THRESHOLD};
use crate::scoring::{align_score_batch, ScoreReport};
use crate::segmentation::{check_chunks, chunk_context, split_sentences, TokenBudget};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARTIAL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BACKEND: i32 = 3;

pub const ENV_MODEL: &str = "ALIGNRUSCORE_MODEL";
pub const ENV_WORKERS: &str = "ALIGNRUSCORE_WORKERS";
pub const DEFAULT_SEED: u64 = 2025;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Tsv,
    Pretty,
}

#[derive(Debug, Parser)]
#[command(name = "alignruscore", version, about = "Factual-consistency scoring and evaluation")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Default, Args)]
pub struct GlobalArgs {
    /// Alignment backend.
    #[arg(long, global = true, value_enum)]
    pub backend: Option<BackendKind>,
    /// Exported `.onnx` model (neural backend).
    #[arg(long, global = true, env = ENV_MODEL)]
    pub model: Option<PathBuf>,
    /// Context chunk budget in model tokens.
    #[arg(long, global = true)]
    pub chunk_budget: Option<usize>,
    /// Sentences re-included from the previous chunk.
    #[arg(long, global = true)]
    pub overlap: Option<usize>,
    /// Decision threshold on the binary head.
    #[arg(long, global = true)]
    pub threshold: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    /// Worker threads (default: number of processors).
    #[arg(long, global = true, env = ENV_WORKERS)]
    pub workers: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Pairs per model invocation.
    #[arg(long, global = true)]
    pub batch_size: Option<usize>,
    /// TOML config file; flags and environment variables take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score claims against contexts.
    Score {
        /// Context text, `@FILE`, or `-` for stdin.
        #[arg(long, requires = "claim")]
        context: Option<String>,
        /// Claim text, `@FILE`, or `-` for stdin.
        #[arg(long, requires = "context")]
        claim: Option<String>,
        /// JSONL of {"context", "claim", "id"?} objects (`-` for stdin).
        #[arg(long, conflicts_with_all = ["context", "claim"], required_unless_present = "context")]
        batch: Option<String>,
    },
    /// Evaluate the backend on every dataset of a manifest.
    Eval {
        manifest: PathBuf,
        /// Directory for per-dataset JSON reports.
        #[arg(long, default_value = "reports")]
        out_dir: PathBuf,
        /// Evaluate a stratified sample of this many records per dataset.
        #[arg(long)]
        sample: Option<usize>,
    },
    /// Show how a text is split into sentences and chunks.
    ChunkDebug {
        /// Text, `@FILE`, or `-` for stdin.
        source: String,
    },
    /// Sweep binary thresholds on a labelled binary dataset and report the F1-optimal one.
    Calibrate {
        dataset: PathBuf,
        #[arg(long, default_value_t = 1000)]
        max_points: usize,
        #[arg(long)]
        sample: Option<usize>,
    },
    /// Convert a source JSONL file into the canonical dataset format.
    Convert {
        /// Source JSONL file or `-`.
        input: String,
        #[arg(long, value_enum)]
        task: Task,
        /// Output file (default: stdout).
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value = "context")]
        context_key: String,
        #[arg(long, default_value = "claim")]
        claim_key: String,
        #[arg(long, default_value = "label")]
        label_key: String,
        #[arg(long, default_value = "id")]
        id_key: String,
        /// Divide regression labels by this value.
        #[arg(long)]
        label_scale: Option<f64>,
        /// JSON label mapping replacing the built-in table.
        #[arg(long)]
        mapping: Option<PathBuf>,
    },
}

/// Keys accepted in the config file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub backend: Option<BackendKind>,
    pub model: Option<PathBuf>,
    pub chunk_budget: Option<usize>,
    pub overlap: Option<usize>,
    pub threshold: Option<f64>,
    pub format: Option<OutputFormat>,
    pub workers: Option<usize>,
    pub seed: Option<u64>,
    pub batch_size: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: FileConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if let (Some(model), Some(dir)) = (&cfg.model, path.parent()) {
            if model.is_relative() {
                cfg.model = Some(dir.join(model));
            }
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliConfig {
    pub backend: BackendConfig,
    pub budget: TokenBudget,
    pub threshold: f64,
    pub format: OutputFormat,
    pub workers: usize,
    pub seed: u64,
}

impl CliConfig {
    pub fn resolve(args: &GlobalArgs, file: FileConfig) -> Result<Self, Error> {
        let defaults = TokenBudget::default();
        let budget = TokenBudget::new(
            args.chunk_budget.or(file.chunk_budget).unwrap_or(defaults.budget),
            args.overlap.or(file.overlap).unwrap_or(defaults.overlap_sentences),
        )?;
        let workers = args
            .workers
            .or(file.workers)
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, usize::from));
        if workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        let threshold = args.threshold.or(file.threshold).unwrap_or(DEFAULT_THRESHOLD);
        if !(0.0..=1.0).contains(&threshold) {
            return Err(Error::Config(format!("threshold {threshold} outside [0, 1]")));
        }
        let batch_size = args.batch_size.or(file.batch_size).unwrap_or(DEFAULT_BATCH_SIZE);
        if batch_size == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        Ok(Self {
            backend: BackendConfig {
                kind: args.backend.or(file.backend).unwrap_or_default(),
                model_path: args.model.clone().or(file.model),
                batch_size,
            },
            budget,
            threshold,
            format: args.format.or(file.format).unwrap_or_default(),
            workers,
            seed: args.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        })
    }
}

pub struct Io<'a> {
    pub stdin: &'a mut dyn BufRead,
    pub stdout: &'a mut dyn Write,
    pub stderr: &'a mut dyn Write,
}

/// A failed command: exit code plus message for stderr.
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: exit_code(&e),
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: format!("i/o error: {e}"),
        }
    }
}

fn input_failure(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: message.into(),
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_backend() {
        EXIT_BACKEND
    } else {
        EXIT_INPUT
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, io: &mut Io<'_>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(io.stdout, "{rendered}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(io.stderr, "{rendered}");
                    EXIT_INPUT
                }
            };
        }
    };
    match execute(cli, io) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(io.stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn execute(cli: Cli, io: &mut Io<'_>) -> Result<i32, Failure> {
    let file = match &cli.global.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let config = CliConfig::resolve(&cli.global, file)?;
    log::debug!("resolved configuration: {config:?}");

    // Conversion needs no backend.
    if let Command::Convert {
        input,
        task,
        output,
        context_key,
        claim_key,
        label_key,
        id_key,
        label_scale,
        mapping,
    } = &cli.command
    {
        let fields = FieldNames {
            context: context_key.clone(),
            claim: claim_key.clone(),
            label: label_key.clone(),
            id: Some(id_key.clone()),
        };
        return cmd_convert(
            input,
            *task,
            output.as_deref(),
            &fields,
            *label_scale,
            mapping.as_deref(),
            io,
        );
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| input_failure(format!("cannot start worker pool: {e}")))?;
    let backend = load_backend(&config.backend)?;
    match &cli.command {
        Command::Score { context, claim, batch } => cmd_score(
            context.as_deref(),
            claim.as_deref(),
            batch.as_deref(),
            &config,
            &pool,
            &*backend,
            io,
        ),
        Command::Eval {
            manifest,
            out_dir,
            sample,
        } => cmd_eval(manifest, out_dir, *sample, &config, &pool, &backend, io),
        Command::ChunkDebug { source } => cmd_chunk_debug(source, &config, &*backend, io),
        Command::Calibrate {
            dataset,
            max_points,
            sample,
        } => cmd_calibrate(dataset, *max_points, *sample, &config, &pool, &*backend, io),
        Command::Convert { .. } => unreachable!("handled above"),
    }
}

/// `-` reads stdin, `@path` reads a file, anything else is literal text.
fn read_source(source: &str, stdin: &mut dyn BufRead) -> Result<String, Failure> {
    if source == "-" {
        let mut text = String::new();
        stdin.read_to_string(&mut text)?;
        Ok(text)
    } else if let Some(path) = source.strip_prefix('@') {
        std::fs::read_to_string(path).map_err(|e| Error::io(path, e).into())
    } else {
        Ok(source.to_string())
    }
}

fn tsv_field(s: &str) -> String {
    s.replace(['\t', '\n', '\r'], " ")
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BatchPair {
    context: String,
    claim: String,
    #[serde(default)]
    id: Option<Value>,
}

#[derive(Serialize)]
struct ScoreLine<'a> {
    index: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    id: Option<&'a Value>,
    #[serde(flatten)]
    report: &'a ScoreReport,
}

fn cmd_score(
    context: Option<&str>,
    claim: Option<&str>,
    batch: Option<&str>,
    config: &CliConfig,
    pool: &rayon::ThreadPool,
    backend: &dyn AlignmentBackend,
    io: &mut Io<'_>,
) -> Result<i32, Failure> {
    let pairs: Vec<BatchPair> = match (batch, context, claim) {
        (Some(source), _, _) => {
            let text = if source == "-" {
                read_source("-", io.stdin)?
            } else {
                std::fs::read_to_string(source).map_err(|e| Error::io(source, e))?
            };
            text.lines()
                .enumerate()
                .filter(|(_, l)| !l.trim().is_empty())
                .map(|(i, l)| serde_json::from_str(l).map_err(|e| input_failure(format!("batch line {}: {e}", i + 1))))
                .collect::<Result<_, _>>()?
        }
        (None, Some(context), Some(claim)) => {
            if context == "-" && claim == "-" {
                return Err(input_failure("only one of --context and --claim can read stdin"));
            }
            vec![BatchPair {
                context: read_source(context, io.stdin)?,
                claim: read_source(claim, io.stdin)?,
                id: None,
            }]
        }
        _ => return Err(input_failure("give --context and --claim, or --batch")),
    };
    if pairs.is_empty() {
        return Err(input_failure("batch contains no pairs"));
    }

    let texts: Vec<(&str, &str)> = pairs.iter().map(|p| (p.context.as_str(), p.claim.as_str())).collect();
    let results = pool.install(|| align_score_batch(&texts, backend, &config.budget));

    if config.format == OutputFormat::Tsv {
        writeln!(io.stdout, "index\tid\tscore\tn_chunks\tn_claim_sentences")?;
    }
    let mut worst = EXIT_OK;
    let mut failed = 0;
    for (index, (pair, result)) in pairs.iter().zip(&results).enumerate() {
        let report = match result {
            Ok(r) => r,
            Err(e) => {
                writeln!(io.stderr, "error: {e}")?;
                worst = worst.max(exit_code(e));
                failed += 1;
                continue;
            }
        };
        match config.format {
            OutputFormat::Json => {
                let line = ScoreLine {
                    index,
                    id: pair.id.as_ref(),
                    report,
                };
                writeln!(
                    io.stdout,
                    "{}",
                    serde_json::to_string(&line).expect("score line serializes")
                )?;
            }
            OutputFormat::Tsv => {
                let id = pair.id.as_ref().map(id_text).unwrap_or_default();
                writeln!(
                    io.stdout,
                    "{index}\t{}\t{}\t{}\t{}",
                    tsv_field(&id),
                    report.score,
                    report.n_chunks,
                    report.n_claim_sentences
                )?;
            }
            OutputFormat::Pretty => {
                writeln!(
                    io.stdout,
                    "pair {index}: score {:.4} ({} chunks, {} claim sentences)",
                    report.score, report.n_chunks, report.n_claim_sentences
                )?;
                for s in &report.per_sentence {
                    writeln!(
                        io.stdout,
                        "  {:.4}  chunk {:>3}  {}",
                        s.best_prob, s.best_chunk_index, s.sentence.text
                    )?;
                }
            }
        }
    }
    Ok(match failed {
        0 => EXIT_OK,
        n if n == pairs.len() => worst,
        _ => EXIT_PARTIAL,
    })
}

fn id_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn metric_columns(metrics: &TaskMetrics) -> [Option<f64>; 8] {
    // precision, recall, f1, accuracy, roc_auc, mse, r2, threshold
    match metrics {
        TaskMetrics::ThreeWay(m) => [
            Some(m.precision),
            Some(m.recall),
            Some(m.f1),
            Some(m.accuracy),
            None,
            None,
            None,
            None,
        ],
        TaskMetrics::Binary(m) => [
            Some(m.precision),
            Some(m.recall),
            Some(m.f1),
            Some(m.accuracy),
            Some(m.roc_auc),
            None,
            None,
            Some(m.threshold),
        ],
        TaskMetrics::Regression(m) => [None, None, None, None, None, Some(m.mse), Some(m.r2), None],
    }
}

fn file_stem_for(name: &str) -> String {
    let stem: String = name
        .chars()
        .map(|c| {
            if c.is_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect();
    if stem.is_empty() {
        "dataset".into()
    } else {
        stem
    }
}

fn evaluate_entry(
    entry: &DatasetManifest,
    out_dir: &Path,
    sample: Option<usize>,
    config: &CliConfig,
    pool: &rayon::ThreadPool,
    backend: &Backend,
) -> Result<EvalReport, Error> {
    let mut records = entry.load()?;
    if let Some(n) = sample {
        records = stratified_subsample(&records, n, config.seed);
    }
    let metrics = pool.install(|| run_task_eval(&records, &**backend, &config.budget, entry.task, config.threshold))?;
    let report = EvalReport::new(
        &entry.name,
        entry.task,
        records.len(),
        metrics,
        config.threshold,
        &**backend,
    );
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let path = out_dir.join(format!("{}.json", file_stem_for(&entry.name)));
    let body = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
    log::info!("wrote {}", path.display());
    Ok(report)
}

fn cmd_eval(
    manifest: &Path,
    out_dir: &Path,
    sample: Option<usize>,
    config: &CliConfig,
    pool: &rayon::ThreadPool,
    backend: &Backend,
    io: &mut Io<'_>,
) -> Result<i32, Failure> {
    let entries = load_manifest(manifest)?;
    if entries.is_empty() {
        return Err(input_failure(format!(
            "{}: manifest lists no datasets",
            manifest.display()
        )));
    }
    let mut reports = Vec::new();
    let mut failed = 0;
    for entry in &entries {
        match evaluate_entry(entry, out_dir, sample, config, pool, backend) {
            Ok(r) => reports.push(r),
            Err(e) => {
                failed += 1;
                writeln!(io.stderr, "error: dataset {}: {e}", entry.name)?;
            }
        }
    }
    write_eval_summary(&reports, config.format, io.stdout)?;
    Ok(if failed > 0 { EXIT_PARTIAL } else { EXIT_OK })
}

pub fn write_eval_summary(reports: &[EvalReport], format: OutputFormat, out: &mut dyn Write) -> std::io::Result<()> {
    match format {
        OutputFormat::Json => {
            for r in reports {
                writeln!(out, "{}", serde_json::to_string(r).expect("report serializes"))?;
            }
        }
        OutputFormat::Tsv => {
            writeln!(
                out,
                "dataset\ttask\tn\tprecision\trecall\tf1\taccuracy\troc_auc\tmse\tr2\tthreshold"
            )?;
            for r in reports {
                let cells: Vec<String> = metric_columns(&r.metrics)
                    .iter()
                    .map(|v| v.map(|x| x.to_string()).unwrap_or_default())
                    .collect();
                writeln!(
                    out,
                    "{}\t{}\t{}\t{}",
                    tsv_field(&r.dataset),
                    r.task,
                    r.n,
                    cells.join("\t")
                )?;
            }
        }
        OutputFormat::Pretty => write_tables(reports, out)?,
    }
    Ok(())
}

fn write_tables(reports: &[EvalReport], out: &mut dyn Write) -> std::io::Result<()> {
    let sections: [(Task, &str, &[&str]); 3] = [
        (
            Task::Nli3,
            "3-way classification",
            &["Precision", "Recall", "micro F1", "Accuracy"],
        ),
        (
            Task::Binary,
            "Binary classification",
            &["Precision", "Recall", "F1", "ROC AUC"],
        ),
        (Task::Regression, "Regression", &["MSE", "R²"]),
    ];
    let mut first = true;
    for (task, title, headers) in sections {
        let rows: Vec<&EvalReport> = reports.iter().filter(|r| r.task == task).collect();
        if rows.is_empty() {
            continue;
        }
        if !first {
            writeln!(out)?;
        }
        first = false;
        let width = rows.iter().map(|r| r.dataset.chars().count()).max().unwrap_or(0).max(7);
        writeln!(out, "{title}")?;
        write!(out, "{:<width$}", "Dataset")?;
        for h in headers {
            write!(out, "  {h:>9}")?;
        }
        writeln!(out)?;
        for r in rows {
            let values: Vec<f64> = match &r.metrics {
                TaskMetrics::ThreeWay(m) => vec![m.precision, m.recall, m.f1, m.accuracy],
                TaskMetrics::Binary(m) => vec![m.precision, m.recall, m.f1, m.roc_auc],
                TaskMetrics::Regression(m) => vec![m.mse, m.r2],
            };
            write!(out, "{:<width$}", r.dataset)?;
            for v in values {
                write!(out, "  {v:>9.3}")?;
            }
            writeln!(out)?;
        }
    }
    Ok(())
}

fn cmd_chunk_debug(
    source: &str,
    config: &CliConfig,
    backend: &dyn AlignmentBackend,
    io: &mut Io<'_>,
) -> Result<i32, Failure> {
    let text = read_source(source, io.stdin)?;
    let sentences = split_sentences(&text);
    if sentences.is_empty() {
        return Err(input_failure("input contains no sentences"));
    }
    let chunks = chunk_context(&sentences, &config.budget, backend.tokenizer())?;
    let counts = sentences
        .iter()
        .map(|s| backend.tokenizer().count_tokens(&s.text))
        .collect::<Result<Vec<_>, _>>()?;
    let ranges: Vec<_> = chunks.iter().map(|c| c.sentence_range()).collect();
    let violations = check_chunks(&counts, &ranges, &config.budget);

    match config.format {
        OutputFormat::Json => {
            let chunk_list: Vec<Value> = chunks
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    json!({
                        "index": i,
                        "first_sentence": c.first_sentence,
                        "last_sentence": c.end_sentence() - 1,
                        "token_count": c.token_count,
                        "text": c.text(),
                    })
                })
                .collect();
            let doc = json!({
                "n_sentences": sentences.len(),
                "budget": config.budget.budget,
                "overlap_sentences": config.budget.overlap_sentences,
                "chunks": chunk_list,
                "violations": violations,
            });
            writeln!(io.stdout, "{doc}")?;
        }
        OutputFormat::Tsv => {
            writeln!(io.stdout, "index\tfirst_sentence\tlast_sentence\ttoken_count")?;
            for (i, c) in chunks.iter().enumerate() {
                writeln!(
                    io.stdout,
                    "{i}\t{}\t{}\t{}",
                    c.first_sentence,
                    c.end_sentence() - 1,
                    c.token_count
                )?;
            }
        }
        OutputFormat::Pretty => {
            writeln!(
                io.stdout,
                "{} sentences, {} chunks (budget {}, overlap {})",
                sentences.len(),
                chunks.len(),
                config.budget.budget,
                config.budget.overlap_sentences
            )?;
            for (i, c) in chunks.iter().enumerate() {
                let oversize = if c.token_count > config.budget.budget {
                    "  (oversize)"
                } else {
                    ""
                };
                writeln!(
                    io.stdout,
                    "chunk {i}: sentences {}..={}, {} tokens{oversize}",
                    c.first_sentence,
                    c.end_sentence() - 1,
                    c.token_count
                )?;
            }
        }
    }
    for v in &violations {
        writeln!(io.stderr, "violation: {v}")?;
    }
    Ok(if violations.is_empty() { EXIT_OK } else { EXIT_PARTIAL })
}

fn cmd_calibrate(
    dataset: &Path,
    max_points: usize,
    sample: Option<usize>,
    config: &CliConfig,
    pool: &rayon::ThreadPool,
    backend: &dyn AlignmentBackend,
    io: &mut Io<'_>,
) -> Result<i32, Failure> {
    let mut records = load_dataset(dataset, Task::Binary, None)?;
    if let Some(n) = sample {
        records = stratified_subsample(&records, n, config.seed);
    }
    if records.is_empty() {
        return Err(input_failure(format!("{}: no records", dataset.display())));
    }
    let preds = pool.install(|| predict_records(&records, backend, &config.budget))?;
    let scores: Vec<f64> = preds.iter().map(|p| p.prob_bin).collect();
    let calibration = calibrate_threshold(&scores, &binary_gold(&records), max_points)?;
    match config.format {
        OutputFormat::Json => writeln!(
            io.stdout,
            "{}",
            serde_json::to_string(&calibration).expect("serializes")
        )?,
        OutputFormat::Tsv => {
            writeln!(io.stdout, "threshold\tprecision\trecall\tf1")?;
            for p in &calibration.curve {
                writeln!(io.stdout, "{}\t{}\t{}\t{}", p.threshold, p.precision, p.recall, p.f1)?;
            }
        }
        OutputFormat::Pretty => {
            writeln!(
                io.stdout,
                "best threshold {:.4} (F1 {:.4}) over {} candidates",
                calibration.best_threshold,
                calibration.best_f1,
                calibration.curve.len()
            )?;
            for p in &calibration.curve {
                writeln!(
                    io.stdout,
                    "  t={:.4}  P={:.4}  R={:.4}  F1={:.4}",
                    p.threshold, p.precision, p.recall, p.f1
                )?;
            }
        }
    }
    Ok(EXIT_OK)
}

fn cmd_convert(
    input: &str,
    task: Task,
    output: Option<&Path>,
    fields: &FieldNames,
    label_scale: Option<f64>,
    mapping: Option<&Path>,
    io: &mut Io<'_>,
) -> Result<i32, Failure> {
    let mapping = match mapping {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        }
        None => LabelMapping::default(),
    };
    let report = if input == "-" {
        convert_jsonl(&mut *io.stdin, task, fields, &mapping, label_scale)?
    } else {
        let file = std::fs::File::open(input).map_err(|e| Error::io(input, e))?;
        convert_jsonl(BufReader::new(file), task, fields, &mapping, label_scale)?
    };
    for (line, reason) in &report.skipped {
        log::warn!("line {line} skipped: {reason}");
    }
    writeln!(
        io.stderr,
        "converted {} records, skipped {}",
        report.records.len(),
        report.skipped.len()
    )?;
    match output {
        Some(path) => {
            let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
            let mut w = std::io::BufWriter::new(file);
            write_dataset(&mut w, &report.records)?;
            w.flush()?;
        }
        None => write_dataset(&mut *io.stdout, &report.records)?,
    }
    if report.records.is_empty() && !report.skipped.is_empty() {
        return Err(input_failure("no line could be converted"));
    }
    Ok(EXIT_OK)
}
