//! The `borrowtag` command line.

use std::collections::HashSet;
use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use borrowtag_core::corpus::corpus_stats;
use borrowtag_core::crf::{tag, train};
use borrowtag_core::eval::evaluate;
use borrowtag_core::tune::{Experiment, NO_EMBEDDINGS};
use borrowtag_core::{Corpus, EmbeddingTable, EvalMode, Family, FeatureConfig, TagAlphabet};
use clap::{Args, Parser, Subcommand};

use crate::config::{RunConfig, Settings};
use crate::corpus_io::{read_corpus_file, write_corpus_file};
use crate::embeddings_io::load_embeddings_file;
use crate::errors::{Error, Result};
use crate::ingest::{items_to_corpus, parse_rss};
use crate::model_io::{load_model_file, save_model_file};
use crate::{parallel, report};

#[derive(Debug, Parser)]
#[command(name = "borrowtag", version, about = "Extract lexical borrowings from headlines with a linear-chain CRF")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert RSS feed files into an unannotated corpus
    Ingest(IngestArgs),
    /// Print corpus statistics
    Stats(StatsArgs),
    /// Train a model
    Train(TrainArgs),
    /// Tag a corpus with a trained model
    Tag(TagArgs),
    /// Score predictions against gold spans
    Eval(EvalArgs),
    /// Grid search on the development corpus
    Tune(TuneArgs),
    /// Retrain with one feature family removed at a time
    Ablate(AblateArgs),
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Run configuration file (key = value lines)
    #[arg(short, long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Set a configuration key, overriding the file
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// RSS 2.0 files; `-` reads standard input
    #[arg(required = true, value_name = "RSS")]
    pub feeds: Vec<PathBuf>,
    /// Corpus file to create or extend
    #[arg(short, long, value_name = "FILE")]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(value_name = "CORPUS")]
    pub corpus: PathBuf,
    /// Emit TSV instead of an aligned table
    #[arg(long)]
    pub tsv: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Training corpus
    #[arg(long, value_name = "FILE")]
    pub train: Option<PathBuf>,
    /// Embedding table in word2vec text format
    #[arg(long, value_name = "FILE")]
    pub embeddings: Option<PathBuf>,
    /// L1 coefficient
    #[arg(long)]
    pub c1: Option<f64>,
    /// L2 coefficient
    #[arg(long)]
    pub c2: Option<f64>,
    /// Iteration limit
    #[arg(long, value_name = "N")]
    pub max_iterations: Option<usize>,
    /// Train on ENG spans only
    #[arg(long)]
    pub ignore_other: bool,
    /// Model file to write
    #[arg(short, long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TagArgs {
    /// Trained model
    #[arg(short, long, value_name = "FILE")]
    pub model: PathBuf,
    /// Corpus to tag
    #[arg(value_name = "CORPUS")]
    pub corpus: PathBuf,
    /// Embedding table, required when the model uses embeddings
    #[arg(long, value_name = "FILE")]
    pub embeddings: Option<PathBuf>,
    /// Prediction file in corpus format
    #[arg(short, long, value_name = "FILE")]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Gold corpus
    #[arg(long, value_name = "FILE")]
    pub gold: PathBuf,
    /// Predicted corpus
    #[arg(long, value_name = "FILE")]
    pub pred: PathBuf,
    /// Drop OTHER spans from gold and predictions before scoring
    #[arg(long)]
    pub ignore_other: bool,
    /// Emit TSV instead of an aligned table
    #[arg(long)]
    pub tsv: bool,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Training corpus
    #[arg(long, value_name = "FILE")]
    pub train: Option<PathBuf>,
    /// Development corpus
    #[arg(long, value_name = "FILE")]
    pub dev: Option<PathBuf>,
    /// Grid points trained at once
    #[arg(short, long, default_value_t = 1, value_name = "N")]
    pub jobs: usize,
    /// Result table (TSV); defaults to `output_dir`/tune.tsv, else stdout
    #[arg(short, long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Training corpus
    #[arg(long, value_name = "FILE")]
    pub train: Option<PathBuf>,
    /// Development corpus
    #[arg(long, value_name = "FILE")]
    pub dev: Option<PathBuf>,
    /// Embedding table in word2vec text format
    #[arg(long, value_name = "FILE")]
    pub embeddings: Option<PathBuf>,
    /// Rows trained at once
    #[arg(short, long, default_value_t = 1, value_name = "N")]
    pub jobs: usize,
    /// Ablation table (TSV); defaults to `output_dir`/ablation.tsv, else stdout
    #[arg(short, long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code: 0 on success, 1 on invalid input, 2 on usage errors.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

pub fn execute(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Ingest(a) => ingest(a, out),
        Command::Stats(a) => stats(a, out),
        Command::Train(a) => train_cmd(a, out),
        Command::Tag(a) => tag_cmd(a, out),
        Command::Eval(a) => eval_cmd(a, out),
        Command::Tune(a) => tune(a, out),
        Command::Ablate(a) => ablate(a, out),
    }
}

fn settings(args: &ConfigArgs, flags: &[(&str, Option<String>)]) -> Result<RunConfig> {
    let mut settings = match &args.config {
        Some(path) => Settings::load(path)?,
        None => Settings::default(),
    };
    for kv in &args.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        settings.set(k.trim(), v.trim())?;
    }
    for (key, value) in flags {
        if let Some(v) = value {
            settings.set(key, v.clone())?;
        }
    }
    settings.build()
}

fn path_flag(p: &Option<PathBuf>) -> Option<String> {
    p.as_ref().map(|p| p.to_string_lossy().into_owned())
}

fn existing(path: &Path) -> Result<&Path> {
    if path.exists() {
        Ok(path)
    } else {
        Err(Error::Config(format!("{} does not exist", path.display())))
    }
}

/// The table named by `embeddings`, or none, in which case the embedding
/// family is switched off.
fn features_and_table(config: &RunConfig) -> Result<(FeatureConfig, Option<EmbeddingTable>)> {
    let mut features = config.features;
    if !features.uses_embeddings() {
        return Ok((features, None));
    }
    match &config.embeddings {
        Some(_) => {
            let table = load_embeddings_file(config.input("embeddings")?, None)?;
            Ok((features, Some(table)))
        }
        None => {
            log::info!("no embedding table configured; embedding features disabled");
            features.families.remove(Family::Embedding);
            Ok((features, None))
        }
    }
}

fn ingest(args: IngestArgs, out: &mut dyn Write) -> Result<()> {
    let mut items = Vec::new();
    let mut skipped = 0;
    for path in &args.feeds {
        let xml = if path.as_os_str() == "-" {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s)?;
            s
        } else {
            std::fs::read_to_string(path).map_err(Error::at(path))?
        };
        let feed = parse_rss(&xml).map_err(|e| Error::Feed(format!("{}: {e}", path.display())))?;
        skipped += feed.skipped;
        items.extend(feed.items);
    }
    let previous = if args.output.exists() {
        read_corpus_file(&args.output)?
    } else {
        let name = args.output.file_stem().map(|s| s.to_string_lossy().into_owned());
        Corpus::empty(name.unwrap_or_default())
    };
    let ids: HashSet<String> = previous.headlines().iter().map(|h| h.id.clone()).collect();
    let ingested = items_to_corpus(previous.name(), &items, &ids)?;
    let added = ingested.corpus.len();
    let name = previous.name().to_owned();
    let mut headlines = previous.into_headlines();
    headlines.extend(ingested.corpus.into_headlines());
    write_corpus_file(&Corpus::new(name, headlines)?, &args.output)?;
    writeln!(
        out,
        "added {added} headlines; {} duplicates, {} already present, {skipped} untitled items",
        ingested.duplicates,
        ingested.existing.len()
    )?;
    Ok(())
}

fn stats(args: StatsArgs, out: &mut dyn Write) -> Result<()> {
    let corpus = read_corpus_file(existing(&args.corpus)?)?;
    let s = corpus_stats(&corpus);
    if args.tsv {
        let mut rows = vec![
            ["headlines", "tokens", "headlines_with_eng", "headlines_with_borrowing", "eng", "other"]
                .map(String::from)
                .to_vec(),
        ];
        rows.push(
            [s.headlines, s.tokens, s.headlines_with_anglicisms, s.headlines_with_borrowings, s.eng, s.other]
                .map(|n| n.to_string())
                .to_vec(),
        );
        write!(out, "{}", report::tsv(&rows))?;
        if !s.sections.is_empty() {
            let mut rows = vec![["section", "headlines", "with_eng", "percent"].map(String::from).to_vec()];
            for sec in &s.sections {
                rows.push(vec![
                    sec.section.clone(),
                    sec.headlines.to_string(),
                    sec.with_anglicisms.to_string(),
                    report::pct(sec.percentage()),
                ]);
            }
            write!(out, "\n{}", report::tsv(&rows))?;
        }
    } else {
        write!(out, "{}", report::stats_text(corpus.name(), &s))?;
    }
    Ok(())
}

fn train_cmd(args: TrainArgs, out: &mut dyn Write) -> Result<()> {
    let config = settings(
        &args.config,
        &[
            ("train", path_flag(&args.train)),
            ("embeddings", path_flag(&args.embeddings)),
            ("c1", args.c1.map(|v| v.to_string())),
            ("c2", args.c2.map(|v| v.to_string())),
            ("max_iterations", args.max_iterations.map(|v| v.to_string())),
            ("ignore_other", args.ignore_other.then(|| "true".to_owned())),
            ("model", path_flag(&args.output)),
        ],
    )?;
    let corpus = read_corpus_file(config.input("train")?)?;
    let output = config
        .model
        .clone()
        .ok_or_else(|| Error::Config("no model path given (-o or `model`)".into()))?;
    let (features, table) = features_and_table(&config)?;
    let alphabet = if config.ignore_other {
        TagAlphabet::IgnoreOther
    } else {
        TagAlphabet::Full
    };
    let trained = train(&corpus, &features, table.as_ref(), alphabet, &config.train_config)?;
    save_model_file(&trained.model, &output)?;
    let r = &trained.report;
    writeln!(
        out,
        "trained on {} headlines: {} attributes, {} iterations, stop {:?}, objective {:e}",
        corpus.len(),
        trained.model.index().len(),
        r.iterations,
        r.termination,
        r.objective_trace.last().copied().unwrap_or(f64::NAN)
    )?;
    if r.line_search_failed() {
        log::warn!("line search failed; the model is the best point found");
    }
    Ok(())
}

fn tag_cmd(args: TagArgs, out: &mut dyn Write) -> Result<()> {
    let model = load_model_file(existing(&args.model)?)?;
    let corpus = read_corpus_file(existing(&args.corpus)?)?;
    let table = match &args.embeddings {
        Some(p) => Some(load_embeddings_file(existing(p)?, None)?),
        None => None,
    };
    if model.features().uses_embeddings() && table.is_none() {
        return Err(Error::Config("the model uses embeddings; pass --embeddings".into()));
    }
    let predicted = tag(&model, &corpus, table.as_ref())?;
    let spans: usize = predicted.iter().map(Vec::len).sum();
    write_corpus_file(&corpus.with_spans(predicted)?, &args.output)?;
    writeln!(out, "tagged {} headlines, {spans} spans", corpus.len())?;
    Ok(())
}

fn eval_cmd(args: EvalArgs, out: &mut dyn Write) -> Result<()> {
    let gold = read_corpus_file(existing(&args.gold)?)?;
    let pred = read_corpus_file(existing(&args.pred)?)?;
    let mode = if args.ignore_other {
        EvalMode::WithoutOther
    } else {
        EvalMode::WithOther
    };
    let r = evaluate(&gold, &pred, mode)?;
    let text = if args.tsv {
        report::eval_tsv(gold.name(), &r)
    } else {
        report::eval_text(gold.name(), &r)
    };
    write!(out, "{text}")?;
    Ok(())
}

/// `-o` if given, else `file_name` inside the configured `output_dir`.
fn output_path(flag: Option<PathBuf>, config: &RunConfig, file_name: &str) -> Option<PathBuf> {
    flag.or_else(|| config.output_dir.as_ref().map(|d| d.join(file_name)))
}

fn emit(out: &mut dyn Write, path: Option<&Path>, tsv: &str, text: &str) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(Error::at(dir))?;
            }
            std::fs::write(p, tsv).map_err(Error::at(p))?;
            write!(out, "{text}")?;
        }
        None => write!(out, "{tsv}")?,
    }
    Ok(())
}

fn tune(args: TuneArgs, out: &mut dyn Write) -> Result<()> {
    let config = settings(
        &args.config,
        &[("train", path_flag(&args.train)), ("dev", path_flag(&args.dev))],
    )?;
    let train_corpus = read_corpus_file(config.input("train")?)?;
    let dev = read_corpus_file(config.input("dev")?)?;
    let tables = config
        .grid
        .embeddings
        .iter()
        .map(|e| {
            if e == NO_EMBEDDINGS {
                Ok(None)
            } else {
                load_embeddings_file(existing(Path::new(e))?, None).map(Some)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<Option<&EmbeddingTable>> = tables.iter().map(Option::as_ref).collect();
    let experiment = Experiment {
        train: &train_corpus,
        dev: &dev,
        train_config: &config.train_config,
    };
    let result = parallel::grid_search(&experiment, &config.features, &config.grid, &refs, args.jobs)?;
    emit(
        out,
        output_path(args.output, &config, "tune.tsv").as_deref(),
        &report::tune_tsv(&config.grid, &result),
        &report::tune_text(&config.grid, &result),
    )
}

fn ablate(args: AblateArgs, out: &mut dyn Write) -> Result<()> {
    let config = settings(
        &args.config,
        &[
            ("train", path_flag(&args.train)),
            ("dev", path_flag(&args.dev)),
            ("embeddings", path_flag(&args.embeddings)),
        ],
    )?;
    let train_corpus = read_corpus_file(config.input("train")?)?;
    let dev = read_corpus_file(config.input("dev")?)?;
    let (features, table) = features_and_table(&config)?;
    let experiment = Experiment {
        train: &train_corpus,
        dev: &dev,
        train_config: &config.train_config,
    };
    let table = parallel::ablate(&experiment, &features, table.as_ref(), args.jobs)?;
    emit(
        out,
        output_path(args.output, &config, "ablation.tsv").as_deref(),
        &report::ablation_tsv(&table),
        &report::ablation_text(&table),
    )
}
