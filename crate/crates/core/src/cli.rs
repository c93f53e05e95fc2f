//! The `spreader` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 model error.
//!
//! `--config <file>` reads `key = value` lines (`#` comments) whose keys are
//! long flag names without the dashes. Values from the file override flags
//! given on the command line; `true`/`false` toggle switches.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{corpus_stats, render_stats};
use crate::corpus::{self, format_truth, load_corpus_with_diagnostics, Corpus, Label, Language, SplitSpec};
use crate::error::{Error, ErrorCategory};
use crate::evaluation::{
    self, default_grid, evaluate_model, grid_search, render_report, results_json, results_tsv, GridOptions,
    PipelineConfig,
};
use crate::model::LinearModel;
use crate::persist::{load_model, save_model};
use crate::preprocess::Preprocessor;
use crate::synthetic::{self, SyntheticSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_MODEL: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "spreader",
    version,
    about = "Fake-news-spreader profiling with character n-gram linear models",
    args_override_self = true
)]
struct Cli {
    /// key = value file whose entries override command-line flags
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print per-class corpus statistics
    Analyze(AnalyzeArgs),
    /// Train the language's final configuration (or --pipeline) and save it
    Train(TrainArgs),
    /// Score a saved model on a labeled corpus
    Evaluate(EvaluateArgs),
    /// Rank pipeline configurations on a seeded split
    Gridsearch(GridArgs),
    /// Label an unlabeled corpus with a saved model
    Predict(PredictArgs),
    /// Write a synthetic PAN-format corpus
    Synth(SynthArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum LangArg {
    En,
    Es,
}

impl From<LangArg> for Language {
    fn from(l: LangArg) -> Language {
        match l {
            LangArg::En => Language::En,
            LangArg::Es => Language::Es,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
enum SplitPart {
    All,
    Train,
    Test,
}

#[derive(Args, Debug)]
struct SplitArgs {
    /// Shuffle seed for the stratified split
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Train fraction, as a decimal or ratio
    #[arg(long, default_value = "7/10")]
    train_fraction: String,
}

impl SplitArgs {
    fn spec(&self) -> Result<SplitSpec, Error> {
        SplitSpec::parse_fraction(&self.train_fraction, self.seed)
    }
}

#[derive(Args, Debug)]
struct PositiveArg {
    /// Class treated as positive in P/R/F1 (1 = fake-news spreader)
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(0..=1))]
    positive_class: u8,
}

impl PositiveArg {
    fn label(&self) -> Label {
        Label::from_u8(self.positive_class).expect("validated by clap")
    }
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "en")]
    lang: LangArg,
    /// Write the table here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long, value_enum)]
    lang: LangArg,
    #[arg(long)]
    input: PathBuf,
    /// Model file to write
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    split: SplitArgs,
    /// Train on every author instead of the train split
    #[arg(long)]
    full: bool,
    /// Pipeline, e.g. `svm:tfidf/char/1-3/3000/1`; defaults to the language's final system
    #[arg(long)]
    pipeline: Option<String>,
    /// Inverse regularization strength
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[command(flatten)]
    positive: PositiveArg,
    /// Also write the report to this file
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    input: PathBuf,
    /// Which part of the seeded split to score
    #[arg(long, value_enum, default_value = "all")]
    split: SplitPart,
    #[command(flatten)]
    split_spec: SplitArgs,
    #[command(flatten)]
    positive: PositiveArg,
    /// Write per-author predictions (truth-file format) here
    #[arg(long)]
    predictions: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GridArgs {
    #[arg(long, value_enum)]
    lang: LangArg,
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    split: SplitArgs,
    /// Use k stratified folds instead of the single split
    #[arg(long)]
    folds: Option<usize>,
    /// Restrict the grid to these pipelines (repeatable)
    #[arg(long)]
    pipeline: Vec<String>,
    #[command(flatten)]
    positive: PositiveArg,
    /// Tab-separated ranking (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON ranking with per-split details
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    input: PathBuf,
    /// Prediction file (stdout when omitted)
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 60)]
    per_class: usize,
    #[arg(long, default_value_t = 100)]
    tweets: usize,
    #[arg(long, default_value_t = 2020)]
    seed: u64,
    #[arg(long, value_enum, default_value = "en")]
    lang: LangArg,
}

/// Failure carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match e.category() {
            ErrorCategory::Usage => EXIT_USAGE,
            ErrorCategory::Data => EXIT_DATA,
            ErrorCategory::Model => EXIT_MODEL,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

/// Reads a `key = value` config file into extra `--key value` arguments.
pub fn config_arguments(text: &str) -> Result<Vec<String>, String> {
    let mut args = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key = value", i + 1))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key.is_empty() || key == "config" {
            return Err(format!("config line {}: invalid key", i + 1));
        }
        match value {
            "true" => args.push(format!("--{key}")),
            "false" => {}
            v => {
                args.push(format!("--{key}"));
                args.push(v.to_string());
            }
        }
    }
    Ok(args)
}

fn find_config(args: &[String]) -> Option<String> {
    let mut iter = args.iter();
    while let Some(a) = iter.next() {
        if a == "--config" {
            return iter.next().cloned();
        }
        if let Some(v) = a.strip_prefix("--config=") {
            return Some(v.to_string());
        }
    }
    None
}

/// Runs the CLI with `args` (including the program name) and returns the
/// exit code. Primary output goes to `out`, diagnostics to `err`.
pub fn run(args: Vec<String>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let mut args = args;
    if let Some(path) = find_config(&args) {
        let extra = fs::read_to_string(&path)
            .map_err(|e| format!("cannot read config {path}: {e}"))
            .and_then(|text| config_arguments(&text));
        match extra {
            Ok(extra) => args.extend(extra),
            Err(msg) => {
                let _ = writeln!(err, "error: {msg}");
                return EXIT_USAGE;
            }
        }
    }
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let rendered = e.to_string();
                    let first = rendered.lines().next().unwrap_or("usage error");
                    let _ = writeln!(err, "{first}");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match cli.command {
        Command::Analyze(a) => analyze(a, out),
        Command::Train(a) => train(a, out, err),
        Command::Evaluate(a) => evaluate(a, out),
        Command::Gridsearch(a) => gridsearch(a, out),
        Command::Predict(a) => predict(a, out),
        Command::Synth(a) => synth(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::from(Error::io(path, e)))
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes())
        .map_err(|e| Failure::from(Error::io("<stdout>", e)))
}

fn load(dir: &Path, language: Language) -> Result<Corpus, Failure> {
    let (corpus, _diagnostics) = load_corpus_with_diagnostics(dir, language)?;
    if corpus.is_empty() {
        return Err(Error::EmptyInput("no author files found").into());
    }
    Ok(corpus)
}

fn analyze(a: AnalyzeArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let corpus = load(&a.input, a.lang.into())?;
    let table = render_stats(&corpus_stats(&corpus)?);
    match a.output {
        Some(p) => write_file(&p, &table),
        None => emit(out, &table),
    }
}

fn train(a: TrainArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let language: Language = a.lang.into();
    let mut config = match &a.pipeline {
        Some(spec) => spec.parse::<PipelineConfig>()?,
        None => PipelineConfig::final_system(language),
    };
    if let Some(c) = a.c {
        config.train.c = c;
    }
    if let Some(t) = a.tolerance {
        config.train.tolerance = t;
    }
    if let Some(m) = a.max_iter {
        config.train.max_iterations = m;
    }
    config.validate()?;
    let split = a.split.spec()?;

    let corpus = load(&a.input, language)?;
    if !corpus.is_labeled() {
        return Err(Error::UnlabeledCorpus.into());
    }
    let (train_set, held_out) = if a.full {
        (corpus.clone(), None)
    } else {
        let (tr, te) = corpus::split_corpus(&corpus, &split)?;
        (tr, Some(te))
    };
    let (model, diagnostics) = evaluation::fit_pipeline(&train_set, &config)?;
    if !diagnostics.converged {
        let _ = writeln!(
            err,
            "warning: training did not converge after {} iterations (gradient norm {:.3e})",
            diagnostics.iterations, diagnostics.gradient_norm
        );
    }
    save_model(&model, &a.out)?;

    let (scope, eval_set) = match &held_out {
        Some(te) => ("held-out test split", te),
        None => ("training data", &train_set),
    };
    let report = evaluate_model(&model, eval_set, a.positive.label())?;
    let mut text = format!(
        "pipeline: {config}\nlanguage: {language}\ntrain authors: {}\nfeatures: {}\noptimizer: {} iterations, converged: {}\nevaluated on: {scope}\n",
        train_set.len(),
        model.dimension(),
        diagnostics.iterations,
        diagnostics.converged,
    );
    if !a.full {
        text.push_str(&format!(
            "split: seed {} train fraction {}/{}\n",
            split.seed, split.train_numerator, split.train_denominator
        ));
    }
    text.push('\n');
    text.push_str(&render_report(&report, &config, language));
    if let Some(p) = &a.report {
        write_file(p, &text)?;
    }
    emit(out, &text)
}

fn pipeline_of(model: &LinearModel) -> PipelineConfig {
    PipelineConfig {
        model: model.kind(),
        vectorizers: model.features.configs(),
        train: model.train_config,
    }
}

fn evaluate(a: EvaluateArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let model = load_model(&a.model)?;
    let corpus = load(&a.input, model.language)?;
    if !corpus.is_labeled() {
        return Err(Error::UnlabeledCorpus.into());
    }
    let subset = match a.split {
        SplitPart::All => corpus,
        part => {
            let (tr, te) = corpus::split_corpus(&corpus, &a.split_spec.spec()?)?;
            if part == SplitPart::Train {
                tr
            } else {
                te
            }
        }
    };
    let report = evaluate_model(&model, &subset, a.positive.label())?;
    if let Some(p) = &a.predictions {
        let lines = format_truth(report.predictions.iter().map(|p| (p.author_id.as_str(), p.predicted)));
        write_file(p, &lines)?;
    }
    let text = render_report(&report, &pipeline_of(&model), model.language);
    if let Some(p) = &a.output {
        write_file(p, &text)?;
    }
    emit(out, &text)
}

fn gridsearch(a: GridArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let language: Language = a.lang.into();
    let grid = if a.pipeline.is_empty() {
        default_grid()
    } else {
        a.pipeline
            .iter()
            .map(|s| s.parse::<PipelineConfig>())
            .collect::<Result<Vec<_>, _>>()?
    };
    if a.folds.is_some_and(|k| k < 2) {
        return Err(usage("--folds must be at least 2"));
    }
    let corpus = load(&a.input, language)?;
    let options = GridOptions {
        folds: a.folds,
        positive: a.positive.label(),
    };
    let results = grid_search(&corpus, &grid, &a.split.spec()?, &options)?;
    let tsv = results_tsv(&results);
    if let Some(p) = &a.json {
        write_file(p, &results_json(&results))?;
    }
    match &a.out {
        Some(p) => write_file(p, &tsv),
        None => emit(out, &tsv),
    }
}

fn predict(a: PredictArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let model = load_model(&a.model)?;
    let corpus = load(&a.input, model.language)?;
    let pre = Preprocessor::new(model.language);
    let mut lines = Vec::with_capacity(corpus.len());
    for author in corpus.authors() {
        let p = model.predict(&model.vectorize(&pre, author))?;
        lines.push((author.author_id.as_str(), p.label));
    }
    let text = format_truth(lines);
    match &a.output {
        Some(p) => write_file(p, &text),
        None => emit(out, &text),
    }
}

fn synth(a: SynthArgs, out: &mut dyn Write) -> Result<(), Failure> {
    if a.per_class == 0 || a.tweets == 0 {
        return Err(usage("--per-class and --tweets must be positive"));
    }
    let corpus = synthetic::generate(&SyntheticSpec {
        authors_per_class: a.per_class,
        tweets_per_author: a.tweets,
        seed: a.seed,
        language: a.lang.into(),
    })?;
    corpus::write_corpus(&corpus, &a.out)?;
    emit(out, &format!("wrote {} authors to {}\n", corpus.len(), a.out.display()))
}
