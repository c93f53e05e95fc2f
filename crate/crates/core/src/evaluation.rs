//! Confusion matrices, pipeline evaluation and grid search.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{self, Corpus, Label, Language, SplitSpec};
use crate::error::{Error, Result};
use crate::model::{self, LinearModel, ModelKind, TrainConfig, TrainDiagnostics};
use crate::preprocess::{Preprocessor, TokenStream};
use crate::vectorize::{FeatureSpace, VectorizerConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub positive: Label,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }

    /// The same counts read with the other class as positive.
    pub fn flipped(&self) -> ConfusionMatrix {
        ConfusionMatrix {
            tp: self.tn,
            tn: self.tp,
            fp: self.fn_,
            fn_: self.fp,
            positive: self.positive.other(),
        }
    }
}

pub fn confusion(predicted: &[Label], actual: &[Label], positive: Label) -> Result<ConfusionMatrix> {
    if predicted.len() != actual.len() {
        return Err(Error::LengthMismatch {
            left: predicted.len(),
            right: actual.len(),
        });
    }
    let mut cm = ConfusionMatrix {
        tp: 0,
        tn: 0,
        fp: 0,
        fn_: 0,
        positive,
    };
    for (&p, &a) in predicted.iter().zip(actual) {
        match (p == positive, a == positive) {
            (true, true) => cm.tp += 1,
            (false, false) => cm.tn += 1,
            (true, false) => cm.fp += 1,
            (false, true) => cm.fn_ += 1,
        }
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    /// Set when a ratio had a zero denominator and was reported as 0.
    pub degenerate: bool,
}

fn ratio(num: f64, den: f64, degenerate: &mut bool) -> f64 {
    if den == 0.0 {
        *degenerate = true;
        0.0
    } else {
        num / den
    }
}

pub fn metrics(cm: &ConfusionMatrix) -> Result<Metrics> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::EmptyMatrix);
    }
    let mut degenerate = false;
    let (tp, tn, fp, fn_) = (cm.tp as f64, cm.tn as f64, cm.fp as f64, cm.fn_ as f64);
    let precision = ratio(tp, tp + fp, &mut degenerate);
    let recall = ratio(tp, tp + fn_, &mut degenerate);
    let f1 = ratio(2.0 * precision * recall, precision + recall, &mut degenerate);
    Ok(Metrics {
        precision,
        recall,
        f1,
        accuracy: (tp + tn) / total as f64,
        degenerate,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuthorPrediction {
    pub author_id: String,
    pub predicted: Label,
    pub actual: Label,
    pub decision: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub confusion: ConfusionMatrix,
    pub metrics: Metrics,
    pub predictions: Vec<AuthorPrediction>,
    /// Authors whose decision value was exactly zero.
    pub ties: usize,
}

impl EvalReport {
    pub fn from_predictions(predictions: Vec<AuthorPrediction>, ties: usize, positive: Label) -> Result<EvalReport> {
        let predicted: Vec<Label> = predictions.iter().map(|p| p.predicted).collect();
        let actual: Vec<Label> = predictions.iter().map(|p| p.actual).collect();
        let confusion = confusion(&predicted, &actual, positive)?;
        let metrics = metrics(&confusion)?;
        Ok(EvalReport {
            confusion,
            metrics,
            predictions,
            ties,
        })
    }

    pub fn with_positive(&self, positive: Label) -> EvalReport {
        if positive == self.confusion.positive {
            return self.clone();
        }
        let confusion = self.confusion.flipped();
        EvalReport {
            metrics: metrics(&confusion).expect("non-empty report"),
            confusion,
            predictions: self.predictions.clone(),
            ties: self.ties,
        }
    }

    pub fn accuracy(&self) -> f64 {
        self.metrics.accuracy
    }
}

/// Vectorizer blocks, classifier kind and training parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub model: ModelKind,
    pub vectorizers: Vec<VectorizerConfig>,
    pub train: TrainConfig,
}

impl PipelineConfig {
    pub fn new(model: ModelKind, vectorizers: Vec<VectorizerConfig>) -> PipelineConfig {
        PipelineConfig {
            model,
            vectorizers,
            train: TrainConfig::for_kind(model),
        }
    }

    /// The submitted system for `language`: a linear SVM over TF-IDF
    /// character 1–3-grams (3,000 features) for English; logistic regression
    /// over TF-IDF character 1–3-grams (5,000) joined with character 3–7-gram
    /// counts (50,000) for Spanish.
    pub fn final_system(language: Language) -> PipelineConfig {
        match language {
            Language::En => PipelineConfig::new(ModelKind::Svm, vec![VectorizerConfig::char_tfidf(1, 3, Some(3_000))]),
            Language::Es => PipelineConfig::new(
                ModelKind::LogReg,
                vec![
                    VectorizerConfig::char_tfidf(1, 3, Some(5_000)),
                    VectorizerConfig::char_count(3, 7, Some(50_000)),
                ],
            ),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.vectorizers.is_empty() {
            return Err(Error::InvalidConfig("pipeline needs at least one vectorizer".into()));
        }
        for v in &self.vectorizers {
            v.validate()?;
        }
        self.train.validate()?;
        if self.train.loss != self.model.loss() {
            return Err(Error::InvalidConfig("loss does not match model kind".into()));
        }
        Ok(())
    }
}

/// `svm:tfidf/char/1-3/3000/1`, blocks joined by `+`; a `;c=<value>` suffix
/// appears when C differs from 1.
impl fmt::Display for PipelineConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.model)?;
        for (i, v) in self.vectorizers.iter().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            write!(f, "{v}")?;
        }
        if self.train.c != 1.0 {
            write!(f, ";c={}", self.train.c)?;
        }
        Ok(())
    }
}

impl FromStr for PipelineConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<PipelineConfig> {
        let (main, c) = match s.trim().split_once(";c=") {
            Some((m, c)) => (
                m,
                Some(
                    c.parse::<f64>()
                        .map_err(|_| Error::InvalidConfig(format!("bad C in {s:?}")))?,
                ),
            ),
            None => (s.trim(), None),
        };
        let (model, blocks) = main
            .split_once(':')
            .ok_or_else(|| Error::InvalidConfig(format!("pipeline {s:?} must look like <model>:<vectorizer>[+...]")))?;
        let model: ModelKind = model.parse()?;
        let vectorizers = blocks
            .split('+')
            .map(str::parse)
            .collect::<Result<Vec<VectorizerConfig>>>()?;
        let mut config = PipelineConfig::new(model, vectorizers);
        if let Some(c) = c {
            config.train.c = c;
        }
        config.validate()?;
        Ok(config)
    }
}

/// Fits a model on preprocessed, labeled streams.
pub fn fit_streams(
    streams: &[TokenStream],
    labels: &[Label],
    config: &PipelineConfig,
    language: Language,
) -> Result<(LinearModel, TrainDiagnostics)> {
    config.validate()?;
    let features = FeatureSpace::fit(streams, &config.vectorizers)?;
    let x = features.transform_all(streams);
    let fit = model::train(config.model, &x, labels, &config.train)?;
    let model = LinearModel::new(fit.classifier, features, language, config.train)?;
    Ok((model, fit.diagnostics))
}

/// Fits the pipeline on a labeled corpus (vocabularies and weights see only
/// this corpus).
pub fn fit_pipeline(train: &Corpus, config: &PipelineConfig) -> Result<(LinearModel, TrainDiagnostics)> {
    let labels = train.labels()?;
    let streams = Preprocessor::new(train.language()).process_corpus(train);
    fit_streams(&streams, &labels, config, train.language())
}

fn evaluate_streams(
    model: &LinearModel,
    streams: &[TokenStream],
    labels: &[Label],
    positive: Label,
) -> Result<EvalReport> {
    let mut predictions = Vec::with_capacity(streams.len());
    let mut ties = 0;
    for (stream, &actual) in streams.iter().zip(labels) {
        let p = model.predict(&model.features.transform(stream))?;
        ties += p.tie as usize;
        predictions.push(AuthorPrediction {
            author_id: stream.author_id.clone(),
            predicted: p.label,
            actual,
            decision: p.decision,
        });
    }
    EvalReport::from_predictions(predictions, ties, positive)
}

pub fn evaluate_model(model: &LinearModel, test: &Corpus, positive: Label) -> Result<EvalReport> {
    let labels = test.labels()?;
    if labels.is_empty() {
        return Err(Error::EmptyInput("evaluation corpus is empty"));
    }
    let streams = Preprocessor::new(model.language).process_corpus(test);
    evaluate_streams(model, &streams, &labels, positive)
}

pub fn evaluate_pipeline(
    train: &Corpus,
    test: &Corpus,
    config: &PipelineConfig,
    positive: Label,
) -> Result<EvalReport> {
    if train.authors().iter().any(|a| test.get(&a.author_id).is_some()) {
        return Err(Error::InvalidConfig("train and test corpora overlap".into()));
    }
    let (model, _) = fit_pipeline(train, config)?;
    evaluate_model(&model, test, positive)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub config: PipelineConfig,
    pub mean_accuracy: f64,
    pub reports: Vec<EvalReport>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridOptions {
    /// `None` evaluates on the single seeded split; `Some(k)` on k stratified folds.
    pub folds: Option<usize>,
    pub positive: Label,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions {
            folds: None,
            positive: Label::FakeNewsSpreader,
        }
    }
}

struct PreparedSplit {
    train_streams: Vec<TokenStream>,
    train_labels: Vec<Label>,
    test_streams: Vec<TokenStream>,
    test_labels: Vec<Label>,
}

/// Evaluates every configuration and ranks by mean accuracy (descending);
/// equal accuracies keep grid order.
pub fn grid_search(
    corpus: &Corpus,
    grid: &[PipelineConfig],
    spec: &SplitSpec,
    options: &GridOptions,
) -> Result<Vec<GridResult>> {
    if grid.is_empty() {
        return Err(Error::InvalidConfig("grid is empty".into()));
    }
    for config in grid {
        config.validate()?;
    }
    let splits = match options.folds {
        None => vec![corpus::split_corpus(corpus, spec)?],
        Some(k) => corpus::stratified_folds(corpus, k, spec.seed)?,
    };
    let pre = Preprocessor::new(corpus.language());
    let all_streams = pre.process_corpus(corpus);
    let stream_of = |id: &str| -> TokenStream {
        let i = corpus
            .authors()
            .binary_search_by(|a| a.author_id.as_str().cmp(id))
            .expect("split authors come from the corpus");
        all_streams[i].clone()
    };
    let prepared = splits
        .iter()
        .map(|(train, test)| {
            Ok(PreparedSplit {
                train_streams: train.authors().iter().map(|a| stream_of(&a.author_id)).collect(),
                train_labels: train.labels()?,
                test_streams: test.authors().iter().map(|a| stream_of(&a.author_id)).collect(),
                test_labels: test.labels()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut results = grid
        .par_iter()
        .map(|config| {
            let reports = prepared
                .iter()
                .map(|split| {
                    let (model, _) = fit_streams(&split.train_streams, &split.train_labels, config, corpus.language())?;
                    evaluate_streams(&model, &split.test_streams, &split.test_labels, options.positive)
                })
                .collect::<Result<Vec<_>>>()?;
            let mean_accuracy = reports.iter().map(EvalReport::accuracy).sum::<f64>() / reports.len() as f64;
            Ok(GridResult {
                config: config.clone(),
                mean_accuracy,
                reports,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    results.sort_by(|a, b| b.mean_accuracy.total_cmp(&a.mean_accuracy));
    Ok(results)
}

pub const GRID_RANGES: [(usize, usize); 3] = [(1, 3), (2, 7), (3, 7)];
pub const GRID_MAX_FEATURES: [usize; 5] = [1_000, 3_000, 5_000, 10_000, 50_000];
pub const GRID_MIN_DF: [usize; 3] = [1, 2, 3];

/// Character TF-IDF ranges × vocabulary caps × min_df × {SVM, logistic
/// regression}, followed by both submitted systems.
pub fn default_grid() -> Vec<PipelineConfig> {
    let mut grid = Vec::new();
    for kind in [ModelKind::Svm, ModelKind::LogReg] {
        for (lo, hi) in GRID_RANGES {
            for cap in GRID_MAX_FEATURES {
                for min_df in GRID_MIN_DF {
                    grid.push(PipelineConfig::new(
                        kind,
                        vec![VectorizerConfig::char_tfidf(lo, hi, Some(cap)).with_min_df(min_df)],
                    ));
                }
            }
        }
    }
    for language in [Language::En, Language::Es] {
        let config = PipelineConfig::final_system(language);
        if !grid.contains(&config) {
            grid.push(config);
        }
    }
    grid
}

/// Tab-separated ranking, one row per configuration.
pub fn results_tsv(results: &[GridResult]) -> String {
    let mut out = String::from("rank\tconfig\tmean_accuracy\tprecision\trecall\tf1\ttp\ttn\tfp\tfn\n");
    for (rank, r) in results.iter().enumerate() {
        let (mut p, mut rec, mut f1) = (0.0, 0.0, 0.0);
        let (mut tp, mut tn, mut fp, mut fn_) = (0, 0, 0, 0);
        for report in &r.reports {
            p += report.metrics.precision;
            rec += report.metrics.recall;
            f1 += report.metrics.f1;
            tp += report.confusion.tp;
            tn += report.confusion.tn;
            fp += report.confusion.fp;
            fn_ += report.confusion.fn_;
        }
        let n = r.reports.len() as f64;
        let _ = writeln!(
            out,
            "{}\t{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{tp}\t{tn}\t{fp}\t{fn_}",
            rank + 1,
            r.config,
            r.mean_accuracy,
            p / n,
            rec / n,
            f1 / n
        );
    }
    out
}

#[derive(Serialize)]
struct GridDocument<'a> {
    schema: &'static str,
    results: Vec<GridEntry<'a>>,
}

#[derive(Serialize)]
struct GridEntry<'a> {
    rank: usize,
    config: String,
    mean_accuracy: f64,
    splits: Vec<SplitEntry<'a>>,
}

#[derive(Serialize)]
struct SplitEntry<'a> {
    confusion: &'a ConfusionMatrix,
    metrics: &'a Metrics,
    ties: usize,
}

/// JSON document (`schema: "spreader-grid/1"`) with the same rows plus
/// per-split confusion matrices and metrics.
pub fn results_json(results: &[GridResult]) -> String {
    let doc = GridDocument {
        schema: "spreader-grid/1",
        results: results
            .iter()
            .enumerate()
            .map(|(i, r)| GridEntry {
                rank: i + 1,
                config: r.config.to_string(),
                mean_accuracy: r.mean_accuracy,
                splits: r
                    .reports
                    .iter()
                    .map(|rep| SplitEntry {
                        confusion: &rep.confusion,
                        metrics: &rep.metrics,
                        ties: rep.ties,
                    })
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
}

/// Renders a report as a tab-separated results row with a header.
pub fn render_report(report: &EvalReport, config: &PipelineConfig, language: Language) -> String {
    let cm = &report.confusion;
    let m = &report.metrics;
    let mut out = String::new();
    let _ = writeln!(out, "Model\tFeatures\tLanguage\tTP\tTN\tFP\tFN\tP\tR\tF1\tAcc.");
    let _ = writeln!(
        out,
        "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{:.2}\t{:.2}\t{:.2}\t{:.2}",
        config.model,
        config
            .vectorizers
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join("+"),
        language.code().to_uppercase(),
        cm.tp,
        cm.tn,
        cm.fp,
        cm.fn_,
        m.precision,
        m.recall,
        m.f1,
        m.accuracy
    );
    let _ = writeln!(
        out,
        "positive class: {} ({}); authors: {}; ties: {}{}",
        cm.positive,
        cm.positive.short_name(),
        cm.total(),
        report.ties,
        if m.degenerate {
            "; degenerate metrics present"
        } else {
            ""
        }
    );
    out
}
