//! Author profiling for fake-news spreaders on Twitter.
//!
//! The pipeline reads PAN-format author corpora ([`corpus`]), normalizes each
//! author's tweets into a token stream ([`preprocess`]), builds character
//! n-gram TF-IDF or count vectors ([`vectorize`]), and trains L2-regularized
//! linear SVM or logistic regression classifiers ([`model`]). [`evaluation`]
//! scores pipelines and runs grid searches; [`analysis`] reports corpus
//! statistics per class.
//!
//! ```no_run
//! use spreader::corpus::{load_corpus, split_corpus, Label, Language, SplitSpec};
//! use spreader::evaluation::{evaluate_pipeline, PipelineConfig};
//!
//! let corpus = load_corpus("data/en", Language::En)?;
//! let (train, test) = split_corpus(&corpus, &SplitSpec::with_seed(42))?;
//! let config = PipelineConfig::final_system(Language::En);
//! let report = evaluate_pipeline(&train, &test, &config, Label::FakeNewsSpreader)?;
//! println!("accuracy {:.3}", report.metrics.accuracy);
//! # Ok::<(), spreader::Error>(())
//! ```

pub mod analysis;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod model;
pub mod persist;
pub mod preprocess;
pub mod synthetic;
pub mod vectorize;

pub use corpus::{AuthorDocument, Corpus, Label, Language, SplitSpec};
pub use error::{Error, ErrorCategory, Result};
pub use evaluation::{EvalReport, PipelineConfig};
pub use model::{LinearModel, ModelKind, TrainConfig};
pub use preprocess::TokenStream;
pub use vectorize::{SparseVector, VectorizerConfig, Vocabulary};
