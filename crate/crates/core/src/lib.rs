//! Aggregate and mixed-order Markov language models.
//!
//! - [`corpus`]: vocabularies, tokenized sentences and sparse n-gram counts.
//! - [`aggregate`]: soft class-based bigrams trained by EM.
//! - [`mixedorder`]: mixtures of skip-k bigrams with word-dependent weights.
//! - [`smoothing`]: held-out interpolation, mixed-order cascades and Katz
//!   backoff.
//! - [`eval`]: sentence probabilities, perplexity and unseen-event rates.
//! - [`cli`]: the command-line front end.
//!
//! Every model implements [`LanguageModel`], so any of them can sit at any
//! level of a cascade or be scored by [`eval`].

pub mod aggregate;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod mixedorder;
pub mod model;
pub mod smoothing;
pub mod sparse;
pub mod synth;
pub mod trace;

pub use aggregate::{train_aggregate, AggregateConfig, AggregateModel, BigramEvents};
pub use corpus::{count_ngrams, NgramCounts, TokenSentence, Vocabulary, WordId, END, START, UNK};
pub use error::{Error, Result};
pub use eval::{evaluate, perplexity, unseen_perplexity, EvalReport, Seen};
pub use mixedorder::{train_mixed, MixedOrderModel};
pub use model::{LanguageModel, MlBigram, Uniform, Unigram};
pub use trace::TrainingTrace;
