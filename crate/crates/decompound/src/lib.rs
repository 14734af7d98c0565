//! Compound-word splitting toolkit.
//!
//! Productive compounding makes out-of-vocabulary words common in languages
//! like Icelandic and German. This crate provides two ways to split such
//! words into their constituent parts, plus everything needed to train and
//! evaluate them:
//!
//! - [`neural`] — a character-level BiLSTM tagger that predicts, for every
//!   character, whether it begins the head of a binary compound. Forward
//!   pass, backpropagation through time and Adam are implemented directly
//!   in f64 so training is deterministic per seed.
//! - [`baseline`] — a statistical splitter that segments words into known
//!   constituent parts and scores candidate structures with pair
//!   probabilities and a modifier/head back-off.
//! - [`splitter`] — recursive application of any binary splitter to derive
//!   the full binary constituent tree of a word.
//! - [`corpus`] — parsing, normalization, deduplication and grouped
//!   stratified partitioning of annotated corpora.
//! - [`eval`] — accuracy, base/compound breakdown, precision/recall/F-score
//!   and the training-set-size learning-curve experiment.
//! - [`synth`] — a deterministic synthetic corpus generator for desk-scale
//!   experiments and tests.

pub mod baseline;
pub mod corpus;
pub mod eval;
pub mod neural;
pub mod parallel;
pub mod rng;
pub mod splitter;
pub mod synth;
pub mod tree;

pub use corpus::{AnnotatedWord, CorpusError, DatasetPartition, SplitVector};
pub use tree::ConstituentTree;
