//! A trained tagger and its split-decision rule.

use crate::corpus::SplitVector;
use crate::splitter::BinarySplitter;

use super::encode::encode_form;
use super::net::forward_word;
use super::params::ModelParameters;
use super::vocab::CharVocab;
use super::{ModelConfig, NeuralError};

/// Decision threshold on the per-position split probability.
pub const SPLIT_THRESHOLD: f64 = 0.5;

/// Turn per-position probabilities into a split decision: the position with
/// the highest probability among 1..len-1, if it reaches the threshold.
/// Position 0 can never start a head and ties go to the lowest index, so at
/// most one split is ever proposed per application.
pub fn decide_split(probs: &[f64]) -> Option<usize> {
    let len = probs.len();
    if len < 2 {
        return None;
    }
    let mut best: Option<(usize, f64)> = None;
    for (t, &p) in probs.iter().enumerate().take(len).skip(1) {
        match best {
            Some((_, bp)) if p <= bp => {}
            _ => best = Some((t, p)),
        }
    }
    match best {
        Some((t, p)) if p >= SPLIT_THRESHOLD => Some(t),
        _ => None,
    }
}

/// An immutable trained model: configuration, character inventory and
/// parameters. Prediction needs no synchronization, so a shared reference
/// can be used from any number of threads.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub config: ModelConfig,
    pub vocab: CharVocab,
    pub params: ModelParameters,
}

impl TrainedModel {
    /// Per-position split probabilities for a form, one per real character.
    pub fn split_probabilities(&self, form: &str) -> Result<Vec<f64>, NeuralError> {
        let encoded = encode_form(form, None, &self.vocab, &self.config)?;
        let trace = forward_word(&self.params, encoded.real_indices())?;
        Ok(trace.probs().to_vec())
    }

    /// The model's binary split decision for a form, or an error for empty
    /// and over-length input.
    pub fn predict_split(&self, form: &str) -> Result<Option<usize>, NeuralError> {
        Ok(decide_split(&self.split_probabilities(form)?))
    }

    /// Like [`predict_split`](Self::predict_split) but checked against the
    /// split-vector contract.
    pub fn predict_split_vector(&self, form: &str) -> Result<SplitVector, NeuralError> {
        let len = form.chars().count();
        Ok(match self.predict_split(form)? {
            Some(p) => {
                SplitVector::split(len, p).expect("decide_split only returns positions in 1..len")
            }
            None => SplitVector::base(len),
        })
    }
}

impl BinarySplitter for TrainedModel {
    fn split_point(&self, form: &str) -> Option<usize> {
        // Over-length or empty substrings cannot be split; leaving them
        // whole matches the decision rule's range contract.
        self.predict_split(form).unwrap_or(None)
    }
}
