//! Evaluation: overall accuracy, base/compound breakdown,
//! precision/recall/F-score, and the learning-curve experiment.
//!
//! A compound counts as correct when the predicted position equals the gold
//! top-level split exactly; a base word counts as correct when no split is
//! predicted. Precision divides correct splits by everything the model
//! split (base words wrongly split included); recall divides by the number
//! of gold compounds.

use std::collections::HashMap;

use crate::corpus::{frequency_subset, AnnotatedWord, CorpusError};
use crate::neural::{self, ModelConfig, NeuralError, TrainingHistory};
use crate::tree::ConstituentTree;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("{predictions} predictions for {gold} gold words")]
    LengthMismatch { predictions: usize, gold: usize },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Neural(#[from] NeuralError),
}

/// Counts and rates over one evaluation run. Rates that would divide by
/// zero are reported as absent.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub n_words: usize,
    pub n_base: usize,
    pub n_compound: usize,
    pub correct_base: usize,
    pub correct_compound: usize,
    pub n_predicted_splits: usize,
    pub n_correct_splits: usize,
    pub accuracy: f64,
    pub base_accuracy: Option<f64>,
    pub compound_accuracy: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f_score: Option<f64>,
}

impl EvalReport {
    /// Recompute every rate from the raw counts; used both by `evaluate`
    /// and by consistency checks on serialized reports.
    pub fn from_counts(
        n_base: usize,
        n_compound: usize,
        correct_base: usize,
        correct_compound: usize,
        n_predicted_splits: usize,
    ) -> Self {
        let n_words = n_base + n_compound;
        let n_correct_splits = correct_compound;
        let ratio = |num: usize, den: usize| -> Option<f64> {
            if den == 0 {
                None
            } else {
                Some(num as f64 / den as f64)
            }
        };
        let precision = ratio(n_correct_splits, n_predicted_splits);
        let recall = ratio(n_correct_splits, n_compound);
        let f_score = match (precision, recall) {
            (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
            _ => None,
        };
        Self {
            n_words,
            n_base,
            n_compound,
            correct_base,
            correct_compound,
            n_predicted_splits,
            n_correct_splits,
            accuracy: if n_words == 0 {
                0.0
            } else {
                (correct_base + correct_compound) as f64 / n_words as f64
            },
            base_accuracy: ratio(correct_base, n_base),
            compound_accuracy: ratio(correct_compound, n_compound),
            precision,
            recall,
            f_score,
        }
    }
}

/// Harmonic mean of precision and recall.
pub fn f_score(precision: f64, recall: f64) -> f64 {
    2.0 * precision * recall / (precision + recall)
}

/// Format a rate as a percentage with two decimals, e.g. `93.30%`.
pub fn percent(rate: f64) -> String {
    format!("{:.2}%", rate * 100.0)
}

/// Score binary split predictions against gold words.
pub fn evaluate(
    predictions: &[Option<usize>],
    gold: &[AnnotatedWord],
) -> Result<EvalReport, EvalError> {
    if predictions.len() != gold.len() {
        return Err(EvalError::LengthMismatch {
            predictions: predictions.len(),
            gold: gold.len(),
        });
    }
    let mut n_base = 0;
    let mut n_compound = 0;
    let mut correct_base = 0;
    let mut correct_compound = 0;
    let mut n_predicted_splits = 0;
    for (pred, word) in predictions.iter().zip(gold) {
        if pred.is_some() {
            n_predicted_splits += 1;
        }
        let gold_split = word.top_level_split().split_index();
        match gold_split {
            None => {
                n_base += 1;
                if pred.is_none() {
                    correct_base += 1;
                }
            }
            Some(_) => {
                n_compound += 1;
                if *pred == gold_split {
                    correct_compound += 1;
                }
            }
        }
    }
    Ok(EvalReport::from_counts(
        n_base,
        n_compound,
        correct_base,
        correct_compound,
        n_predicted_splits,
    ))
}

/// Fraction of predicted trees that match the gold structure exactly; the
/// supplementary whole-tree metric alongside the binary-split scores.
pub fn tree_exact_match(
    predictions: &[ConstituentTree],
    gold: &[AnnotatedWord],
) -> Result<f64, EvalError> {
    if predictions.len() != gold.len() {
        return Err(EvalError::LengthMismatch {
            predictions: predictions.len(),
            gold: gold.len(),
        });
    }
    if gold.is_empty() {
        return Ok(0.0);
    }
    let hits = predictions
        .iter()
        .zip(gold)
        .filter(|(tree, word)| *tree == word.structure())
        .count();
    Ok(hits as f64 / gold.len() as f64)
}

/// One point of the learning curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub size: usize,
    pub test_accuracy: f64,
    pub val_accuracy: f64,
    pub epochs_run: usize,
}

/// Train on nested frequency-ranked subsets of the training set and record
/// test accuracy per subset size. Sizes must be ascending; every run uses
/// the same configuration and seed.
pub fn learning_curve(
    config: &ModelConfig,
    full_train: &[AnnotatedWord],
    val: &[AnnotatedWord],
    test: &[AnnotatedWord],
    freqs: &HashMap<String, u64>,
    sizes: &[usize],
) -> Result<Vec<CurvePoint>, EvalError> {
    let mut points = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let subset = frequency_subset(full_train, freqs, size)?;
        let (model, history) = neural::train(config.clone(), &subset, val)?;
        let report = evaluate_model(&model, test)?;
        points.push(CurvePoint {
            size,
            test_accuracy: report.accuracy,
            val_accuracy: history.best_val_accuracy,
            epochs_run: history.epochs.len(),
        });
    }
    Ok(points)
}

/// Predict with a trained tagger and score against gold. Words over the
/// model's input length are predicted as unsplit.
pub fn evaluate_model(
    model: &neural::TrainedModel,
    gold: &[AnnotatedWord],
) -> Result<EvalReport, EvalError> {
    let predictions = model_predictions(model, gold);
    evaluate(&predictions, gold)
}

/// Binary split predictions for a list of gold words; over-length words
/// fall back to "no split".
pub fn model_predictions(
    model: &neural::TrainedModel,
    gold: &[AnnotatedWord],
) -> Vec<Option<usize>> {
    let per_chunk = crate::parallel::chunked_map(gold, |chunk, _| {
        chunk
            .iter()
            .map(|w| model.predict_split(w.form()).unwrap_or(None))
            .collect::<Vec<_>>()
    });
    per_chunk.into_iter().flatten().collect()
}

/// Summary of one epoch-by-epoch training run plus its evaluation, for
/// history files.
pub fn history_lines(history: &TrainingHistory) -> Vec<String> {
    let mut lines = vec!["epoch\ttrain_loss\tval_accuracy".to_string()];
    for e in &history.epochs {
        lines.push(format!("{}\t{}\t{}", e.epoch, e.train_loss, e.val_accuracy));
    }
    lines
}

/// Machine-readable learning-curve lines: `size<TAB>test_accuracy` rows
/// under a header.
pub fn curve_lines(points: &[CurvePoint], seed: u64) -> Vec<String> {
    let mut lines = vec![format!("# seed: {seed}"), "size\ttest_accuracy".to_string()];
    for p in points {
        lines.push(format!("{}\t{}", p.size, p.test_accuracy));
    }
    lines
}

/// The key/value report lines of the machine-readable report file. Absent
/// rates are omitted.
pub fn report_lines(report: &EvalReport) -> Vec<String> {
    let mut lines = vec![
        format!("n_words\t{}", report.n_words),
        format!("n_base\t{}", report.n_base),
        format!("n_compound\t{}", report.n_compound),
        format!("correct_base\t{}", report.correct_base),
        format!("correct_compound\t{}", report.correct_compound),
        format!("n_predicted_splits\t{}", report.n_predicted_splits),
        format!("n_correct_splits\t{}", report.n_correct_splits),
        format!("accuracy\t{}", report.accuracy),
    ];
    let mut push_opt = |name: &str, v: Option<f64>| {
        if let Some(v) = v {
            lines.push(format!("{name}\t{v}"));
        }
    };
    push_opt("base_accuracy", report.base_accuracy);
    push_opt("compound_accuracy", report.compound_accuracy);
    push_opt("precision", report.precision);
    push_opt("recall", report.recall);
    push_opt("f_score", report.f_score);
    lines
}

/// Human-readable report table.
pub fn report_table(report: &EvalReport) -> String {
    let fmt_opt = |v: Option<f64>| v.map_or("-".to_string(), percent);
    let mut out = String::new();
    out.push_str(&format!(
        "words {} (base {}, compound {})\n",
        report.n_words, report.n_base, report.n_compound
    ));
    out.push_str(&format!("{:<22}{:>10}\n", "metric", "value"));
    out.push_str(&format!(
        "{:<22}{:>10}\n",
        "accuracy",
        percent(report.accuracy)
    ));
    out.push_str(&format!(
        "{:<22}{:>10}\n",
        "base accuracy",
        fmt_opt(report.base_accuracy)
    ));
    out.push_str(&format!(
        "{:<22}{:>10}\n",
        "compound accuracy",
        fmt_opt(report.compound_accuracy)
    ));
    out.push_str(&format!(
        "{:<22}{:>10}\n",
        "precision",
        fmt_opt(report.precision)
    ));
    out.push_str(&format!("{:<22}{:>10}\n", "recall", fmt_opt(report.recall)));
    out.push_str(&format!(
        "{:<22}{:>10}\n",
        "f-score",
        fmt_opt(report.f_score)
    ));
    out
}
