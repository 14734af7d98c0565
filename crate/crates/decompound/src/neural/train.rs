//! Mini-batch training with validation-accuracy early stopping.
//!
//! Each epoch shuffles the training words with a seeded generator, steps
//! Adam once per mini-batch, then scores the model on the validation set
//! with the same decision rule used at inference. Training stops after
//! `max_epochs` epochs or once validation accuracy has not improved for
//! `patience` epochs, and the parameter snapshot from the best epoch is the
//! one returned. Runs are deterministic for a fixed configuration and seed.

use crate::corpus::AnnotatedWord;
use crate::parallel;
use crate::rng::SplitMix64;

use super::adam::{adam_step, AdamState};
use super::encode::{encode, EncodedWord};
use super::model::{decide_split, TrainedModel};
use super::net::{backward_word, bce_sum, forward_word};
use super::params::ModelParameters;
use super::vocab::CharVocab;
use super::{ModelConfig, NeuralError};

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingHistory {
    pub epochs: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub best_val_accuracy: f64,
    pub stopped_early: bool,
    /// Over-length words dropped from the training and validation sets.
    pub skipped_train: usize,
    pub skipped_val: usize,
}

struct BestSnapshot {
    accuracy: f64,
    epoch: usize,
    params: ModelParameters,
}

/// Incremental trainer; [`step`](Trainer::step) runs one epoch so callers
/// can drive training interactively.
pub struct Trainer {
    config: ModelConfig,
    vocab: CharVocab,
    params: ModelParameters,
    adam: AdamState,
    shuffle_rng: SplitMix64,
    train_set: Vec<EncodedWord>,
    val_set: Vec<EncodedWord>,
    epoch: usize,
    best: Option<BestSnapshot>,
    history: Vec<EpochRecord>,
    done: bool,
    skipped_train: usize,
    skipped_val: usize,
}

fn encode_skipping(
    words: &[&AnnotatedWord],
    vocab: &CharVocab,
    config: &ModelConfig,
) -> (Vec<EncodedWord>, usize) {
    let mut encoded = Vec::with_capacity(words.len());
    let mut skipped = 0;
    for word in words {
        match encode(word, vocab, config) {
            Ok(e) => encoded.push(e),
            Err(NeuralError::OverLength { .. }) => skipped += 1,
            Err(_) => unreachable!("encode only fails on length"),
        }
    }
    (encoded, skipped)
}

impl Trainer {
    pub fn new(
        config: ModelConfig,
        train_words: &[AnnotatedWord],
        val_words: &[AnnotatedWord],
    ) -> Result<Self, NeuralError> {
        config.validate()?;
        // Canonicalize word order so a run depends only on the word set,
        // the configuration and the seed, not on how the caller sorted the
        // corpus.
        let mut train_words: Vec<&AnnotatedWord> = train_words.iter().collect();
        train_words.sort_by_key(|w| w.form());
        let mut val_words: Vec<&AnnotatedWord> = val_words.iter().collect();
        val_words.sort_by_key(|w| w.form());
        let vocab = CharVocab::from_forms(train_words.iter().map(|w| w.form()));
        let (train_set, skipped_train) = encode_skipping(&train_words, &vocab, &config);
        let (val_set, skipped_val) = encode_skipping(&val_words, &vocab, &config);
        if train_set.is_empty() {
            return Err(NeuralError::EmptyTrainSet);
        }
        if val_set.is_empty() {
            return Err(NeuralError::EmptyValSet);
        }
        let mut root = SplitMix64::new(config.seed);
        let mut init_rng = root.fork();
        let shuffle_rng = root.fork();
        let params = ModelParameters::init(&config, vocab.size(), &mut init_rng);
        let adam = AdamState::new(&params);
        Ok(Self {
            config,
            vocab,
            params,
            adam,
            shuffle_rng,
            train_set,
            val_set,
            epoch: 0,
            best: None,
            history: Vec::new(),
            done: false,
            skipped_train,
            skipped_val,
        })
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn vocab(&self) -> &CharVocab {
        &self.vocab
    }

    pub fn history(&self) -> &[EpochRecord] {
        &self.history
    }

    /// Epoch of the best validation accuracy so far (0 before any epoch).
    pub fn best_epoch(&self) -> usize {
        self.best.as_ref().map_or(0, |b| b.epoch)
    }

    /// The current parameters as an immutable model, e.g. for inspecting
    /// predictions mid-training. The best snapshot is what
    /// [`finish`](Self::finish) returns.
    pub fn snapshot(&self) -> TrainedModel {
        TrainedModel {
            config: self.config.clone(),
            vocab: self.vocab.clone(),
            params: self.params.clone(),
        }
    }

    /// Word-level accuracy of the current parameters on the validation set,
    /// under the inference decision rule.
    pub fn validation_accuracy(&self) -> Result<f64, NeuralError> {
        let hits: usize = parallel::chunked_map(&self.val_set, |chunk, _| {
            let mut hits = 0usize;
            for encoded in chunk {
                let trace = forward_word(&self.params, encoded.real_indices())
                    .expect("trained shapes are consistent");
                if decide_split(trace.probs()) == encoded.target.split_index() {
                    hits += 1;
                }
            }
            hits
        })
        .into_iter()
        .sum();
        Ok(hits as f64 / self.val_set.len() as f64)
    }

    /// One pass of mini-batch updates over the shuffled training set;
    /// returns the epoch's mean training loss.
    fn run_epoch(&mut self) -> Result<f64, NeuralError> {
        self.epoch += 1;
        let mut order: Vec<usize> = (0..self.train_set.len()).collect();
        self.shuffle_rng.shuffle(&mut order);

        let mut epoch_bce = 0.0;
        let mut epoch_positions = 0usize;
        for batch_indices in order.chunks(self.config.batch_size) {
            let total_positions: usize = batch_indices
                .iter()
                .map(|&i| self.train_set[i].real_len())
                .sum();
            if total_positions == 0 {
                continue;
            }
            let scale = 1.0 / total_positions as f64;
            let params = &self.params;
            let train_set = &self.train_set;
            let partials = parallel::chunked_map(batch_indices, |chunk, _| {
                let mut grads = params.zeros_like();
                let mut bce = 0.0;
                for &i in chunk {
                    let encoded = &train_set[i];
                    let trace = forward_word(params, encoded.real_indices())
                        .expect("training shapes are consistent");
                    bce += bce_sum(trace.probs(), &encoded.target);
                    backward_word(params, &trace, &encoded.target, scale, &mut grads);
                }
                (grads, bce)
            });
            let mut iter = partials.into_iter();
            let (mut grads, mut batch_bce) = iter.next().expect("at least one chunk");
            for (g, b) in iter {
                grads.accumulate(&g);
                batch_bce += b;
            }
            epoch_bce += batch_bce;
            epoch_positions += total_positions;
            adam_step(
                &mut self.params,
                &grads,
                &mut self.adam,
                self.config.learning_rate,
            )?;
        }
        Ok(if epoch_positions == 0 {
            0.0
        } else {
            epoch_bce / epoch_positions as f64
        })
    }

    /// History, best-snapshot and early-stopping bookkeeping for a finished
    /// epoch.
    fn record(&mut self, train_loss: f64, val_accuracy: f64) -> EpochRecord {
        let record = EpochRecord {
            epoch: self.epoch,
            train_loss,
            val_accuracy,
        };
        self.history.push(record.clone());
        let improved = self.best.as_ref().is_none_or(|b| val_accuracy > b.accuracy);
        if improved {
            self.best = Some(BestSnapshot {
                accuracy: val_accuracy,
                epoch: self.epoch,
                params: self.params.clone(),
            });
        }
        let best_epoch = self.best.as_ref().map_or(self.epoch, |b| b.epoch);
        if self.epoch - best_epoch >= self.config.patience || self.epoch >= self.config.max_epochs {
            self.done = true;
        }
        record
    }

    /// Run one epoch, scoring it with `val_metric` instead of the standard
    /// validation accuracy. Returns `None` once training has finished.
    pub fn step_with(
        &mut self,
        val_metric: impl FnOnce(&ModelParameters, &CharVocab, &ModelConfig) -> f64,
    ) -> Result<Option<EpochRecord>, NeuralError> {
        if self.done {
            return Ok(None);
        }
        let train_loss = self.run_epoch()?;
        let val_accuracy = val_metric(&self.params, &self.vocab, &self.config);
        Ok(Some(self.record(train_loss, val_accuracy)))
    }

    /// Run one epoch with the standard validation metric.
    pub fn step(&mut self) -> Result<Option<EpochRecord>, NeuralError> {
        if self.done {
            return Ok(None);
        }
        let train_loss = self.run_epoch()?;
        let val_accuracy = self.validation_accuracy()?;
        Ok(Some(self.record(train_loss, val_accuracy)))
    }

    /// Best snapshot and history; consumes the trainer.
    pub fn finish(self) -> (TrainedModel, TrainingHistory) {
        let (best_epoch, best_val_accuracy, params) = match self.best {
            Some(b) => (b.epoch, b.accuracy, b.params),
            None => (0, f64::NAN, self.params),
        };
        let stopped_early = self.epoch < self.config.max_epochs;
        (
            TrainedModel {
                config: self.config,
                vocab: self.vocab,
                params,
            },
            TrainingHistory {
                epochs: self.history,
                best_epoch,
                best_val_accuracy,
                stopped_early,
                skipped_train: self.skipped_train,
                skipped_val: self.skipped_val,
            },
        )
    }
}

/// Train to completion with the standard validation metric.
pub fn train(
    config: ModelConfig,
    train_words: &[AnnotatedWord],
    val_words: &[AnnotatedWord],
) -> Result<(TrainedModel, TrainingHistory), NeuralError> {
    let mut trainer = Trainer::new(config, train_words, val_words)?;
    while trainer.step()?.is_some() {}
    Ok(trainer.finish())
}

/// Train to completion with a caller-supplied validation metric; used to
/// exercise the early-stopping rule with scripted accuracy sequences.
pub fn train_with_validator(
    config: ModelConfig,
    train_words: &[AnnotatedWord],
    val_words: &[AnnotatedWord],
    mut val_metric: impl FnMut(&ModelParameters, &CharVocab, usize) -> f64,
) -> Result<(TrainedModel, TrainingHistory), NeuralError> {
    let mut trainer = Trainer::new(config, train_words, val_words)?;
    loop {
        let epoch = trainer.history().len() + 1;
        let stepped = trainer.step_with(|p, v, _| val_metric(p, v, epoch))?;
        if stepped.is_none() {
            break;
        }
    }
    Ok(trainer.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::ConstituentTree;

    fn word(form: &str, split: Option<usize>) -> AnnotatedWord {
        let chars: Vec<char> = form.chars().collect();
        let structure = match split {
            None => ConstituentTree::leaf(form),
            Some(p) => ConstituentTree::node(
                ConstituentTree::leaf(chars[..p].iter().collect::<String>()),
                ConstituentTree::leaf(chars[p..].iter().collect::<String>()),
            ),
        };
        AnnotatedWord::new(form, format!("G_{form}"), structure).unwrap()
    }

    /// A 52-word corpus of compounds over a tiny closed part inventory;
    /// trivially memorizable.
    fn mini_corpus() -> Vec<AnnotatedWord> {
        let modifiers = ["ba", "dol", "fi", "gro", "ka", "lum", "nor", "pam"];
        let heads = ["pera", "sil", "tun", "vek", "rok"];
        let mut words = Vec::new();
        for m in modifiers {
            for h in heads {
                words.push(word(&format!("{m}{h}"), Some(m.chars().count())));
            }
        }
        for h in heads {
            words.push(word(h, None));
        }
        for m in modifiers.iter().take(7) {
            words.push(word(m, None));
        }
        assert_eq!(words.len(), 52);
        words
    }

    fn small_config(seed: u64) -> ModelConfig {
        ModelConfig {
            embed_dim: 12,
            hidden_dim: 12,
            num_layers: 1,
            max_len: 20,
            learning_rate: 0.01,
            max_epochs: 60,
            patience: 60,
            batch_size: 16,
            seed,
        }
    }

    #[test]
    fn training_loss_decreases_while_memorizing() {
        let corpus = mini_corpus();
        let mut config = small_config(1);
        config.max_epochs = 50;
        config.patience = 50;
        let (_, history) = train(config, &corpus, &corpus).unwrap();
        let first = history.epochs.first().unwrap().train_loss;
        let last = history.epochs.last().unwrap().train_loss;
        assert!(last < first, "loss {first} -> {last} did not decrease");
    }

    #[test]
    fn same_seed_gives_bitwise_identical_history() {
        let corpus = mini_corpus();
        let mut config = small_config(7);
        config.max_epochs = 5;
        config.patience = 5;
        let (model_a, hist_a) = train(config.clone(), &corpus, &corpus).unwrap();
        let (model_b, hist_b) = train(config, &corpus, &corpus).unwrap();
        assert_eq!(hist_a, hist_b);
        assert_eq!(model_a.params, model_b.params);
    }

    #[test]
    fn training_is_invariant_to_input_order() {
        let corpus = mini_corpus();
        let mut reversed = corpus.clone();
        reversed.reverse();
        let mut config = small_config(9);
        config.max_epochs = 3;
        config.patience = 3;
        let (model_a, hist_a) = train(config.clone(), &corpus, &corpus).unwrap();
        let (model_b, hist_b) = train(config, &reversed, &reversed).unwrap();
        assert_eq!(hist_a, hist_b);
        assert_eq!(model_a.params, model_b.params);
    }

    #[test]
    fn scripted_validation_sequence_stops_at_peak_plus_patience() {
        let corpus = mini_corpus();
        let mut config = small_config(3);
        config.embed_dim = 4;
        config.hidden_dim = 4;
        config.max_epochs = 100;
        config.patience = 20;
        // Peaks at epoch 7, never improves again.
        let script = |epoch: usize| -> f64 {
            if epoch <= 7 {
                epoch as f64 / 10.0
            } else {
                0.1
            }
        };
        let snapshot = std::cell::RefCell::new(None::<ModelParameters>);
        let (model, history) =
            train_with_validator(config, &corpus, &corpus, |params, _, epoch| {
                if epoch == 7 {
                    *snapshot.borrow_mut() = Some(params.clone());
                }
                script(epoch)
            })
            .unwrap();
        assert_eq!(history.epochs.len(), 27);
        assert_eq!(history.best_epoch, 7);
        assert!(history.stopped_early);
        assert_eq!(model.params, snapshot.into_inner().unwrap());
    }

    #[test]
    fn empty_sets_are_rejected() {
        let corpus = mini_corpus();
        assert!(matches!(
            train(small_config(0), &[], &corpus),
            Err(NeuralError::EmptyTrainSet)
        ));
        assert!(matches!(
            train(small_config(0), &corpus, &[]),
            Err(NeuralError::EmptyValSet)
        ));
    }

    #[test]
    fn over_length_words_are_skipped_with_a_count() {
        let mut corpus = mini_corpus();
        let long = "a".repeat(30);
        corpus.push(word(&long, None));
        let mut config = small_config(2);
        config.max_len = 20;
        config.max_epochs = 1;
        config.patience = 1;
        let (_, history) = train(config, &corpus, &corpus).unwrap();
        assert_eq!(history.skipped_train, 1);
        assert_eq!(history.skipped_val, 1);
    }
}
