//! Browser demo bindings.
//!
//! A [`Demo`] owns a generated corpus, the lexicon baseline and an
//! incrementally trained tagger. The page drives three interactions:
//! regenerate the corpus, step training epoch by epoch (watching loss and
//! validation accuracy), and analyze a typed word — per-character split
//! probabilities plus the constituent trees derived by both engines.
//!
//! All methods return JSON strings; the page is plain JavaScript.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use decompound::baseline::{best_structure, LexiconSplitter, PartLexicon};
use decompound::corpus::{partition, DatasetPartition};
use decompound::eval::{evaluate, evaluate_model};
use decompound::neural::{ModelConfig, Trainer};
use decompound::splitter::{derive_tree, BinarySplitter, DEFAULT_MAX_DEPTH};
use decompound::synth::{generate, SynthConfig};

#[wasm_bindgen(start)]
pub fn start() {
    console_error_panic_hook::set_once();
}

fn demo_config(seed: u64) -> ModelConfig {
    // Small enough for sub-second epochs in the browser, big enough to
    // reach high accuracy on the synthetic language.
    ModelConfig {
        embed_dim: 16,
        hidden_dim: 24,
        num_layers: 1,
        max_len: 40,
        learning_rate: 0.003,
        max_epochs: 60,
        patience: 15,
        batch_size: 32,
        seed,
    }
}

#[derive(Serialize)]
struct Summary {
    n_words: usize,
    n_train: usize,
    n_val: usize,
    n_test: usize,
    n_base: usize,
    n_compound: usize,
    lexicon_modifiers: usize,
    lexicon_heads: usize,
    lexicon_pairs: usize,
    max_epochs: usize,
    sample: Vec<SampleWord>,
}

#[derive(Serialize)]
struct SampleWord {
    form: String,
    tree: String,
}

#[derive(Serialize)]
struct EpochOut {
    epoch: usize,
    train_loss: f64,
    val_accuracy: f64,
    best_epoch: usize,
    done: bool,
}

#[derive(Serialize)]
struct EngineAnalysis {
    split: Option<usize>,
    tree: String,
    score: Option<f64>,
}

#[derive(Serialize)]
struct Analysis {
    form: String,
    chars: Vec<String>,
    probs: Vec<f64>,
    neural: EngineAnalysis,
    baseline: EngineAnalysis,
    gold: Option<EngineAnalysis>,
    error: Option<String>,
}

#[derive(Serialize)]
struct TestAccuracy {
    neural: f64,
    baseline: f64,
    n_test: usize,
}

/// One interactive session: corpus, baseline lexicon and a trainer.
#[wasm_bindgen]
pub struct Demo {
    parts: DatasetPartition,
    lexicon: PartLexicon,
    trainer: Trainer,
    config: ModelConfig,
    done: bool,
}

#[wasm_bindgen]
impl Demo {
    /// Generate a corpus and set up training. `n_words` is clamped to
    /// 400..=4000: small enough for snappy browser epochs, large enough
    /// that every class has the lemma groups stratification needs.
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u32, n_words: usize) -> Result<Demo, JsError> {
        let n_words = n_words.clamp(400, 4000);
        let corpus = generate(&SynthConfig {
            n_words,
            seed: seed as u64,
            ..SynthConfig::default()
        });
        let parts = partition(&corpus.words, seed as u64 ^ 0x5eed)
            .map_err(|e| JsError::new(&e.to_string()))?;
        let lexicon = PartLexicon::build(&parts.train);
        let config = demo_config(seed as u64);
        let trainer = Trainer::new(config.clone(), &parts.train, &parts.validation)
            .map_err(|e| JsError::new(&e.to_string()))?;
        Ok(Demo {
            parts,
            lexicon,
            trainer,
            config,
            done: false,
        })
    }

    /// Corpus and lexicon statistics plus a few sample annotations.
    pub fn summary(&self) -> String {
        let all: Vec<&decompound::AnnotatedWord> = self
            .parts
            .sets()
            .iter()
            .flat_map(|(_, set)| set.iter())
            .collect();
        let n_base = all.iter().filter(|w| !w.is_compound()).count();
        let sample = self
            .parts
            .train
            .iter()
            .filter(|w| w.is_compound())
            .take(6)
            .map(|w| SampleWord {
                form: w.form().to_string(),
                tree: w.structure().render(),
            })
            .collect();
        let s = Summary {
            n_words: all.len(),
            n_train: self.parts.train.len(),
            n_val: self.parts.validation.len(),
            n_test: self.parts.test.len(),
            n_base,
            n_compound: all.len() - n_base,
            lexicon_modifiers: self.lexicon.modifier_entries(),
            lexicon_heads: self.lexicon.head_entries(),
            lexicon_pairs: self.lexicon.pair_entries(),
            max_epochs: self.config.max_epochs,
            sample,
        };
        serde_json::to_string(&s).expect("serializable")
    }

    /// Run one training epoch; `done` turns true at the epoch cap or when
    /// early stopping triggers.
    pub fn train_epoch(&mut self) -> Result<String, JsError> {
        let record = self
            .trainer
            .step()
            .map_err(|e| JsError::new(&e.to_string()))?;
        let out = match record {
            Some(r) => {
                self.done = self.trainer.is_done();
                EpochOut {
                    epoch: r.epoch,
                    train_loss: r.train_loss,
                    val_accuracy: r.val_accuracy,
                    best_epoch: self.trainer.best_epoch(),
                    done: self.done,
                }
            }
            None => {
                self.done = true;
                EpochOut {
                    epoch: self.trainer.history().len(),
                    train_loss: f64::NAN,
                    val_accuracy: f64::NAN,
                    best_epoch: self.trainer.best_epoch(),
                    done: true,
                }
            }
        };
        Ok(serde_json::to_string(&out).expect("serializable"))
    }

    /// Analyze one word with the current model and the baseline.
    pub fn analyze(&self, word: &str) -> String {
        let form = decompound::corpus::normalize_line(word);
        let analysis = self.analyze_form(&form);
        serde_json::to_string(&analysis).expect("serializable")
    }

    /// Neural vs baseline accuracy on the held-out test split, using the
    /// current parameters.
    pub fn test_accuracy(&self) -> Result<String, JsError> {
        let model = self.trainer.snapshot();
        let neural =
            evaluate_model(&model, &self.parts.test).map_err(|e| JsError::new(&e.to_string()))?;
        let splitter = LexiconSplitter::new(&self.lexicon);
        let preds: Vec<Option<usize>> = self
            .parts
            .test
            .iter()
            .map(|w| splitter.split_point(w.form()))
            .collect();
        let baseline =
            evaluate(&preds, &self.parts.test).map_err(|e| JsError::new(&e.to_string()))?;
        let out = TestAccuracy {
            neural: neural.accuracy,
            baseline: baseline.accuracy,
            n_test: self.parts.test.len(),
        };
        Ok(serde_json::to_string(&out).expect("serializable"))
    }
}

impl Demo {
    fn analyze_form(&self, form: &str) -> Analysis {
        let chars: Vec<String> = form.chars().map(|c| c.to_string()).collect();
        let empty = EngineAnalysis {
            split: None,
            tree: form.to_string(),
            score: None,
        };
        if form.is_empty() || chars.len() > self.config.max_len {
            return Analysis {
                form: form.to_string(),
                chars,
                probs: Vec::new(),
                neural: EngineAnalysis {
                    split: None,
                    tree: form.to_string(),
                    score: None,
                },
                baseline: empty,
                gold: None,
                error: Some(if form.is_empty() {
                    "type a word".to_string()
                } else {
                    format!("over the {}-character input limit", self.config.max_len)
                }),
            };
        }

        let model = self.trainer.snapshot();
        let probs = model.split_probabilities(form).unwrap_or_default();
        let neural = EngineAnalysis {
            split: model.predict_split(form).unwrap_or(None),
            tree: derive_tree(&model, form, DEFAULT_MAX_DEPTH)
                .map(|t| t.render())
                .unwrap_or_else(|_| form.to_string()),
            score: None,
        };
        let splitter = LexiconSplitter::new(&self.lexicon);
        let baseline = EngineAnalysis {
            split: splitter.split_point(form),
            tree: derive_tree(&splitter, form, DEFAULT_MAX_DEPTH)
                .map(|t| t.render())
                .unwrap_or_else(|_| form.to_string()),
            score: best_structure(form, &self.lexicon).map(|s| s.score),
        };
        let gold = self
            .parts
            .sets()
            .iter()
            .flat_map(|(_, set)| set.iter())
            .find(|w| w.form() == form)
            .map(|w| EngineAnalysis {
                split: w.top_level_split().split_index(),
                tree: w.structure().render(),
                score: None,
            });
        Analysis {
            form: form.to_string(),
            chars,
            probs,
            neural,
            baseline,
            gold,
            error: None,
        }
    }
}
