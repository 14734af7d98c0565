//! Character-level BiLSTM split-point tagger.
//!
//! Character embeddings feed one or two bidirectional LSTM layers; a dense
//! sigmoid output layer makes a binary prediction for every character,
//! marking whether it begins the head of a compound. Everything is plain
//! f64: the forward pass, backpropagation through time and the Adam
//! optimizer are written out directly so that training is deterministic for
//! a fixed seed and gradients can be validated against finite differences.

mod adam;
mod encode;
mod io;
mod model;
mod net;
mod params;
mod train;
mod vocab;

pub use adam::{adam_step, AdamState, ADAM_BETA1, ADAM_BETA2, ADAM_EPSILON};
pub use encode::{encode, EncodedWord};
pub use io::{
    load_model, load_model_file, save_model, save_model_file, ModelIoError, MODEL_FORMAT_VERSION,
    MODEL_MAGIC,
};
pub use model::{decide_split, TrainedModel, SPLIT_THRESHOLD};
pub use net::{backward, forward, loss, lstm_cell, numerical_gradients, BatchTrace, WordTrace};
pub use params::{DirectionWeights, LayerWeights, Matrix, ModelParameters};
pub use train::{train, train_with_validator, EpochRecord, Trainer, TrainingHistory};
pub use vocab::CharVocab;

/// Hyperparameters of the tagger. The defaults are the reference training
/// configuration: 128-dimensional embeddings, 128 hidden units per
/// direction, 40-character padded input, Adam at a constant 0.001, up to
/// 100 epochs with patience 20. The default batch size of 32 keeps the
/// optimizer stepping often enough to converge on desk-scale corpora within
/// the epoch budget.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub embed_dim: usize,
    pub hidden_dim: usize,
    pub num_layers: usize,
    pub max_len: usize,
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            embed_dim: 128,
            hidden_dim: 128,
            num_layers: 1,
            max_len: 40,
            learning_rate: 0.001,
            max_epochs: 100,
            patience: 20,
            batch_size: 32,
            seed: 0,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), NeuralError> {
        if self.embed_dim == 0 || self.hidden_dim == 0 || self.max_len == 0 {
            return Err(NeuralError::Config(
                "embed_dim, hidden_dim and max_len must be at least 1".into(),
            ));
        }
        if self.num_layers == 0 {
            return Err(NeuralError::Config("num_layers must be at least 1".into()));
        }
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 {
            return Err(NeuralError::Config("learning_rate must be positive".into()));
        }
        if self.batch_size == 0 {
            return Err(NeuralError::Config("batch_size must be at least 1".into()));
        }
        if self.max_epochs == 0 || self.patience == 0 || self.patience > self.max_epochs {
            return Err(NeuralError::Config(
                "need 1 <= patience <= max_epochs".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum NeuralError {
    #[error("`{form}` has {len} characters, over the maximum input length {max_len}")]
    OverLength {
        form: String,
        len: usize,
        max_len: usize,
    },
    #[error("empty form")]
    EmptyForm,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("vocabulary index {index} out of range for {size} embedding rows")]
    VocabIndex { index: usize, size: usize },
    #[error("non-finite gradient in `{0}`; aborting the run")]
    NonFiniteGradient(String),
    #[error("no usable training words (empty set or all words over-length)")]
    EmptyTrainSet,
    #[error("no usable validation words (empty set or all words over-length)")]
    EmptyValSet,
    #[error("invalid configuration: {0}")]
    Config(String),
}
