//! Fixed-width input encoding with padding.

use crate::corpus::{AnnotatedWord, SplitVector};

use super::vocab::{CharVocab, PAD_INDEX};
use super::{ModelConfig, NeuralError};

/// A word mapped onto `max_len` vocabulary indices. The mask is a prefix of
/// `true` covering the real characters; every masked-out slot holds PAD.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedWord {
    pub indices: Vec<usize>,
    pub mask: Vec<bool>,
    pub target: SplitVector,
}

impl EncodedWord {
    /// Number of real characters.
    pub fn real_len(&self) -> usize {
        self.target.length()
    }

    /// The real (unpadded) index prefix.
    pub fn real_indices(&self) -> &[usize] {
        &self.indices[..self.real_len()]
    }
}

/// Map a word onto vocabulary indices, padding to `config.max_len`; the
/// target is the word's top-level split.
pub fn encode(
    word: &AnnotatedWord,
    vocab: &CharVocab,
    config: &ModelConfig,
) -> Result<EncodedWord, NeuralError> {
    encode_form(word.form(), Some(word.top_level_split()), vocab, config)
}

/// Encode a bare form (inference path); the target is all zeros.
pub(crate) fn encode_form(
    form: &str,
    target: Option<SplitVector>,
    vocab: &CharVocab,
    config: &ModelConfig,
) -> Result<EncodedWord, NeuralError> {
    let chars: Vec<char> = form.chars().collect();
    if chars.is_empty() {
        return Err(NeuralError::EmptyForm);
    }
    if chars.len() > config.max_len {
        return Err(NeuralError::OverLength {
            form: form.to_string(),
            len: chars.len(),
            max_len: config.max_len,
        });
    }
    let mut indices = vec![PAD_INDEX; config.max_len];
    let mut mask = vec![false; config.max_len];
    for (i, &c) in chars.iter().enumerate() {
        indices[i] = vocab.index_of(c);
        mask[i] = true;
    }
    Ok(EncodedWord {
        indices,
        mask,
        target: target.unwrap_or_else(|| SplitVector::base(chars.len())),
    })
}
