//! Recursive derivation of full constituent trees from any binary splitter.
//!
//! Both the neural tagger and the statistical baseline decide one binary
//! split at a time. The full structure of a word is obtained by applying
//! the splitter to the word, then to each half, until no further splits are
//! made.

use crate::tree::ConstituentTree;

/// Default recursion limit for [`derive_tree`]. Real compounds rarely exceed
/// a handful of parts; the guard keeps a misbehaving splitter from recursing
/// without bound.
pub const DEFAULT_MAX_DEPTH: usize = 16;

/// Anything that can propose a binary split for a lowercase word: the index
/// of the first character of the head, with `1 <= p <= len - 1`, or no split.
pub trait BinarySplitter {
    fn split_point(&self, form: &str) -> Option<usize>;
}

impl<F> BinarySplitter for F
where
    F: Fn(&str) -> Option<usize>,
{
    fn split_point(&self, form: &str) -> Option<usize> {
        self(form)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SplitError {
    #[error("splitter returned position {position} for `{form}` ({len} characters); valid positions are 1..={}", .len - 1)]
    PositionOutOfRange {
        form: String,
        position: usize,
        len: usize,
    },
    #[error("cannot derive a tree for an empty form")]
    EmptyForm,
}

/// Derive the full binary constituent tree of `form` by recursive
/// application of `splitter`, stopping at single characters, at splitter
/// refusals, and at `max_depth` levels of nesting.
pub fn derive_tree<S: BinarySplitter + ?Sized>(
    splitter: &S,
    form: &str,
    max_depth: usize,
) -> Result<ConstituentTree, SplitError> {
    if form.is_empty() {
        return Err(SplitError::EmptyForm);
    }
    let chars: Vec<char> = form.chars().collect();
    derive_chars(splitter, &chars, max_depth)
}

fn derive_chars<S: BinarySplitter + ?Sized>(
    splitter: &S,
    chars: &[char],
    depth: usize,
) -> Result<ConstituentTree, SplitError> {
    let leaf = || ConstituentTree::leaf(chars.iter().collect::<String>());
    if chars.len() <= 1 || depth == 0 {
        return Ok(leaf());
    }
    let form: String = chars.iter().collect();
    match splitter.split_point(&form) {
        None => Ok(leaf()),
        Some(p) => {
            if p == 0 || p >= chars.len() {
                return Err(SplitError::PositionOutOfRange {
                    form,
                    position: p,
                    len: chars.len(),
                });
            }
            let left = derive_chars(splitter, &chars[..p], depth - 1)?;
            let right = derive_chars(splitter, &chars[p..], depth - 1)?;
            Ok(ConstituentTree::node(left, right))
        }
    }
}
