//! Lexicon-based statistical splitter.
//!
//! The splitter learns, from a corpus of gold constituent trees, how often
//! each part occurs as a modifier, how often as a head, and how often each
//! (modifier, head) pair combines. A candidate analysis of a word is any
//! binary tree whose leaves are all known parts; it is scored by the product
//! of its per-node pair probabilities, where an unseen pair backs off to the
//! product of the modifier and head relative frequencies. Words containing
//! unknown material cannot be split at all, which is the characteristic
//! failure mode this method trades against its precision.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::corpus::AnnotatedWord;
use crate::splitter::BinarySplitter;
use crate::tree::ConstituentTree;

pub const LEXICON_FORMAT_VERSION: u32 = 1;

/// Modifier, head and pair frequency tables extracted from gold trees.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PartLexicon {
    modifier_count: BTreeMap<String, u64>,
    head_count: BTreeMap<String, u64>,
    pair_count: BTreeMap<(String, String), u64>,
    modifier_total: u64,
    head_total: u64,
    pair_total: u64,
}

impl PartLexicon {
    /// Count every internal node of every gold tree: the left surface as a
    /// modifier, the right surface as a head, and the pair itself. A base
    /// word contributes its form as a known head.
    pub fn build(words: &[AnnotatedWord]) -> Self {
        let mut lex = PartLexicon::default();
        for word in words {
            match word.structure() {
                ConstituentTree::Leaf(form) => lex.count_head(form),
                node => lex.count_tree(node),
            }
        }
        lex
    }

    fn count_tree(&mut self, tree: &ConstituentTree) {
        if let ConstituentTree::Node(left, right) = tree {
            let modifier = left.surface();
            let head = right.surface();
            self.count_modifier(&modifier);
            self.count_head(&head);
            *self.pair_count.entry((modifier, head)).or_insert(0) += 1;
            self.pair_total += 1;
            self.count_tree(left);
            self.count_tree(right);
        }
    }

    fn count_modifier(&mut self, part: &str) {
        *self.modifier_count.entry(part.to_string()).or_insert(0) += 1;
        self.modifier_total += 1;
    }

    fn count_head(&mut self, part: &str) {
        *self.head_count.entry(part.to_string()).or_insert(0) += 1;
        self.head_total += 1;
    }

    pub fn modifier_count(&self, part: &str) -> u64 {
        self.modifier_count.get(part).copied().unwrap_or(0)
    }

    pub fn head_count(&self, part: &str) -> u64 {
        self.head_count.get(part).copied().unwrap_or(0)
    }

    pub fn pair_count(&self, modifier: &str, head: &str) -> u64 {
        self.pair_count
            .get(&(modifier.to_string(), head.to_string()))
            .copied()
            .unwrap_or(0)
    }

    pub fn modifier_total(&self) -> u64 {
        self.modifier_total
    }

    pub fn head_total(&self) -> u64 {
        self.head_total
    }

    pub fn pair_total(&self) -> u64 {
        self.pair_total
    }

    /// Distinct parts known as modifiers.
    pub fn modifier_entries(&self) -> usize {
        self.modifier_count.len()
    }

    /// Distinct parts known as heads.
    pub fn head_entries(&self) -> usize {
        self.head_count.len()
    }

    /// Distinct (modifier, head) pairs.
    pub fn pair_entries(&self) -> usize {
        self.pair_count.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modifier_count.is_empty() && self.head_count.is_empty()
    }

    /// A part is usable as a leaf when it is known in either role.
    pub fn knows_part(&self, part: &str) -> bool {
        self.modifier_count.contains_key(part) || self.head_count.contains_key(part)
    }

    /// Probability that `modifier` and `head` combine: the relative pair
    /// frequency when the pair was seen, the product of the parts' role
    /// frequencies as back-off, and 0 when either part is unknown in its
    /// role.
    pub fn pair_probability(&self, modifier: &str, head: &str) -> f64 {
        let pair = self.pair_count(modifier, head);
        if pair > 0 {
            return pair as f64 / self.pair_total as f64;
        }
        let m = self.modifier_count(modifier);
        let h = self.head_count(head);
        if m > 0 && h > 0 {
            (m as f64 / self.modifier_total as f64) * (h as f64 / self.head_total as f64)
        } else {
            0.0
        }
    }

    /// Score of leaving `form` unsplit: its relative frequency as a head.
    pub fn unsplit_score(&self, form: &str) -> f64 {
        let h = self.head_count(form);
        if h > 0 {
            h as f64 / self.head_total as f64
        } else {
            0.0
        }
    }

    /// Score of a full analysis: the product of
    /// [`pair_probability`](Self::pair_probability) over all internal nodes.
    pub fn tree_score(&self, tree: &ConstituentTree) -> f64 {
        match tree {
            ConstituentTree::Leaf(_) => 1.0,
            ConstituentTree::Node(left, right) => {
                self.tree_score(left)
                    * self.tree_score(right)
                    * self.pair_probability(&left.surface(), &right.surface())
            }
        }
    }
}

/// A candidate analysis with its score.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredTree {
    pub tree: ConstituentTree,
    pub score: f64,
}

/// Candidate ordering: higher score first, then fewer leaves, then the
/// lexicographically smaller bracketing.
fn better(
    score_a: f64,
    leaves_a: usize,
    render_a: &str,
    score_b: f64,
    leaves_b: usize,
    render_b: &str,
) -> bool {
    if score_a != score_b {
        return score_a > score_b;
    }
    if leaves_a != leaves_b {
        return leaves_a < leaves_b;
    }
    render_a < render_b
}

#[derive(Clone)]
struct SpanBest {
    tree: ConstituentTree,
    score: f64,
    leaves: usize,
    render: String,
}

/// Best-scoring analysis of `form` into known parts, or `None` when the word
/// should be left unsplit.
///
/// All binary trees whose leaf surfaces are known parts are considered via
/// dynamic programming over character spans. Zero-probability nodes are
/// pruned, so any returned tree has a strictly positive score. When the form
/// itself is a known head, the split is only returned if it outscores the
/// unsplit reading.
#[allow(clippy::needless_range_loop)] // k is the split position, not just an index
pub fn best_structure(form: &str, lexicon: &PartLexicon) -> Option<ScoredTree> {
    let chars: Vec<char> = form.chars().collect();
    let n = chars.len();
    if n < 2 {
        return None;
    }

    // Substring cache so spans are materialized once.
    let substring = |i: usize, j: usize| -> String { chars[i..j].iter().collect() };

    // best[i][j - i - 1]: best analysis of chars[i..j], if any.
    let mut best: Vec<Vec<Option<SpanBest>>> = vec![vec![None; n + 1]; n];
    for width in 1..=n {
        for i in 0..=(n - width) {
            let j = i + width;
            let surface = substring(i, j);
            // A known part read as a leaf contributes no probability factor
            // of its own; the pair probability at its parent prices it in.
            // The root has no parent, so its unsplit reading competes via
            // the head frequency below instead of a free leaf.
            let is_root = width == n;
            let mut candidate: Option<SpanBest> = if !is_root && lexicon.knows_part(&surface) {
                Some(SpanBest {
                    render: surface.clone(),
                    tree: ConstituentTree::leaf(surface),
                    score: 1.0,
                    leaves: 1,
                })
            } else {
                None
            };
            for k in (i + 1)..j {
                let (Some(left), Some(right)) = (&best[i][k], &best[k][j]) else {
                    continue;
                };
                let pair = lexicon.pair_probability(&substring(i, k), &substring(k, j));
                if pair == 0.0 {
                    continue;
                }
                let score = left.score * right.score * pair;
                if score == 0.0 {
                    continue;
                }
                let leaves = left.leaves + right.leaves;
                let render = format!("({} {})", left.render, right.render);
                let replace = match &candidate {
                    None => true,
                    Some(c) => better(score, leaves, &render, c.score, c.leaves, &c.render),
                };
                if replace {
                    candidate = Some(SpanBest {
                        tree: ConstituentTree::node(left.tree.clone(), right.tree.clone()),
                        score,
                        leaves,
                        render,
                    });
                }
            }
            best[i][j] = candidate;
        }
    }

    let root = best[0][n].take()?;
    debug_assert!(root.leaves >= 2);
    if root.score > lexicon.unsplit_score(form) {
        Some(ScoredTree {
            tree: root.tree,
            score: root.score,
        })
    } else {
        None
    }
}

/// The baseline as a binary splitter: the top split of the best structure.
pub struct LexiconSplitter<'a> {
    lexicon: &'a PartLexicon,
}

impl<'a> LexiconSplitter<'a> {
    pub fn new(lexicon: &'a PartLexicon) -> Self {
        Self { lexicon }
    }
}

impl BinarySplitter for LexiconSplitter<'_> {
    fn split_point(&self, form: &str) -> Option<usize> {
        let scored = best_structure(form, self.lexicon)?;
        match scored.tree {
            ConstituentTree::Node(left, _) => Some(left.surface_char_len()),
            ConstituentTree::Leaf(_) => None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LexiconIoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("unsupported lexicon version `{0}` (expected {LEXICON_FORMAT_VERSION})")]
    Version(String),
    #[error("inconsistent lexicon: {0}")]
    Inconsistent(String),
}

impl PartLexicon {
    /// Write the lexicon as versioned text with `[modifiers]`, `[heads]` and
    /// `[pairs]` sections.
    pub fn write<W: Write>(&self, writer: W) -> Result<(), LexiconIoError> {
        let mut out = BufWriter::new(writer);
        writeln!(out, "# decompound part lexicon")?;
        writeln!(out, "version\t{LEXICON_FORMAT_VERSION}")?;
        writeln!(out, "[modifiers]")?;
        for (part, count) in &self.modifier_count {
            writeln!(out, "{part}\t{count}")?;
        }
        writeln!(out, "[heads]")?;
        for (part, count) in &self.head_count {
            writeln!(out, "{part}\t{count}")?;
        }
        writeln!(out, "[pairs]")?;
        for ((modifier, head), count) in &self.pair_count {
            writeln!(out, "{modifier}\t{head}\t{count}")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_file(&self, path: &Path) -> Result<(), LexiconIoError> {
        self.write(File::create(path)?)
    }

    pub fn read<R: Read>(reader: R) -> Result<Self, LexiconIoError> {
        #[derive(PartialEq)]
        enum Section {
            Preamble,
            Modifiers,
            Heads,
            Pairs,
        }
        let mut lex = PartLexicon::default();
        let mut section = Section::Preamble;
        let mut version_seen = false;
        for (i, line) in BufReader::new(reader).lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            let fail = |message: String| LexiconIoError::Format {
                line: lineno,
                message,
            };
            let trimmed = line.trim_end();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            match trimmed {
                "[modifiers]" => {
                    section = Section::Modifiers;
                    continue;
                }
                "[heads]" => {
                    section = Section::Heads;
                    continue;
                }
                "[pairs]" => {
                    section = Section::Pairs;
                    continue;
                }
                _ => {}
            }
            let fields: Vec<&str> = trimmed.split('\t').collect();
            match section {
                Section::Preamble => {
                    if fields.len() == 2 && fields[0] == "version" {
                        if fields[1] != LEXICON_FORMAT_VERSION.to_string() {
                            return Err(LexiconIoError::Version(fields[1].to_string()));
                        }
                        version_seen = true;
                    } else {
                        return Err(fail(format!(
                            "unexpected line before sections: `{trimmed}`"
                        )));
                    }
                }
                Section::Modifiers | Section::Heads => {
                    if fields.len() != 2 {
                        return Err(fail("expected `part<TAB>count`".to_string()));
                    }
                    let count: u64 = fields[1]
                        .parse()
                        .map_err(|_| fail(format!("bad count `{}`", fields[1])))?;
                    if count == 0 {
                        return Err(fail("counts must be at least 1".to_string()));
                    }
                    if section == Section::Modifiers {
                        lex.modifier_count.insert(fields[0].to_string(), count);
                        lex.modifier_total += count;
                    } else {
                        lex.head_count.insert(fields[0].to_string(), count);
                        lex.head_total += count;
                    }
                }
                Section::Pairs => {
                    if fields.len() != 3 {
                        return Err(fail("expected `modifier<TAB>head<TAB>count`".to_string()));
                    }
                    let count: u64 = fields[2]
                        .parse()
                        .map_err(|_| fail(format!("bad count `{}`", fields[2])))?;
                    if count == 0 {
                        return Err(fail("counts must be at least 1".to_string()));
                    }
                    lex.pair_count
                        .insert((fields[0].to_string(), fields[1].to_string()), count);
                    lex.pair_total += count;
                }
            }
        }
        if !version_seen {
            return Err(LexiconIoError::Version("missing".to_string()));
        }
        for (modifier, head) in lex.pair_count.keys() {
            if !lex.modifier_count.contains_key(modifier) {
                return Err(LexiconIoError::Inconsistent(format!(
                    "pair modifier `{modifier}` missing from [modifiers]"
                )));
            }
            if !lex.head_count.contains_key(head) {
                return Err(LexiconIoError::Inconsistent(format!(
                    "pair head `{head}` missing from [heads]"
                )));
            }
        }
        Ok(lex)
    }

    pub fn read_file(path: &Path) -> Result<Self, LexiconIoError> {
        Self::read(File::open(path)?)
    }
}
