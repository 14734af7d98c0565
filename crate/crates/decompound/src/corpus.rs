//! Annotated compound corpora: parsing, normalization, deduplication and
//! grouped stratified partitioning.
//!
//! Two on-disk formats are supported, both UTF-8 and tab-separated with one
//! record per line (lines starting with `#` are ignored):
//!
//! - tree format: `form<TAB>lemma_group<TAB>structure`, where the structure
//!   is the bracketed notation of [`ConstituentTree`];
//! - flat format: `form<TAB>lemma_group<TAB>split_index`, where the index
//!   counts Unicode scalar values and `0` marks a base word.
//!
//! All forms are lowercased on read and text is NFC-normalized so that
//! decomposed and precomposed spellings of the same word do not create
//! distinct entries.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use unicode_normalization::UnicodeNormalization;

use crate::rng::SplitMix64;
use crate::tree::{ConstituentTree, TreeParseError};

/// Train/validation/test fractions used by [`partition`].
pub const PARTITION_RATIOS: (f64, f64, f64) = (0.80, 0.10, 0.10);

/// Tolerance, in percentage points, on per-set class proportions.
pub const STRATIFICATION_TOLERANCE_PP: f64 = 0.5;

/// Minimum number of lemma groups per class for stratification to be
/// meaningful.
pub const MIN_GROUPS_PER_CLASS: usize = 10;

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("line {line}: {kind}")]
    Line { line: usize, kind: LineError },
    #[error("empty input form")]
    EmptyForm,
    #[error("stratification infeasible: {class} class has only {groups} lemma groups (at least {MIN_GROUPS_PER_CLASS} required)")]
    Stratification { class: WordClass, groups: usize },
    #[error("requested subset of {requested} words but the training set has only {available}")]
    SubsetTooLarge { requested: usize, available: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Per-line parse failures, reported with their line number by
/// [`CorpusError::Line`].
#[derive(Debug, thiserror::Error)]
pub enum LineError {
    #[error("expected 3 tab-separated fields, found {found}")]
    FieldCount { found: usize },
    #[error("{0}")]
    Tree(#[from] TreeParseError),
    #[error("structure surface `{found}` does not match form `{expected}`")]
    SurfaceMismatch { expected: String, found: String },
    #[error("split index {index} out of range for a {len}-character form")]
    SplitIndexOutOfRange { index: usize, len: usize },
    #[error("split index `{0}` is not a non-negative integer")]
    InvalidSplitIndex(String),
    #[error("empty form")]
    EmptyForm,
    #[error("empty lemma group")]
    EmptyLemmaGroup,
}

/// Base word or compound; used for stratification and reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WordClass {
    Base,
    Compound,
}

impl fmt::Display for WordClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WordClass::Base => f.write_str("base"),
            WordClass::Compound => f.write_str("compound"),
        }
    }
}

/// A normalized word form with its gold constituent structure and the
/// identifier of the lemma group (inflected forms of one headword share a
/// group and must land in the same partition set).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedWord {
    form: String,
    lemma_group: String,
    structure: ConstituentTree,
}

impl AnnotatedWord {
    /// Build a word, checking that the structure's leaves concatenate to the
    /// form and that no leaf is empty. The form is expected to be normalized
    /// already.
    pub fn new(
        form: impl Into<String>,
        lemma_group: impl Into<String>,
        structure: ConstituentTree,
    ) -> Result<Self, LineError> {
        let form = form.into();
        let lemma_group = lemma_group.into();
        if form.is_empty() {
            return Err(LineError::EmptyForm);
        }
        if lemma_group.is_empty() {
            return Err(LineError::EmptyLemmaGroup);
        }
        if !structure.leaves_nonempty() {
            return Err(LineError::Tree(TreeParseError::EmptyLeaf));
        }
        let surface = structure.surface();
        if surface != form {
            return Err(LineError::SurfaceMismatch {
                expected: form,
                found: surface,
            });
        }
        Ok(Self {
            form,
            lemma_group,
            structure,
        })
    }

    pub fn form(&self) -> &str {
        &self.form
    }

    pub fn lemma_group(&self) -> &str {
        &self.lemma_group
    }

    pub fn structure(&self) -> &ConstituentTree {
        &self.structure
    }

    pub fn is_compound(&self) -> bool {
        !self.structure.is_leaf()
    }

    pub fn class(&self) -> WordClass {
        if self.is_compound() {
            WordClass::Compound
        } else {
            WordClass::Base
        }
    }

    /// Character count of the form (Unicode scalar values).
    pub fn char_len(&self) -> usize {
        self.form.chars().count()
    }

    /// The binary split at the root of the structure: the character index of
    /// the first character of the head, or no split for a base word.
    pub fn top_level_split(&self) -> SplitVector {
        let length = self.char_len();
        match &self.structure {
            ConstituentTree::Leaf(_) => SplitVector::base(length),
            ConstituentTree::Node(left, _) => {
                let p = left.surface_char_len();
                SplitVector::split(length, p).expect("root split of a validated tree is in range")
            }
        }
    }

    /// Tree-format record: `form<TAB>lemma_group<TAB>structure`.
    pub fn to_tree_line(&self) -> String {
        format!(
            "{}\t{}\t{}",
            self.form,
            self.lemma_group,
            self.structure.render()
        )
    }

    /// Flat-format record: `form<TAB>lemma_group<TAB>split_index` with `0`
    /// for a base word. Only the top-level split survives this format.
    pub fn to_flat_line(&self) -> String {
        let idx = self.top_level_split().split_index().unwrap_or(0);
        format!("{}\t{}\t{}", self.form, self.lemma_group, idx)
    }
}

/// Per-character binary split target. Rendered as a 0/1 vector it holds
/// exactly one 1 (at the first character of the head) for a compound and is
/// all zeros for a base word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitVector {
    length: usize,
    split_index: Option<usize>,
}

impl SplitVector {
    /// All-zeros target for a base word of `length` characters.
    pub fn base(length: usize) -> Self {
        Self {
            length,
            split_index: None,
        }
    }

    /// Target with a single 1 at character position `index`
    /// (`1 <= index <= length - 1`).
    pub fn split(length: usize, index: usize) -> Result<Self, LineError> {
        if index == 0 || index >= length {
            return Err(LineError::SplitIndexOutOfRange { index, len: length });
        }
        Ok(Self {
            length,
            split_index: Some(index),
        })
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn split_index(&self) -> Option<usize> {
        self.split_index
    }

    /// Render as a 0/1 vector of `length` entries.
    pub fn as_binary(&self) -> Vec<u8> {
        let mut v = vec![0u8; self.length];
        if let Some(p) = self.split_index {
            v[p] = 1;
        }
        v
    }

    /// Target value at position `t`.
    pub fn target_at(&self, t: usize) -> f64 {
        if self.split_index == Some(t) {
            1.0
        } else {
            0.0
        }
    }
}

/// Lowercase a form with full Unicode case mapping.
pub fn normalize(form: &str) -> Result<String, CorpusError> {
    if form.is_empty() {
        return Err(CorpusError::EmptyForm);
    }
    Ok(form.to_lowercase())
}

/// Normalize one line of raw word input: NFC, trimmed, lowercased. May be
/// empty for blank lines.
pub fn normalize_line(line: &str) -> String {
    let nfc: String = line.nfc().collect();
    nfc.trim().to_lowercase()
}

fn line_err(line: usize, kind: impl Into<LineError>) -> CorpusError {
    CorpusError::Line {
        line,
        kind: kind.into(),
    }
}

fn split_fields(line: &str, lineno: usize) -> Result<(&str, &str, &str), CorpusError> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 3 {
        return Err(line_err(
            lineno,
            LineError::FieldCount {
                found: fields.len(),
            },
        ));
    }
    Ok((fields[0], fields[1], fields[2]))
}

/// Parse one tree-format record. `lineno` is carried into any error.
pub fn parse_tree_line(line: &str, lineno: usize) -> Result<AnnotatedWord, CorpusError> {
    let (form, lemma, structure) = split_fields(line, lineno)?;
    if form.is_empty() {
        return Err(line_err(lineno, LineError::EmptyForm));
    }
    let form = form.to_lowercase();
    let tree = ConstituentTree::parse(&structure.to_lowercase())
        .map_err(|e| line_err(lineno, LineError::Tree(e)))?;
    AnnotatedWord::new(form, lemma, tree).map_err(|e| line_err(lineno, e))
}

/// Parse one flat-format record; split index 0 marks a base word, any other
/// index yields a two-leaf tree.
pub fn parse_flat_line(line: &str, lineno: usize) -> Result<AnnotatedWord, CorpusError> {
    let (form, lemma, index) = split_fields(line, lineno)?;
    if form.is_empty() {
        return Err(line_err(lineno, LineError::EmptyForm));
    }
    let form = form.to_lowercase();
    let index: usize = index
        .trim()
        .parse()
        .map_err(|_| line_err(lineno, LineError::InvalidSplitIndex(index.to_string())))?;
    let chars: Vec<char> = form.chars().collect();
    let structure = if index == 0 {
        ConstituentTree::leaf(form.clone())
    } else {
        if index >= chars.len() {
            return Err(line_err(
                lineno,
                LineError::SplitIndexOutOfRange {
                    index,
                    len: chars.len(),
                },
            ));
        }
        let left: String = chars[..index].iter().collect();
        let right: String = chars[index..].iter().collect();
        ConstituentTree::node(ConstituentTree::leaf(left), ConstituentTree::leaf(right))
    };
    AnnotatedWord::new(form, lemma, structure).map_err(|e| line_err(lineno, e))
}

/// On-disk corpus format selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    Tree,
    Flat,
}

impl CorpusFormat {
    pub fn parse_line(&self, line: &str, lineno: usize) -> Result<AnnotatedWord, CorpusError> {
        match self {
            CorpusFormat::Tree => parse_tree_line(line, lineno),
            CorpusFormat::Flat => parse_flat_line(line, lineno),
        }
    }

    pub fn render_line(&self, word: &AnnotatedWord) -> String {
        match self {
            CorpusFormat::Tree => word.to_tree_line(),
            CorpusFormat::Flat => word.to_flat_line(),
        }
    }
}

/// Read a corpus from any reader. Input is NFC-normalized, blank lines and
/// `#`-prefixed comment lines are skipped, and parse errors carry 1-based
/// line numbers.
pub fn read_corpus<R: Read>(
    reader: R,
    format: CorpusFormat,
) -> Result<Vec<AnnotatedWord>, CorpusError> {
    let reader = BufReader::new(reader);
    let mut words = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line: String = line.nfc().collect();
        let trimmed = line.trim_end_matches(['\r', '\n']);
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        words.push(format.parse_line(trimmed, i + 1)?);
    }
    Ok(words)
}

pub fn read_corpus_file(
    path: &Path,
    format: CorpusFormat,
) -> Result<Vec<AnnotatedWord>, CorpusError> {
    read_corpus(File::open(path)?, format)
}

/// Write a corpus. A `# seed: n` header is emitted when `seed` is given so
/// generated artifacts record how they were produced.
pub fn write_corpus_file(
    path: &Path,
    words: &[AnnotatedWord],
    format: CorpusFormat,
    seed: Option<u64>,
) -> Result<(), CorpusError> {
    let mut out = BufWriter::new(File::create(path)?);
    if let Some(seed) = seed {
        writeln!(out, "# seed: {seed}")?;
    }
    for w in words {
        writeln!(out, "{}", format.render_line(w))?;
    }
    out.flush()?;
    Ok(())
}

/// One analysis dropped by [`deduplicate`] because its form already appeared
/// with a different structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AmbiguityConflict {
    pub form: String,
    pub kept: String,
    pub dropped: String,
}

/// Keep the first entry per form, in input order. Later entries for the same
/// form are dropped; those whose structure differs from the kept analysis
/// are reported.
pub fn deduplicate(words: Vec<AnnotatedWord>) -> (Vec<AnnotatedWord>, Vec<AmbiguityConflict>) {
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut kept: Vec<AnnotatedWord> = Vec::with_capacity(words.len());
    let mut conflicts = Vec::new();
    for word in words {
        match seen.get(word.form()) {
            None => {
                seen.insert(word.form.clone(), kept.len());
                kept.push(word);
            }
            Some(&idx) => {
                let first = &kept[idx];
                if first.structure != word.structure {
                    conflicts.push(AmbiguityConflict {
                        form: word.form.clone(),
                        kept: first.structure.render(),
                        dropped: word.structure.render(),
                    });
                }
            }
        }
    }
    (kept, conflicts)
}

/// An 80/10/10 split with disjoint word forms, unbroken lemma groups and
/// per-set class proportions matching the corpus.
#[derive(Debug, Clone)]
pub struct DatasetPartition {
    pub train: Vec<AnnotatedWord>,
    pub validation: Vec<AnnotatedWord>,
    pub test: Vec<AnnotatedWord>,
}

impl DatasetPartition {
    pub fn sets(&self) -> [(&'static str, &[AnnotatedWord]); 3] {
        [
            ("train", &self.train),
            ("validation", &self.validation),
            ("test", &self.test),
        ]
    }
}

/// Assign whole lemma groups to train/validation/test so that the word-level
/// ratios per class come out at 80/10/10. Deterministic for a fixed seed:
/// groups are shuffled with a seeded generator and greedily assigned to the
/// set with the largest remaining deficit.
///
/// The input must be deduplicated. A non-empty class with fewer than
/// [`MIN_GROUPS_PER_CLASS`] lemma groups is an error.
pub fn partition(words: &[AnnotatedWord], seed: u64) -> Result<DatasetPartition, CorpusError> {
    // Lemma groups in first-occurrence order; each keeps the indices of its
    // words so output order can stay the corpus order.
    let mut group_index: HashMap<&str, usize> = HashMap::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, w) in words.iter().enumerate() {
        match group_index.get(w.lemma_group()) {
            Some(&g) => groups[g].push(i),
            None => {
                group_index.insert(w.lemma_group(), groups.len());
                groups.push(vec![i]);
            }
        }
    }

    // A group counts as compound when the majority of its forms are.
    let class_of_group = |members: &[usize]| -> WordClass {
        let compounds = members.iter().filter(|&&i| words[i].is_compound()).count();
        if compounds * 2 >= members.len() {
            WordClass::Compound
        } else {
            WordClass::Base
        }
    };

    let mut by_class: BTreeMap<u8, Vec<usize>> = BTreeMap::new();
    for (g, members) in groups.iter().enumerate() {
        let key = match class_of_group(members) {
            WordClass::Base => 0,
            WordClass::Compound => 1,
        };
        by_class.entry(key).or_default().push(g);
    }

    for (&key, class_groups) in &by_class {
        let class = if key == 0 {
            WordClass::Base
        } else {
            WordClass::Compound
        };
        if class_groups.len() < MIN_GROUPS_PER_CLASS {
            return Err(CorpusError::Stratification {
                class,
                groups: class_groups.len(),
            });
        }
    }

    let ratios = [PARTITION_RATIOS.0, PARTITION_RATIOS.1, PARTITION_RATIOS.2];
    let mut rng = SplitMix64::new(seed);
    let mut sets: [Vec<usize>; 3] = [Vec::new(), Vec::new(), Vec::new()];

    for class_groups in by_class.values() {
        let mut order = class_groups.clone();
        rng.shuffle(&mut order);
        // Largest groups first (stable over the shuffled order): the greedy
        // then tops sets up with small groups, keeping each set within a
        // word or two of its target.
        order.sort_by_key(|&g| std::cmp::Reverse(groups[g].len()));
        let class_words: usize = order.iter().map(|&g| groups[g].len()).sum();
        let targets = [
            ratios[0] * class_words as f64,
            ratios[1] * class_words as f64,
            ratios[2] * class_words as f64,
        ];
        let mut assigned = [0usize; 3];
        for &g in &order {
            // Largest remaining deficit wins; ties go to the earlier set.
            let mut best = 0;
            let mut best_deficit = f64::NEG_INFINITY;
            for s in 0..3 {
                let deficit = targets[s] - assigned[s] as f64;
                if deficit > best_deficit {
                    best_deficit = deficit;
                    best = s;
                }
            }
            assigned[best] += groups[g].len();
            sets[best].extend_from_slice(&groups[g]);
        }
    }

    let mut collect = |s: usize| -> Vec<AnnotatedWord> {
        sets[s].sort_unstable();
        sets[s].iter().map(|&i| words[i].clone()).collect()
    };
    Ok(DatasetPartition {
        train: collect(0),
        validation: collect(1),
        test: collect(2),
    })
}

/// The `n` highest-frequency training forms. Forms missing from `freqs`
/// count as frequency 0; ties break toward the lexicographically smaller
/// form, so subsets are nested across sizes.
pub fn frequency_subset(
    train: &[AnnotatedWord],
    freqs: &HashMap<String, u64>,
    n: usize,
) -> Result<Vec<AnnotatedWord>, CorpusError> {
    if n > train.len() {
        return Err(CorpusError::SubsetTooLarge {
            requested: n,
            available: train.len(),
        });
    }
    let mut order: Vec<usize> = (0..train.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = freqs.get(train[a].form()).copied().unwrap_or(0);
        let fb = freqs.get(train[b].form()).copied().unwrap_or(0);
        fb.cmp(&fa)
            .then_with(|| train[a].form().cmp(train[b].form()))
    });
    order.truncate(n);
    Ok(order.into_iter().map(|i| train[i].clone()).collect())
}

/// Read a `form<TAB>count` frequency list. Later duplicates overwrite
/// earlier ones.
pub fn read_frequency_file(path: &Path) -> Result<HashMap<String, u64>, CorpusError> {
    let reader = BufReader::new(File::open(path)?);
    let mut freqs = HashMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line: String = line.nfc().collect();
        let trimmed = line.trim_end_matches(['\r', '\n']);
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split('\t').collect();
        if fields.len() != 2 {
            return Err(line_err(
                i + 1,
                LineError::FieldCount {
                    found: fields.len(),
                },
            ));
        }
        let count: u64 = fields[1]
            .trim()
            .parse()
            .map_err(|_| line_err(i + 1, LineError::InvalidSplitIndex(fields[1].to_string())))?;
        freqs.insert(fields[0].to_lowercase(), count);
    }
    Ok(freqs)
}

/// Fraction of base words in a word list; `None` for an empty list.
pub fn base_fraction(words: &[AnnotatedWord]) -> Option<f64> {
    if words.is_empty() {
        return None;
    }
    let base = words.iter().filter(|w| !w.is_compound()).count();
    Some(base as f64 / words.len() as f64)
}

/// Check the partition invariants: disjoint forms, unbroken lemma groups,
/// and per-set base fractions within tolerance of the corpus-wide fraction.
///
/// The class-mix check is meaningful at corpus scale; below a few thousand
/// words the word-count granularity of a 10% set exceeds the tolerance no
/// matter how groups are assigned.
pub fn check_partition(partition: &DatasetPartition) -> Result<(), String> {
    let all: Vec<&AnnotatedWord> = partition
        .sets()
        .iter()
        .flat_map(|(_, set)| set.iter())
        .collect();
    let mut forms = HashSet::new();
    for w in &all {
        if !forms.insert(w.form()) {
            return Err(format!("form `{}` occurs in more than one set", w.form()));
        }
    }
    let mut group_home: HashMap<&str, &str> = HashMap::new();
    for (name, set) in partition.sets() {
        for w in set {
            match group_home.get(w.lemma_group()) {
                None => {
                    group_home.insert(w.lemma_group(), name);
                }
                Some(&home) if home == name => {}
                Some(&home) => {
                    return Err(format!(
                        "lemma group `{}` split across {} and {}",
                        w.lemma_group(),
                        home,
                        name
                    ));
                }
            }
        }
    }
    let whole: Vec<AnnotatedWord> = all.iter().map(|w| (*w).clone()).collect();
    let corpus_fraction = base_fraction(&whole).ok_or("empty partition")?;
    for (name, set) in partition.sets() {
        let f = base_fraction(set).ok_or_else(|| format!("{name} set is empty"))?;
        let diff_pp = (f - corpus_fraction).abs() * 100.0;
        if diff_pp > STRATIFICATION_TOLERANCE_PP {
            return Err(format!(
                "{name} base fraction {:.3}% is {diff_pp:.3}pp away from corpus {:.3}%",
                f * 100.0,
                corpus_fraction * 100.0
            ));
        }
    }
    Ok(())
}
