//! Deterministic synthetic corpus generator.
//!
//! Real annotated corpora of compound structures are not redistributable, so
//! desk-scale experiments and the test suite run on generated data instead:
//! stems from a fixed toy inventory are concatenated into compounds (with an
//! optional linking `s`), heads take inflectional endings, and the gold tree
//! of every word is recorded. Inflected variants of one headword share a
//! lemma group. Everything is a pure function of the configuration,
//! including the accompanying pseudo-Zipf frequency list.
//!
//! A separate pool of held-out stems can be used to build compounds whose
//! modifier never occurs in the main corpus, for out-of-vocabulary
//! generalization experiments.

use std::collections::{HashMap, HashSet};

use crate::corpus::AnnotatedWord;
use crate::rng::SplitMix64;
use crate::tree::ConstituentTree;

/// Stems for the main corpus.
const ROOTS: &[&str] = &[
    "raf", "orku", "þörf", "bolt", "fót", "hest", "vagn", "skól", "bók", "hús", "fjall", "strand",
    "borg", "dal", "eyj", "foss", "garð", "gras", "himin", "jökul", "kirkj", "lamb", "mjólk",
    "morgun", "nótt", "ósk", "prest", "regn", "sál", "sjó", "skip", "snjó", "sól", "stein", "torg",
    "tré", "tún", "úlf", "vatn", "veg", "vind", "þak", "æsk", "örn", "blóm", "brauð", "draum",
    "eld", "fisk", "fugl", "gler", "gull", "haf", "heim", "hól", "ís", "kvöld", "ljós", "mynd",
    "rós", "salt", "silfur",
];

/// Stems reserved for out-of-vocabulary compounds; never used by the main
/// corpus.
const NOVEL_ROOTS: &[&str] = &[
    "gúmm", "skríp", "tvenn", "þyrl", "snigl", "krukk", "vesp", "gildr", "hnakk", "spegl", "drek",
    "flösk",
];

/// Inflectional endings applied to heads and base words.
const ENDINGS: &[&str] = &["", "ur", "i", "a", "s", "um", "ar"];

/// Derivational suffixes that widen the base-word inventory.
const DERIVATIONS: &[&str] = &["", "leg", "ing", "un", "ald", "sem"];

#[derive(Debug, Clone)]
pub struct SynthConfig {
    /// Words in the main corpus.
    pub n_words: usize,
    /// Extra compounds whose modifier stem is drawn from the held-out pool.
    pub novel_compounds: usize,
    pub seed: u64,
    /// Fraction of base words in the main corpus.
    pub base_fraction: f64,
    /// Fraction of compounds built from three parts instead of two.
    pub three_part_fraction: f64,
    /// Chance of a linking `s` after a modifier.
    pub linking_fraction: f64,
    /// Maximum inflected variants generated per headword.
    pub max_variants: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_words: 1000,
            novel_compounds: 0,
            seed: 0,
            base_fraction: 0.15,
            three_part_fraction: 0.25,
            linking_fraction: 0.15,
            max_variants: 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub words: Vec<AnnotatedWord>,
    /// Compounds containing a held-out modifier stem; disjoint from `words`.
    pub novel: Vec<AnnotatedWord>,
    /// Pseudo-Zipf counts for every generated form.
    pub frequencies: HashMap<String, u64>,
}

struct Generator {
    rng: SplitMix64,
    seen: HashSet<String>,
    next_group: usize,
    frequencies: HashMap<String, u64>,
    rank: usize,
}

impl Generator {
    fn new(seed: u64) -> Self {
        Self {
            rng: SplitMix64::new(seed),
            seen: HashSet::new(),
            next_group: 0,
            frequencies: HashMap::new(),
            rank: 0,
        }
    }

    fn pick<'a>(&mut self, items: &[&'a str]) -> &'a str {
        items[self.rng.below(items.len())]
    }

    fn fresh_group(&mut self, prefix: &str) -> String {
        self.next_group += 1;
        format!("{prefix}{}", self.next_group)
    }

    fn record(&mut self, form: &str) {
        self.rank += 1;
        let jitter = self.rng.below(101) as u64;
        let count = 1 + 3_000_000 / (self.rank as u64 + 2) + jitter;
        self.frequencies.insert(form.to_string(), count);
    }

    /// A modifier leaf: a stem plus an optional linking `s`.
    fn modifier_leaf(&mut self, roots: &[&str], linking: f64) -> String {
        let stem = self.pick(roots);
        if self.rng.chance(linking) {
            format!("{stem}s")
        } else {
            stem.to_string()
        }
    }

    /// Build the inflected variants of one headword. `make` receives the
    /// ending for a variant and returns the word's tree, or `None` when the
    /// surface collides with an existing form.
    fn emit_variants(
        &mut self,
        out: &mut Vec<AnnotatedWord>,
        budget: usize,
        group_prefix: &str,
        max_variants: usize,
        make: impl Fn(&str) -> ConstituentTree,
    ) -> usize {
        let n_variants = 1 + self.rng.below(max_variants);
        let mut chosen: Vec<&str> = Vec::new();
        for _ in 0..n_variants {
            let e = self.pick(ENDINGS);
            if !chosen.contains(&e) {
                chosen.push(e);
            }
        }
        let group = self.fresh_group(group_prefix);
        let mut emitted = 0;
        for ending in chosen {
            if out.len() >= budget {
                break;
            }
            let tree = make(ending);
            let form = tree.surface();
            if form.chars().count() > 38 || !self.seen.insert(form.clone()) {
                continue;
            }
            self.record(&form);
            out.push(
                AnnotatedWord::new(form, group.clone(), tree)
                    .expect("generated trees are consistent"),
            );
            emitted += 1;
        }
        emitted
    }
}

/// Generate a corpus. Panics if the configuration asks for more unique
/// forms than the toy inventory can produce.
pub fn generate(config: &SynthConfig) -> SynthCorpus {
    let mut g = Generator::new(config.seed);
    let mut words = Vec::with_capacity(config.n_words);
    let mut dry_spells = 0usize;

    while words.len() < config.n_words {
        let want_base = g.rng.chance(config.base_fraction);
        let emitted = if want_base {
            let stem = g.pick(ROOTS).to_string();
            let deriv = g.pick(DERIVATIONS).to_string();
            g.emit_variants(
                &mut words,
                config.n_words,
                "L",
                config.max_variants,
                |ending| ConstituentTree::leaf(format!("{stem}{deriv}{ending}")),
            )
        } else {
            let three = g.rng.chance(config.three_part_fraction);
            let m1 = g.modifier_leaf(ROOTS, config.linking_fraction);
            let head_stem = g.pick(ROOTS).to_string();
            if three {
                let m2 = g.modifier_leaf(ROOTS, config.linking_fraction);
                let left_branching = g.rng.chance(0.5);
                g.emit_variants(
                    &mut words,
                    config.n_words,
                    "L",
                    config.max_variants,
                    |ending| {
                        let head = ConstituentTree::leaf(format!("{head_stem}{ending}"));
                        if left_branching {
                            // ((m1 m2) head)
                            ConstituentTree::node(
                                ConstituentTree::node(
                                    ConstituentTree::leaf(m1.clone()),
                                    ConstituentTree::leaf(m2.clone()),
                                ),
                                head,
                            )
                        } else {
                            // (m1 (m2 head))
                            ConstituentTree::node(
                                ConstituentTree::leaf(m1.clone()),
                                ConstituentTree::node(ConstituentTree::leaf(m2.clone()), head),
                            )
                        }
                    },
                )
            } else {
                g.emit_variants(
                    &mut words,
                    config.n_words,
                    "L",
                    config.max_variants,
                    |ending| {
                        ConstituentTree::node(
                            ConstituentTree::leaf(m1.clone()),
                            ConstituentTree::leaf(format!("{head_stem}{ending}")),
                        )
                    },
                )
            }
        };
        if emitted == 0 {
            dry_spells += 1;
            assert!(
                dry_spells < 20_000,
                "synthetic inventory exhausted at {} of {} words",
                words.len(),
                config.n_words
            );
        } else {
            dry_spells = 0;
        }
    }

    let mut novel = Vec::with_capacity(config.novel_compounds);
    while novel.len() < config.novel_compounds {
        let m = g.modifier_leaf(NOVEL_ROOTS, config.linking_fraction);
        let head_stem = g.pick(ROOTS).to_string();
        let emitted = g.emit_variants(&mut novel, config.novel_compounds, "N", 1, |ending| {
            ConstituentTree::node(
                ConstituentTree::leaf(m.clone()),
                ConstituentTree::leaf(format!("{head_stem}{ending}")),
            )
        });
        if emitted == 0 {
            dry_spells += 1;
            assert!(dry_spells < 20_000, "novel inventory exhausted");
        } else {
            dry_spells = 0;
        }
    }

    SynthCorpus {
        words,
        novel,
        frequencies: g.frequencies,
    }
}
