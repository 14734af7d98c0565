//! Command-line front end for the compound-splitting toolkit.
//!
//! One command per batch step: `partition` a corpus, `train` the BiLSTM
//! tagger, `build-lexicon` for the statistical baseline, `split` words with
//! either engine, `eval` an engine against gold data, run the learning
//! `curve` experiment, and `gen-synth` for deterministic synthetic corpora.
//! Identical inputs, flags and seeds produce byte-identical outputs. The
//! `DECOMPOUND_THREADS` environment variable caps worker threads (default:
//! all cores).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use decompound::baseline::{LexiconSplitter, PartLexicon};
use decompound::corpus::{
    self, base_fraction, deduplicate, partition, read_corpus_file, read_frequency_file,
    write_corpus_file, AnnotatedWord, CorpusFormat,
};
use decompound::eval::{
    curve_lines, evaluate, history_lines, learning_curve, percent, report_lines, report_table,
    tree_exact_match,
};
use decompound::neural::{self, ModelConfig, TrainedModel};
use decompound::splitter::{derive_tree, BinarySplitter, DEFAULT_MAX_DEPTH};
use decompound::synth::{generate, SynthConfig};
use decompound::ConstituentTree;

#[derive(Parser)]
#[command(
    name = "decompound",
    version,
    about = "Compound-word splitting: BiLSTM tagger and lexicon baseline",
    long_about = "Compound-word splitting toolkit. Trains a character-level BiLSTM to tag binary \
                  split points, reimplements a lexicon-based statistical splitter, derives full \
                  constituent trees, and evaluates both. Set DECOMPOUND_THREADS to cap worker \
                  threads (default: all cores)."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Tree,
    Flat,
}

impl From<FormatArg> for CorpusFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Tree => CorpusFormat::Tree,
            FormatArg::Flat => CorpusFormat::Flat,
        }
    }
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Engine {
    /// The trained neural tagger (requires --model).
    Bilstm,
    /// The statistical part-lexicon splitter (requires --lexicon).
    Kvistur1,
}

/// Training hyperparameters; the defaults are the reference configuration.
#[derive(Args, Clone)]
struct TrainFlags {
    /// BiLSTM layers.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    layers: u8,
    /// Character embedding dimensions.
    #[arg(long = "embed-dim", default_value_t = 128)]
    embed_dim: usize,
    /// Hidden units per direction.
    #[arg(long = "hidden", default_value_t = 128)]
    hidden: usize,
    /// Maximum word length in characters; shorter words are padded.
    #[arg(long = "max-len", default_value_t = 40)]
    max_len: usize,
    /// Constant Adam learning rate.
    #[arg(long = "lr", default_value_t = 0.001)]
    lr: f64,
    /// Maximum training epochs.
    #[arg(long = "epochs", default_value_t = 100)]
    epochs: usize,
    /// Early-stopping patience in epochs without validation improvement.
    #[arg(long = "patience", default_value_t = 20)]
    patience: usize,
    /// Mini-batch size.
    #[arg(long = "batch", default_value_t = 32)]
    batch: usize,
    /// Seed for initialization and shuffling.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl TrainFlags {
    fn to_config(&self) -> ModelConfig {
        ModelConfig {
            embed_dim: self.embed_dim,
            hidden_dim: self.hidden,
            num_layers: self.layers as usize,
            max_len: self.max_len,
            learning_rate: self.lr,
            max_epochs: self.epochs,
            patience: self.patience,
            batch_size: self.batch,
            seed: self.seed,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Split an annotated corpus into train/validation/test files (80/10/10,
    /// lemma groups unbroken, class-stratified).
    Partition {
        /// Annotated corpus file.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = FormatArg::Tree)]
        format: FormatArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory for train.tsv, val.tsv and test.tsv.
        #[arg(long)]
        outdir: PathBuf,
    },
    /// Train the BiLSTM split-point tagger.
    Train {
        /// Training corpus file.
        #[arg(long)]
        train: PathBuf,
        /// Validation corpus file.
        #[arg(long)]
        val: PathBuf,
        #[arg(long, value_enum, default_value_t = FormatArg::Tree)]
        format: FormatArg,
        #[command(flatten)]
        flags: TrainFlags,
        /// Output model file.
        #[arg(long, default_value = "model.kvst")]
        out: PathBuf,
        /// Optional per-epoch history file (TSV).
        #[arg(long)]
        history: Option<PathBuf>,
    },
    /// Split words from a file or standard input, one per line.
    Split {
        #[arg(long, value_enum, default_value_t = Engine::Bilstm)]
        engine: Engine,
        /// Trained model file (bilstm engine).
        #[arg(long)]
        model: Option<PathBuf>,
        /// Part lexicon file (kvistur1 engine).
        #[arg(long)]
        lexicon: Option<PathBuf>,
        /// Input word list; standard input when omitted.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Emit `form<TAB>index` (0 for no split) instead of bracketed trees.
        #[arg(long = "binary-only", default_value_t = false)]
        binary_only: bool,
        /// Recursion limit for tree derivation.
        #[arg(long = "max-depth", default_value_t = DEFAULT_MAX_DEPTH)]
        max_depth: usize,
    },
    /// Evaluate an engine (or a predictions file) against a gold corpus.
    Eval {
        /// bilstm, kvistur1, or oracle (echoes gold; sanity check).
        #[arg(long, default_value = "bilstm")]
        engine: String,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        lexicon: Option<PathBuf>,
        /// Predictions file (`form<TAB>index`) scored instead of an engine.
        #[arg(long)]
        predictions: Option<PathBuf>,
        /// Gold corpus file.
        #[arg(long)]
        test: PathBuf,
        #[arg(long, value_enum, default_value_t = FormatArg::Tree)]
        format: FormatArg,
        /// Machine-readable report output (`metric<TAB>value` lines).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Learning-curve experiment: train on frequency-ranked subsets of
    /// increasing size and record test accuracy.
    Curve {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        val: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[arg(long, value_enum, default_value_t = FormatArg::Tree)]
        format: FormatArg,
        /// Frequency list (`form<TAB>count`).
        #[arg(long)]
        freqs: PathBuf,
        /// Comma-separated ascending subset sizes, e.g. 2000,4000,8000.
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<usize>,
        #[command(flatten)]
        flags: TrainFlags,
        /// Curve table output file.
        #[arg(long, default_value = "curve.tsv")]
        out: PathBuf,
    },
    /// Generate a deterministic synthetic corpus with gold trees and a
    /// matching frequency list.
    GenSynth {
        /// Number of words.
        #[arg(long, default_value_t = 1000)]
        words: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = FormatArg::Tree)]
        format: FormatArg,
        /// Corpus output file.
        #[arg(long)]
        out: PathBuf,
        /// Frequency list output file.
        #[arg(long = "freqs-out")]
        freqs_out: Option<PathBuf>,
        /// Also generate this many compounds with held-out modifier stems.
        #[arg(long, default_value_t = 0)]
        novel: usize,
        /// Output file for the held-out-part compounds.
        #[arg(long = "novel-out")]
        novel_out: Option<PathBuf>,
        /// Fraction of base (non-compound) words.
        #[arg(long = "base-fraction", default_value_t = 0.15)]
        base_fraction: f64,
    },
    /// Build the statistical splitter's part lexicon from gold trees.
    BuildLexicon {
        /// Tree-format corpus file.
        #[arg(long)]
        input: PathBuf,
        /// Lexicon output file.
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn require_file(path: &Path, what: &str) -> Result<()> {
    if !path.is_file() {
        bail!("{what} file `{}` does not exist", path.display());
    }
    Ok(())
}

fn read_corpus_checked(
    path: &Path,
    format: CorpusFormat,
    what: &str,
) -> Result<Vec<AnnotatedWord>> {
    require_file(path, what)?;
    read_corpus_file(path, format)
        .with_context(|| format!("reading {what} corpus `{}`", path.display()))
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Partition {
            input,
            format,
            seed,
            outdir,
        } => cmd_partition(&input, format.into(), seed, &outdir),
        Command::Train {
            train,
            val,
            format,
            flags,
            out,
            history,
        } => cmd_train(
            &train,
            &val,
            format.into(),
            &flags,
            &out,
            history.as_deref(),
        ),
        Command::Split {
            engine,
            model,
            lexicon,
            input,
            binary_only,
            max_depth,
        } => cmd_split(engine, model, lexicon, input, binary_only, max_depth),
        Command::Eval {
            engine,
            model,
            lexicon,
            predictions,
            test,
            format,
            out,
        } => cmd_eval(
            &engine,
            model,
            lexicon,
            predictions,
            &test,
            format,
            out.as_deref(),
        ),
        Command::Curve {
            train,
            val,
            test,
            format,
            freqs,
            sizes,
            flags,
            out,
        } => cmd_curve(
            &train,
            &val,
            &test,
            format.into(),
            &freqs,
            &sizes,
            &flags,
            &out,
        ),
        Command::GenSynth {
            words,
            seed,
            format,
            out,
            freqs_out,
            novel,
            novel_out,
            base_fraction,
        } => cmd_gen_synth(
            words,
            seed,
            format.into(),
            &out,
            freqs_out.as_deref(),
            novel,
            novel_out.as_deref(),
            base_fraction,
        ),
        Command::BuildLexicon { input, out } => cmd_build_lexicon(&input, &out),
    }
}

fn cmd_partition(input: &Path, format: CorpusFormat, seed: u64, outdir: &Path) -> Result<()> {
    let words = read_corpus_checked(input, format, "input")?;
    let (words, conflicts) = deduplicate(words);
    if !conflicts.is_empty() {
        eprintln!(
            "note: dropped {} conflicting analyses (first analysis kept)",
            conflicts.len()
        );
        for c in &conflicts {
            eprintln!("  {}: kept `{}`, dropped `{}`", c.form, c.kept, c.dropped);
        }
    }
    let parts = partition(&words, seed)?;
    std::fs::create_dir_all(outdir)
        .with_context(|| format!("creating output directory `{}`", outdir.display()))?;
    let names = [
        ("train.tsv", &parts.train),
        ("val.tsv", &parts.validation),
        ("test.tsv", &parts.test),
    ];
    for (name, set) in names {
        write_corpus_file(&outdir.join(name), set, format, Some(seed))?;
    }
    println!("partitioned {} words (seed {seed})", words.len());
    println!(
        "{:<12}{:>8}{:>8}{:>10}{:>14}",
        "set", "words", "base", "compound", "base share"
    );
    for (name, set) in parts.sets() {
        let base = set.iter().filter(|w| !w.is_compound()).count();
        let compound = set.len() - base;
        println!(
            "{name:<12}{:>8}{base:>8}{compound:>10}{:>14}",
            set.len(),
            percent(base_fraction(set).unwrap_or(0.0))
        );
    }
    Ok(())
}

fn cmd_train(
    train: &Path,
    val: &Path,
    format: CorpusFormat,
    flags: &TrainFlags,
    out: &Path,
    history_path: Option<&Path>,
) -> Result<()> {
    let train_words = read_corpus_checked(train, format, "train")?;
    let val_words = read_corpus_checked(val, format, "validation")?;
    let config = flags.to_config();
    let (model, history) = neural::train(config, &train_words, &val_words)?;
    if history.skipped_train > 0 || history.skipped_val > 0 {
        eprintln!(
            "warning: skipped {} train / {} validation words over {} characters",
            history.skipped_train, history.skipped_val, flags.max_len
        );
    }
    neural::save_model_file(out, &model)?;
    if let Some(path) = history_path {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "# seed: {}", flags.seed)?;
        for line in history_lines(&history) {
            writeln!(w, "{line}")?;
        }
        w.flush()?;
    }
    println!(
        "trained {} epochs (stopped {}), best validation accuracy {} at epoch {}",
        history.epochs.len(),
        if history.stopped_early {
            "early"
        } else {
            "at the cap"
        },
        percent(history.best_val_accuracy),
        history.best_epoch
    );
    println!("model written to {}", out.display());
    Ok(())
}

enum LoadedEngine {
    Bilstm(Box<TrainedModel>),
    Kvistur1(PartLexicon),
}

impl LoadedEngine {
    fn load(engine: Engine, model: Option<&Path>, lexicon: Option<&Path>) -> Result<Self> {
        match engine {
            Engine::Bilstm => {
                let path = model.ok_or_else(|| anyhow!("--engine bilstm requires --model"))?;
                require_file(path, "model")?;
                Ok(LoadedEngine::Bilstm(Box::new(neural::load_model_file(
                    path,
                )?)))
            }
            Engine::Kvistur1 => {
                let path =
                    lexicon.ok_or_else(|| anyhow!("--engine kvistur1 requires --lexicon"))?;
                require_file(path, "lexicon")?;
                Ok(LoadedEngine::Kvistur1(PartLexicon::read_file(path)?))
            }
        }
    }

    fn splitter(&self) -> Box<dyn BinarySplitter + '_> {
        match self {
            LoadedEngine::Bilstm(model) => Box::new(OverLengthAware { model }),
            LoadedEngine::Kvistur1(lexicon) => Box::new(LexiconSplitter::new(lexicon)),
        }
    }

    fn max_len(&self) -> Option<usize> {
        match self {
            LoadedEngine::Bilstm(model) => Some(model.config.max_len),
            LoadedEngine::Kvistur1(_) => None,
        }
    }
}

/// The neural splitter, with over-length substrings left unsplit.
struct OverLengthAware<'a> {
    model: &'a TrainedModel,
}

impl BinarySplitter for OverLengthAware<'_> {
    fn split_point(&self, form: &str) -> Option<usize> {
        self.model.predict_split(form).unwrap_or(None)
    }
}

fn read_words(input: Option<&Path>) -> Result<Vec<String>> {
    let reader: Box<dyn Read> = match input {
        Some(path) => {
            require_file(path, "input")?;
            Box::new(File::open(path)?)
        }
        None => Box::new(std::io::stdin()),
    };
    let mut words = Vec::new();
    for line in BufReader::new(reader).lines() {
        let line = line?;
        let word = corpus::normalize_line(&line);
        if !word.is_empty() {
            words.push(word);
        }
    }
    Ok(words)
}

fn cmd_split(
    engine: Engine,
    model: Option<PathBuf>,
    lexicon: Option<PathBuf>,
    input: Option<PathBuf>,
    binary_only: bool,
    max_depth: usize,
) -> Result<()> {
    let loaded = LoadedEngine::load(engine, model.as_deref(), lexicon.as_deref())?;
    let splitter = loaded.splitter();
    let words = read_words(input.as_deref())?;
    let stdout = std::io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    for word in &words {
        if let Some(max_len) = loaded.max_len() {
            if word.chars().count() > max_len {
                eprintln!("warning: `{word}` exceeds {max_len} characters; left unsplit");
                if binary_only {
                    writeln!(out, "{word}\t0")?;
                } else {
                    writeln!(out, "{word}\t{word}")?;
                }
                continue;
            }
        }
        if binary_only {
            let idx = splitter.split_point(word).unwrap_or(0);
            writeln!(out, "{word}\t{idx}")?;
        } else {
            let tree = derive_tree(splitter.as_ref(), word, max_depth)?;
            writeln!(out, "{word}\t{}", tree.render())?;
        }
    }
    out.flush()?;
    Ok(())
}

fn read_predictions(path: &Path) -> Result<Vec<Option<usize>>> {
    require_file(path, "predictions")?;
    let mut preds = Vec::new();
    for (i, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let line = line?;
        let trimmed = line.trim_end();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split('\t').collect();
        if fields.len() != 2 {
            bail!("predictions line {}: expected `form<TAB>index`", i + 1);
        }
        let idx: usize = fields[1]
            .parse()
            .with_context(|| format!("predictions line {}: bad index `{}`", i + 1, fields[1]))?;
        preds.push(if idx == 0 { None } else { Some(idx) });
    }
    Ok(preds)
}

fn cmd_eval(
    engine: &str,
    model: Option<PathBuf>,
    lexicon: Option<PathBuf>,
    predictions: Option<PathBuf>,
    test: &Path,
    format: FormatArg,
    out: Option<&Path>,
) -> Result<()> {
    let corpus_format: CorpusFormat = format.into();
    let gold = read_corpus_checked(test, corpus_format, "test")?;

    type EvalInputs = (Vec<Option<usize>>, Option<Vec<ConstituentTree>>, Option<u64>);
    let (predictions, trees, model_seed): EvalInputs = match engine {
        "oracle" => (
            gold.iter()
                .map(|w| w.top_level_split().split_index())
                .collect(),
            Some(gold.iter().map(|w| w.structure().clone()).collect()),
            None,
        ),
        "file" => {
            let path =
                predictions.ok_or_else(|| anyhow!("--engine file requires --predictions"))?;
            let preds = read_predictions(&path)?;
            if preds.len() != gold.len() {
                bail!(
                    "predictions file has {} entries but the test corpus has {} words",
                    preds.len(),
                    gold.len()
                );
            }
            (preds, None, None)
        }
        "bilstm" | "kvistur1" => {
            let engine = if engine == "bilstm" {
                Engine::Bilstm
            } else {
                Engine::Kvistur1
            };
            let loaded = LoadedEngine::load(engine, model.as_deref(), lexicon.as_deref())?;
            let seed = match &loaded {
                LoadedEngine::Bilstm(m) => Some(m.config.seed),
                LoadedEngine::Kvistur1(_) => None,
            };
            let splitter = loaded.splitter();
            let mut preds = Vec::with_capacity(gold.len());
            let mut trees = Vec::with_capacity(gold.len());
            let mut over_length = 0usize;
            for w in &gold {
                if loaded.max_len().is_some_and(|m| w.char_len() > m) {
                    over_length += 1;
                    preds.push(None);
                    trees.push(ConstituentTree::leaf(w.form()));
                    continue;
                }
                preds.push(splitter.split_point(w.form()));
                trees.push(derive_tree(splitter.as_ref(), w.form(), DEFAULT_MAX_DEPTH)?);
            }
            if over_length > 0 {
                eprintln!("warning: {over_length} test words over the model's input length were scored unsplit");
            }
            (preds, Some(trees), seed)
        }
        other => bail!("unknown engine `{other}` (expected bilstm, kvistur1, oracle or file)"),
    };

    let report = evaluate(&predictions, &gold)?;
    print!("{}", report_table(&report));
    let mut lines = vec![format!("engine\t{engine}")];
    if let Some(seed) = model_seed {
        lines.push(format!("model_seed\t{seed}"));
    }
    lines.extend(report_lines(&report));
    if let (Some(trees), CorpusFormat::Tree) = (&trees, corpus_format) {
        let exact = tree_exact_match(trees, &gold)?;
        println!("{:<22}{:>10}", "tree exact match", percent(exact));
        lines.push(format!("tree_exact_match\t{exact}"));
    }
    if let Some(path) = out {
        let mut w = BufWriter::new(File::create(path)?);
        for line in &lines {
            writeln!(w, "{line}")?;
        }
        w.flush()?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_curve(
    train: &Path,
    val: &Path,
    test: &Path,
    format: CorpusFormat,
    freqs: &Path,
    sizes: &[usize],
    flags: &TrainFlags,
    out: &Path,
) -> Result<()> {
    if sizes.is_empty() {
        bail!("--sizes must list at least one subset size");
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        bail!("--sizes must be strictly ascending");
    }
    let train_words = read_corpus_checked(train, format, "train")?;
    let val_words = read_corpus_checked(val, format, "validation")?;
    let test_words = read_corpus_checked(test, format, "test")?;
    require_file(freqs, "frequency")?;
    let freqs = read_frequency_file(freqs)?;
    let config = flags.to_config();
    let points = learning_curve(
        &config,
        &train_words,
        &val_words,
        &test_words,
        &freqs,
        sizes,
    )?;
    let mut w = BufWriter::new(File::create(out)?);
    for line in curve_lines(&points, flags.seed) {
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    println!("{:<10}{:>16}{:>14}", "size", "test accuracy", "epochs");
    for p in &points {
        println!(
            "{:<10}{:>16}{:>14}",
            p.size,
            percent(p.test_accuracy),
            p.epochs_run
        );
    }
    println!("curve written to {}", out.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_gen_synth(
    words: usize,
    seed: u64,
    format: CorpusFormat,
    out: &Path,
    freqs_out: Option<&Path>,
    novel: usize,
    novel_out: Option<&Path>,
    base_fraction: f64,
) -> Result<()> {
    let corpus = generate(&SynthConfig {
        n_words: words,
        novel_compounds: novel,
        seed,
        base_fraction,
        ..SynthConfig::default()
    });
    write_corpus_file(out, &corpus.words, format, Some(seed))?;
    println!("wrote {} words to {}", corpus.words.len(), out.display());
    if let Some(path) = novel_out {
        write_corpus_file(path, &corpus.novel, format, Some(seed))?;
        println!(
            "wrote {} held-out-part compounds to {}",
            corpus.novel.len(),
            path.display()
        );
    } else if novel > 0 {
        bail!("--novel requires --novel-out");
    }
    if let Some(path) = freqs_out {
        let mut entries: Vec<(&String, &u64)> = corpus.frequencies.iter().collect();
        entries.sort();
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "# seed: {seed}")?;
        for (form, count) in entries {
            writeln!(w, "{form}\t{count}")?;
        }
        w.flush()?;
        println!("wrote frequencies to {}", path.display());
    }
    Ok(())
}

fn cmd_build_lexicon(input: &Path, out: &Path) -> Result<()> {
    let words = read_corpus_checked(input, CorpusFormat::Tree, "input")?;
    let lexicon = PartLexicon::build(&words);
    lexicon.write_file(out)?;
    println!(
        "lexicon: {} modifiers, {} heads, {} pairs -> {}",
        lexicon.modifier_entries(),
        lexicon.head_entries(),
        lexicon.pair_entries(),
        out.display()
    );
    Ok(())
}
