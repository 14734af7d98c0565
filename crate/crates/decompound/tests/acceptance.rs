//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its measurements (visible with `--nocapture`). Together they pin the
//! behaviors the toolkit promises: exact gradients, memorization and
//! out-of-vocabulary generalization of the tagger, oracle-exact baseline
//! search, the published metric identities, partition guarantees, tree
//! derivation, early stopping, bit-exact serialization and learning-curve
//! reproducibility.

mod support;

use std::collections::HashSet;
use std::time::Instant;

use decompound::baseline::{best_structure, LexiconSplitter, PartLexicon};
use decompound::corpus::{
    check_partition, partition, write_corpus_file, CorpusFormat, SplitVector,
};
use decompound::eval::{curve_lines, evaluate, evaluate_model, f_score, learning_curve, percent};
use decompound::neural::{
    backward, forward, load_model, numerical_gradients, save_model, train, train_with_validator,
    CharVocab, EncodedWord, ModelConfig, ModelParameters,
};
use decompound::rng::SplitMix64;
use decompound::splitter::{derive_tree, BinarySplitter, DEFAULT_MAX_DEPTH};
use decompound::synth::{generate, SynthConfig};
use support::{brute_force_best, composable_forms, lexicon_parts, toy_corpus};

/// Criterion 1: analytic gradients match central finite differences
/// (step 1e-4) within relative error 1e-4 (absolute floor 1e-7) on ten
/// random tiny models, one- and two-layer, in under 30 seconds.
#[test]
fn acceptance_01_gradient_correctness() {
    let start = Instant::now();
    let mut checked = 0usize;
    for seed in 0..10u64 {
        let layers = 1 + (seed % 2) as usize;
        let mut rng = SplitMix64::new(9000 + seed);
        let config = ModelConfig {
            embed_dim: 2 + (seed % 3) as usize,  // <= 4
            hidden_dim: 2 + (seed % 4) as usize, // <= 5
            num_layers: layers,
            max_len: 8,
            ..ModelConfig::default()
        };
        let vocab = CharVocab::from_forms(["abcdefgh"]);
        let params = ModelParameters::init(&config, vocab.size(), &mut rng);

        // Three words of length <= 8 with mixed split/base targets.
        let mut batch = Vec::new();
        for w in 0..3 {
            let len = 2 + rng.below(7); // 2..8
            let indices: Vec<usize> = (0..len).map(|_| rng.below(vocab.size() - 2) + 2).collect();
            let target = if w % 2 == 0 {
                SplitVector::split(len, 1 + rng.below(len - 1)).unwrap()
            } else {
                SplitVector::base(len)
            };
            let mut enc_indices = vec![0usize; config.max_len];
            let mut mask = vec![false; config.max_len];
            for (i, &idx) in indices.iter().enumerate() {
                enc_indices[i] = idx;
                mask[i] = true;
            }
            batch.push(EncodedWord {
                indices: enc_indices,
                mask,
                target,
            });
        }
        let targets: Vec<SplitVector> = batch.iter().map(|e| e.target).collect();
        let (_, trace) = forward(&params, &batch).unwrap();
        let analytic = backward(&params, &trace, &targets).unwrap();
        let numeric = numerical_gradients(&params, &batch, 1e-4).unwrap();
        for ((name, a), (_, n)) in analytic.named_slices().iter().zip(numeric.named_slices()) {
            for (i, (&av, &nv)) in a.iter().zip(n.iter()).enumerate() {
                let tol = 1e-7f64.max(1e-4 * av.abs().max(nv.abs()));
                assert!(
                    (av - nv).abs() <= tol,
                    "seed {seed} {name}[{i}]: analytic {av} vs numeric {nv}"
                );
                checked += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 30, "gradient check took {elapsed:?}");
    println!(
        "acceptance 01 gradient-correctness: PASS ({checked} parameters over 10 models in {elapsed:?})"
    );
}

/// Criterion 2: the default configuration memorizes a 200-word synthetic
/// corpus to >= 99% training accuracy within 100 epochs, in under 5 minutes.
#[test]
fn acceptance_02_memorization() {
    let start = Instant::now();
    let corpus = generate(&SynthConfig {
        n_words: 200,
        seed: 1234,
        ..SynthConfig::default()
    });
    let config = ModelConfig {
        seed: 7,
        ..ModelConfig::default()
    };
    assert_eq!(config.embed_dim, 128);
    assert_eq!(config.hidden_dim, 128);
    assert_eq!(config.max_epochs, 100);
    // Validating on the training set makes val_accuracy the training
    // accuracy the criterion is about.
    let (_, history) = train(config, &corpus.words, &corpus.words).unwrap();
    let first_hit = history
        .epochs
        .iter()
        .find(|e| e.val_accuracy >= 0.99)
        .map(|e| e.epoch);
    let elapsed = start.elapsed();
    assert!(
        first_hit.is_some_and(|e| e <= 100),
        "never reached 99% training accuracy; best {:.4} at epoch {}",
        history.best_val_accuracy,
        history.best_epoch
    );
    assert!(elapsed.as_secs() < 300, "memorization took {elapsed:?}");
    println!(
        "acceptance 02 memorization: PASS (>=99% at epoch {}, best {:.4}, {} epochs in {elapsed:?})",
        first_hit.unwrap(),
        history.best_val_accuracy,
        history.epochs.len()
    );
}

/// Criterion 3: on a 5,000-word synthetic corpus whose test split contains
/// compounds with one never-seen constituent part, the tagger beats the
/// lexicon baseline by at least 10 percentage points of test accuracy.
#[test]
fn acceptance_03_generalization_direction() {
    let corpus = generate(&SynthConfig {
        n_words: 4400,
        novel_compounds: 600,
        seed: 31,
        ..SynthConfig::default()
    });
    assert_eq!(corpus.words.len() + corpus.novel.len(), 5000);
    let parts = partition(&corpus.words, 5).unwrap();
    let mut test = parts.test.clone();
    test.extend(corpus.novel.iter().cloned());

    let lexicon = PartLexicon::build(&parts.train);
    let splitter = LexiconSplitter::new(&lexicon);
    let baseline_preds: Vec<Option<usize>> = test
        .iter()
        .map(|w| splitter.split_point(w.form()))
        .collect();
    let baseline = evaluate(&baseline_preds, &test).unwrap();

    // The baseline cannot split any novel-part compound correctly: the
    // modifier is unknown in both role maps.
    let novel_preds: Vec<Option<usize>> = corpus
        .novel
        .iter()
        .map(|w| splitter.split_point(w.form()))
        .collect();
    let baseline_novel = evaluate(&novel_preds, &corpus.novel).unwrap();
    assert_eq!(
        baseline_novel.n_correct_splits, 0,
        "baseline should fail every unknown-part compound"
    );

    let config = ModelConfig {
        embed_dim: 24,
        hidden_dim: 32,
        num_layers: 1,
        max_len: 40,
        learning_rate: 0.003,
        max_epochs: 40,
        patience: 10,
        batch_size: 32,
        seed: 77,
    };
    let (model, _) = train(config, &parts.train, &parts.validation).unwrap();
    let neural = evaluate_model(&model, &test).unwrap();

    let margin = neural.accuracy - baseline.accuracy;
    assert!(
        margin >= 0.10,
        "margin {margin:.4} (neural {:.4} vs baseline {:.4})",
        neural.accuracy,
        baseline.accuracy
    );
    println!(
        "acceptance 03 generalization-direction: PASS (neural {} vs baseline {}, margin {:.1}pp)",
        percent(neural.accuracy),
        percent(baseline.accuracy),
        margin * 100.0
    );
}

/// Criterion 4: the dynamic program equals the exhaustive brute-force
/// enumerator on every composable form of at most 12 characters over a
/// 20-entry toy lexicon, including scores and tie-breaks.
#[test]
fn acceptance_04_baseline_oracle_equivalence() {
    let corpus = toy_corpus();
    let lexicon = PartLexicon::build(&corpus);
    let parts = lexicon_parts(&corpus);
    assert_eq!(
        lexicon.modifier_entries() + lexicon.head_entries(),
        20,
        "toy lexicon should carry 20 role entries"
    );

    let forms = composable_forms(&parts, 12);
    let mut agreements = 0usize;
    let mut splits = 0usize;
    for form in &forms {
        let dp = best_structure(form, &lexicon);
        let brute = brute_force_best(form, &lexicon);
        match (&dp, &brute) {
            (None, None) => {}
            (Some(d), Some((tree, score))) => {
                assert_eq!(d.tree.render(), tree.render(), "trees differ for `{form}`");
                assert_eq!(
                    d.score.to_bits(),
                    score.to_bits(),
                    "scores differ for `{form}`"
                );
                splits += 1;
            }
            _ => panic!("split/none disagreement for `{form}`"),
        }
        agreements += 1;
    }
    println!(
        "acceptance 04 baseline-oracle-equivalence: PASS ({agreements} forms, {splits} with splits)"
    );
}

/// Criterion 5: the published F-score identities reproduce exactly at
/// 2-decimal rounding, and the hand-counted confusion fixture yields
/// accuracy 0.7, precision 2/3, recall 2/3.
#[test]
fn acceptance_05_metric_fixtures() {
    assert_eq!(percent(f_score(0.9373, 0.9287)), "93.30%");
    assert_eq!(percent(f_score(0.9830, 0.9726)), "97.78%");

    let flat = |form: &str, idx: usize| {
        decompound::corpus::parse_flat_line(&format!("{form}\tG{form}\t{idx}"), 1).unwrap()
    };
    let gold = vec![
        flat("abcd", 2),
        flat("cdef", 2),
        flat("efgh", 2),
        flat("ghij", 2),
        flat("ijkl", 2),
        flat("klmn", 2),
        flat("noor", 0),
        flat("oppq", 0),
        flat("qrrs", 0),
        flat("sttu", 0),
    ];
    let predictions = vec![
        Some(2),
        Some(2),
        Some(2),
        Some(2),
        Some(3),
        None,
        None,
        None,
        None,
        Some(1),
    ];
    let report = evaluate(&predictions, &gold).unwrap();
    assert_eq!(report.accuracy, 0.7);
    assert_eq!(report.precision, Some(4.0 / 6.0));
    assert_eq!(report.recall, Some(4.0 / 6.0));
    println!(
        "acceptance 05 metric-fixtures: PASS (93.30 / 97.78 / accuracy {}, precision and recall 4/6)",
        report.accuracy
    );
}

/// Criterion 6: partitioning a 10,000-form corpus honors disjointness,
/// unbroken lemma groups, 80/10/10 class stratification within +-0.5pp,
/// and is byte-identical across reruns with one seed.
#[test]
fn acceptance_06_partition_invariants() {
    let corpus = generate(&SynthConfig {
        n_words: 10_000,
        seed: 99,
        ..SynthConfig::default()
    });
    let p1 = partition(&corpus.words, 7).unwrap();
    let p2 = partition(&corpus.words, 7).unwrap();
    check_partition(&p1).unwrap();

    // Every word lands in exactly one set.
    let total = p1.train.len() + p1.validation.len() + p1.test.len();
    assert_eq!(total, corpus.words.len());
    let mut forms = HashSet::new();
    for (_, set) in p1.sets() {
        for w in set {
            assert!(forms.insert(w.form().to_string()));
        }
    }

    // Class-wise 80/10/10 within +-0.5pp.
    let count = |set: &[decompound::AnnotatedWord], compound: bool| {
        set.iter().filter(|w| w.is_compound() == compound).count()
    };
    for compound in [false, true] {
        let class_total = count(&corpus.words, compound) as f64;
        for ((_, set), target) in p1.sets().iter().zip([0.80, 0.10, 0.10]) {
            let share = count(set, compound) as f64 / class_total;
            assert!(
                (share - target).abs() <= 0.005,
                "class compound={compound}: share {share:.4} vs target {target}"
            );
        }
    }

    // Byte-identical partition files for a repeated seed.
    let dir = tempfile::tempdir().unwrap();
    let mut bytes = Vec::new();
    for (run, p) in [(0, &p1), (1, &p2)] {
        let mut run_bytes = Vec::new();
        for (name, set) in p.sets() {
            let path = dir.path().join(format!("{run}_{name}.tsv"));
            write_corpus_file(&path, set, CorpusFormat::Tree, Some(7)).unwrap();
            run_bytes.push(std::fs::read(&path).unwrap());
        }
        bytes.push(run_bytes);
    }
    assert_eq!(bytes[0], bytes[1], "partition files differ between reruns");
    println!(
        "acceptance 06 partition-invariants: PASS ({} words: {}/{}/{} split, byte-identical reruns)",
        corpus.words.len(),
        p1.train.len(),
        p1.validation.len(),
        p1.test.len()
    );
}

/// Criterion 7: recursive derivation with a scripted oracle splitter
/// rebuilds the reference nested tree exactly, and leaves concatenate to
/// the input over 1,000 randomized adversarial splitters.
#[test]
fn acceptance_07_tree_derivation() {
    let oracle = |form: &str| -> Option<usize> {
        match form {
            "heildarraforkuþörf" => Some(7),
            "raforkuþörf" => Some(7),
            "raforku" => Some(3),
            _ => None,
        }
    };
    let tree = derive_tree(&oracle, "heildarraforkuþörf", DEFAULT_MAX_DEPTH).unwrap();
    assert_eq!(tree.render(), "(heildar ((raf orku) þörf))");
    assert_eq!(tree.leaves(), vec!["heildar", "raf", "orku", "þörf"]);

    let inputs = ["heildarraforkuþörf", "fótbolti", "aaaa", "þörf", "ab"];
    for trial in 0..1000u64 {
        let rng = std::cell::RefCell::new(SplitMix64::new(trial));
        let adversarial = |s: &str| -> Option<usize> {
            let len = s.chars().count();
            let mut rng = rng.borrow_mut();
            match rng.below(4) {
                0 => None,
                1 => Some(1),
                2 => Some(len.saturating_sub(1).max(1)),
                _ => Some(1 + rng.below((len - 1).max(1))),
            }
        };
        let form = inputs[(trial % inputs.len() as u64) as usize];
        let tree = derive_tree(&adversarial, form, DEFAULT_MAX_DEPTH).unwrap();
        assert_eq!(tree.surface(), form, "trial {trial}");
        assert!(tree.depth() <= DEFAULT_MAX_DEPTH);
    }
    println!("acceptance 07 tree-derivation: PASS (reference tree exact, 1000 adversarial trials)");
}

/// Criterion 8: a scripted validation-accuracy sequence peaking at epoch 7
/// stops training at epoch 27 and returns the epoch-7 snapshot.
#[test]
fn acceptance_08_early_stopping() {
    let corpus = generate(&SynthConfig {
        n_words: 30,
        seed: 55,
        ..SynthConfig::default()
    });
    let config = ModelConfig {
        embed_dim: 4,
        hidden_dim: 4,
        num_layers: 1,
        max_len: 40,
        learning_rate: 0.001,
        max_epochs: 100,
        patience: 20,
        batch_size: 8,
        seed: 3,
    };
    let snapshot = std::cell::RefCell::new(None::<ModelParameters>);
    let (model, history) =
        train_with_validator(config, &corpus.words, &corpus.words, |params, _, epoch| {
            if epoch == 7 {
                *snapshot.borrow_mut() = Some(params.clone());
            }
            if epoch <= 7 {
                epoch as f64 / 10.0
            } else {
                0.05
            }
        })
        .unwrap();
    assert_eq!(history.epochs.len(), 27, "expected to stop at epoch 27");
    assert_eq!(history.best_epoch, 7);
    assert!(history.stopped_early);
    assert_eq!(model.params, snapshot.into_inner().unwrap());
    println!("acceptance 08 early-stopping: PASS (stopped at epoch 27, epoch-7 snapshot returned)");
}

/// Criterion 9: save -> load -> predict is bitwise identical to pre-save
/// predictions on 100 probe words.
#[test]
fn acceptance_09_serialization() {
    let corpus = generate(&SynthConfig {
        n_words: 150,
        seed: 321,
        ..SynthConfig::default()
    });
    let config = ModelConfig {
        embed_dim: 16,
        hidden_dim: 12,
        num_layers: 2,
        max_len: 40,
        learning_rate: 0.003,
        max_epochs: 3,
        patience: 3,
        batch_size: 16,
        seed: 11,
    };
    let (model, _) = train(config, &corpus.words, &corpus.words).unwrap();

    let probes: Vec<&str> = corpus.words.iter().take(100).map(|w| w.form()).collect();
    assert_eq!(probes.len(), 100);
    let before: Vec<Vec<u64>> = probes
        .iter()
        .map(|f| {
            model
                .split_probabilities(f)
                .unwrap()
                .iter()
                .map(|p| p.to_bits())
                .collect()
        })
        .collect();

    let mut buf = Vec::new();
    save_model(&mut buf, &model).unwrap();
    let loaded = load_model(buf.as_slice()).unwrap();
    let after: Vec<Vec<u64>> = probes
        .iter()
        .map(|f| {
            loaded
                .split_probabilities(f)
                .unwrap()
                .iter()
                .map(|p| p.to_bits())
                .collect()
        })
        .collect();
    assert_eq!(before, after, "probabilities changed across save/load");
    println!(
        "acceptance 09 serialization: PASS (100 probe words bitwise identical, {} byte file)",
        buf.len()
    );
}

/// Criterion 10: the learning curve over doubling sizes 250 -> 8000 ends at
/// least as high as it starts, and the curve file is reproducible per seed.
#[test]
fn acceptance_10_learning_curve() {
    let corpus = generate(&SynthConfig {
        n_words: 10_000,
        seed: 424,
        ..SynthConfig::default()
    });
    let parts = partition(&corpus.words, 13).unwrap();
    assert!(
        parts.train.len() >= 8000,
        "train split has {} words",
        parts.train.len()
    );
    let sizes = [250usize, 500, 1000, 2000, 4000, 8000];
    let config = ModelConfig {
        embed_dim: 16,
        hidden_dim: 16,
        num_layers: 1,
        max_len: 40,
        learning_rate: 0.003,
        max_epochs: 10,
        patience: 10,
        batch_size: 32,
        seed: 9,
    };
    let run = || {
        learning_curve(
            &config,
            &parts.train,
            &parts.validation,
            &parts.test,
            &corpus.frequencies,
            &sizes,
        )
        .unwrap()
    };
    let start = Instant::now();
    let points = run();
    let first = points.first().unwrap().test_accuracy;
    let last = points.last().unwrap().test_accuracy;
    assert!(
        last >= first,
        "curve decreased: {first:.4} -> {last:.4} ({points:?})"
    );

    let again = run();
    assert_eq!(
        curve_lines(&points, config.seed),
        curve_lines(&again, config.seed),
        "curve file not reproducible"
    );
    println!(
        "acceptance 10 learning-curve: PASS ({} -> {} over sizes 250..8000, reproduced, {:?})",
        percent(first),
        percent(last),
        start.elapsed()
    );
}
