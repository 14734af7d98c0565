//! Shared test oracles, independent of the implementations they check.
#![allow(dead_code)]

use decompound::baseline::PartLexicon;
use decompound::corpus::parse_tree_line;
use decompound::neural::{DirectionWeights, LayerWeights, Matrix, ModelParameters};
use decompound::{AnnotatedWord, ConstituentTree};

/// A small corpus with overlapping parts so that many forms have several
/// decompositions and several tree shapes, exercising the tie-breaks. The
/// nested entries put compound surfaces into both role maps, which is what
/// makes three- and four-part candidates scorable.
pub fn toy_corpus() -> Vec<AnnotatedWord> {
    let lines = [
        "fótbol\tL1\t(fót bol)",
        "fótvél\tL2\t(fót vél)",
        "vélbol\tL3\t(vél bol)",
        "bolvél\tL4\t(bol vél)",
        "skibol\tL5\t(ski bol)",
        "fótskibol\tL6\t(fót (ski bol))",
        "vélskibol\tL7\t((vél ski) bol)",
        "ormvél\tL8\t(orm vél)",
        "skiorm\tL9\t(ski orm)",
        "fótorm\tL10\t(fót orm)",
        "fótbolvél\tL11\t((fót bol) vél)",
        "ormbolvél\tL12\t(orm (bol vél))",
        "skivélorm\tL13\t((ski vél) orm)",
        "fótormbol\tL14\t(fót (orm bol))",
        "bolfótvél\tL15\t(bol (fót vél))",
        "nagrek\tL16\t(nag rek)",
        "bolnagrek\tL17\t(bol (nag rek))",
        "fótnag\tL18\t(fót nag)",
        "bol\tL19\tbol",
        "vél\tL20\tvél",
        "ski\tL21\tski",
        "orm\tL22\torm",
    ];
    lines
        .iter()
        .map(|l| parse_tree_line(l, 1).unwrap())
        .collect()
}

/// Every string known to the lexicon in either role.
pub fn lexicon_parts(corpus: &[AnnotatedWord]) -> Vec<String> {
    let mut parts: Vec<String> = Vec::new();
    fn collect(t: &ConstituentTree, out: &mut Vec<String>) {
        let s = t.surface();
        if !out.contains(&s) {
            out.push(s);
        }
        if let ConstituentTree::Node(l, r) = t {
            collect(l, out);
            collect(r, out);
        }
    }
    for w in corpus {
        match w.structure() {
            ConstituentTree::Leaf(s) => {
                if !parts.contains(s) {
                    parts.push(s.clone());
                }
            }
            ConstituentTree::Node(l, r) => {
                collect(l, &mut parts);
                collect(r, &mut parts);
            }
        }
    }
    parts
}

/// Plain scalar sigmoid for the oracle path.
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Straightforward scalar LSTM step, written directly from the cell
/// equations with no shared code: gates i, f, g, o in row blocks,
/// `c = f*c_prev + i*g`, `h = o*tanh(c)`.
pub fn oracle_lstm_step(
    weights: &DirectionWeights,
    x: &[f64],
    h_prev: &[f64],
    c_prev: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let hidden = h_prev.len();
    let pre = |row: usize| -> f64 {
        let mut z = weights.bias[row];
        for (col, &xv) in x.iter().enumerate() {
            z += weights.w_input.row(row)[col] * xv;
        }
        for (col, &hv) in h_prev.iter().enumerate() {
            z += weights.w_recur.row(row)[col] * hv;
        }
        z
    };
    let mut h = vec![0.0; hidden];
    let mut c = vec![0.0; hidden];
    for j in 0..hidden {
        let i_gate = sigmoid(pre(j));
        let f_gate = sigmoid(pre(hidden + j));
        let g_gate = pre(2 * hidden + j).tanh();
        let o_gate = sigmoid(pre(3 * hidden + j));
        c[j] = f_gate * c_prev[j] + i_gate * g_gate;
        h[j] = o_gate * c[j].tanh();
    }
    (h, c)
}

fn oracle_run_direction(
    weights: &DirectionWeights,
    inputs: &[Vec<f64>],
    reversed: bool,
    hidden: usize,
) -> Vec<Vec<f64>> {
    let len = inputs.len();
    let mut states = vec![Vec::new(); len];
    let mut h = vec![0.0; hidden];
    let mut c = vec![0.0; hidden];
    let order: Vec<usize> = if reversed {
        (0..len).rev().collect()
    } else {
        (0..len).collect()
    };
    for t in order {
        let (nh, nc) = oracle_lstm_step(weights, &inputs[t], &h, &c);
        h = nh;
        c = nc;
        states[t] = h.clone();
    }
    states
}

/// Independent straightforward forward pass over real character indices:
/// embeddings in, one or two bidirectional layers, sigmoid output per
/// position.
pub fn oracle_forward(params: &ModelParameters, indices: &[usize]) -> Vec<f64> {
    let hidden = params.out_weight.len() / 2;
    let mut inputs: Vec<Vec<f64>> = indices
        .iter()
        .map(|&i| params.embedding.row(i).to_vec())
        .collect();
    for LayerWeights { forward, backward } in &params.layers {
        let fwd = oracle_run_direction(forward, &inputs, false, hidden);
        let bwd = oracle_run_direction(backward, &inputs, true, hidden);
        inputs = fwd
            .into_iter()
            .zip(bwd)
            .map(|(f, b)| {
                let mut v = f;
                v.extend(b);
                v
            })
            .collect();
    }
    inputs
        .iter()
        .map(|top| {
            let mut z = params.out_bias;
            for (w, v) in params.out_weight.iter().zip(top) {
                z += w * v;
            }
            sigmoid(z)
        })
        .collect()
}

/// Deterministic small weight values for fixtures: a fixed affine sweep, no
/// randomness.
pub fn sweep_matrix(rows: usize, cols: usize, start: f64, step: f64) -> Matrix {
    let data: Vec<f64> = (0..rows * cols).map(|i| start + step * i as f64).collect();
    Matrix::from_vec(rows, cols, data).unwrap()
}

/// Exhaustive enumeration of every binary tree over `form` whose leaves are
/// all known parts. No memoization, no pruning: the reference the dynamic
/// program is checked against.
pub fn enumerate_trees(form: &[char], lexicon: &PartLexicon) -> Vec<ConstituentTree> {
    let surface: String = form.iter().collect();
    let mut out = Vec::new();
    if lexicon.knows_part(&surface) {
        out.push(ConstituentTree::leaf(surface));
    }
    for k in 1..form.len() {
        for left in enumerate_trees(&form[..k], lexicon) {
            for right in enumerate_trees(&form[k..], lexicon) {
                out.push(ConstituentTree::node(left.clone(), right.clone()));
            }
        }
    }
    out
}

/// Brute-force reference for `best_structure`: score every enumerated tree
/// with the lexicon's own formula, drop non-positive scores and the
/// unsplit single-leaf reading, apply the same ordering (score desc, leaf
/// count asc, bracketing asc), and compete against the unsplit score.
pub fn brute_force_best(form: &str, lexicon: &PartLexicon) -> Option<(ConstituentTree, f64)> {
    let chars: Vec<char> = form.chars().collect();
    let mut best: Option<(ConstituentTree, f64, usize, String)> = None;
    for tree in enumerate_trees(&chars, lexicon) {
        if tree.is_leaf() {
            continue;
        }
        let score = lexicon.tree_score(&tree);
        if score <= 0.0 {
            continue;
        }
        let leaves = tree.leaves().len();
        let render = tree.render();
        let replace = match &best {
            None => true,
            Some((_, bs, bl, br)) => {
                if score != *bs {
                    score > *bs
                } else if leaves != *bl {
                    leaves < *bl
                } else {
                    render < *br
                }
            }
        };
        if replace {
            best = Some((tree, score, leaves, render));
        }
    }
    let (tree, score, _, _) = best?;
    if score > lexicon.unsplit_score(form) {
        Some((tree, score))
    } else {
        None
    }
}

/// All strings of at most `max_chars` characters that can be written as a
/// concatenation of known parts (the candidate inputs for oracle
/// equivalence).
pub fn composable_forms(parts: &[String], max_chars: usize) -> Vec<String> {
    let mut out = std::collections::BTreeSet::new();
    let mut stack: Vec<String> = vec![String::new()];
    while let Some(prefix) = stack.pop() {
        for part in parts {
            let candidate = format!("{prefix}{part}");
            if candidate.chars().count() > max_chars {
                continue;
            }
            out.insert(candidate.clone());
            stack.push(candidate);
        }
    }
    out.into_iter().collect()
}
