//! Forward pass, loss and backpropagation through time.
//!
//! The LSTM cell is the standard formulation: gates i, f, g, o with
//! sigmoid/sigmoid/tanh/sigmoid activations, `c = f*c_prev + i*g`,
//! `h = o*tanh(c)`. Both directions of a layer run over the real characters
//! only; padded positions are never touched, so padding can never leak into
//! a prediction and the PAD embedding row receives no gradient.

use crate::corpus::SplitVector;

use super::encode::EncodedWord;
use super::params::{DirectionWeights, Matrix, ModelParameters};
use super::NeuralError;

/// Probabilities are clamped to this range before taking logs in the loss.
const PROB_FLOOR: f64 = 1e-12;

pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// One LSTM step. `bias`, and the rows of `w_input`/`w_recur`, pack the four
/// gates in i, f, g, o order. Returns the new hidden and cell state.
pub fn lstm_cell(
    x: &[f64],
    h_prev: &[f64],
    c_prev: &[f64],
    w_input: &Matrix,
    w_recur: &Matrix,
    bias: &[f64],
) -> Result<(Vec<f64>, Vec<f64>), NeuralError> {
    let hidden = h_prev.len();
    if c_prev.len() != hidden
        || bias.len() != 4 * hidden
        || w_input.rows() != 4 * hidden
        || w_input.cols() != x.len()
        || w_recur.rows() != 4 * hidden
        || w_recur.cols() != hidden
    {
        return Err(NeuralError::Shape(format!(
            "lstm_cell: x={} h={} c={} W={}x{} U={}x{} b={}",
            x.len(),
            h_prev.len(),
            c_prev.len(),
            w_input.rows(),
            w_input.cols(),
            w_recur.rows(),
            w_recur.cols(),
            bias.len()
        )));
    }
    let weights = DirectionWeights {
        w_input: w_input.clone(),
        w_recur: w_recur.clone(),
        bias: bias.to_vec(),
    };
    let step = lstm_step(&weights, x, h_prev, c_prev, hidden);
    Ok((step.h, step.c))
}

struct StepState {
    /// Post-activation gate values, 4*hidden, in i|f|g|o blocks.
    gates: Vec<f64>,
    c: Vec<f64>,
    tanh_c: Vec<f64>,
    h: Vec<f64>,
}

fn lstm_step(
    weights: &DirectionWeights,
    x: &[f64],
    h_prev: &[f64],
    c_prev: &[f64],
    hidden: usize,
) -> StepState {
    let mut gates = weights.bias.clone();
    weights.w_input.matvec_accum(x, &mut gates);
    weights.w_recur.matvec_accum(h_prev, &mut gates);
    for j in 0..hidden {
        gates[j] = sigmoid(gates[j]); // i
        gates[hidden + j] = sigmoid(gates[hidden + j]); // f
        gates[2 * hidden + j] = gates[2 * hidden + j].tanh(); // g
        gates[3 * hidden + j] = sigmoid(gates[3 * hidden + j]); // o
    }
    let mut c = vec![0.0; hidden];
    let mut tanh_c = vec![0.0; hidden];
    let mut h = vec![0.0; hidden];
    for j in 0..hidden {
        c[j] = gates[hidden + j] * c_prev[j] + gates[j] * gates[2 * hidden + j];
        tanh_c[j] = c[j].tanh();
        h[j] = gates[3 * hidden + j] * tanh_c[j];
    }
    StepState {
        gates,
        c,
        tanh_c,
        h,
    }
}

/// Cached activations of one direction of one layer, indexed by absolute
/// character position.
#[derive(Debug, Clone)]
pub(crate) struct DirectionTrace {
    gates: Vec<Vec<f64>>,
    c: Vec<Vec<f64>>,
    tanh_c: Vec<Vec<f64>>,
    h: Vec<Vec<f64>>,
}

impl DirectionTrace {
    pub(crate) fn hidden_at(&self, t: usize) -> &[f64] {
        &self.h[t]
    }
}

#[derive(Debug, Clone)]
pub(crate) struct LayerTrace {
    /// Layer input per position: embedding rows for layer 0, concatenated
    /// bidirectional states below otherwise.
    input: Vec<Vec<f64>>,
    forward: DirectionTrace,
    backward: DirectionTrace,
}

/// Cached activations for one word; everything backpropagation needs.
#[derive(Debug, Clone)]
pub struct WordTrace {
    indices: Vec<usize>,
    layers: Vec<LayerTrace>,
    probs: Vec<f64>,
}

impl WordTrace {
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

/// Cached activations for a batch, paired with the batch that produced it.
#[derive(Debug, Clone)]
pub struct BatchTrace {
    words: Vec<WordTrace>,
}

impl BatchTrace {
    pub fn words(&self) -> &[WordTrace] {
        &self.words
    }
}

fn run_direction(
    weights: &DirectionWeights,
    inputs: &[Vec<f64>],
    reversed: bool,
    hidden: usize,
) -> DirectionTrace {
    let len = inputs.len();
    let mut trace = DirectionTrace {
        gates: vec![Vec::new(); len],
        c: vec![Vec::new(); len],
        tanh_c: vec![Vec::new(); len],
        h: vec![Vec::new(); len],
    };
    let mut h_prev = vec![0.0; hidden];
    let mut c_prev = vec![0.0; hidden];
    let order: Vec<usize> = if reversed {
        (0..len).rev().collect()
    } else {
        (0..len).collect()
    };
    for &t in &order {
        let step = lstm_step(weights, &inputs[t], &h_prev, &c_prev, hidden);
        h_prev.copy_from_slice(&step.h);
        c_prev.copy_from_slice(&step.c);
        trace.gates[t] = step.gates;
        trace.c[t] = step.c;
        trace.tanh_c[t] = step.tanh_c;
        trace.h[t] = step.h;
    }
    trace
}

/// Forward pass over one word's real character indices.
pub(crate) fn forward_word(
    params: &ModelParameters,
    indices: &[usize],
) -> Result<WordTrace, NeuralError> {
    let hidden = params.hidden_dim();
    for &idx in indices {
        if idx >= params.embedding.rows() {
            return Err(NeuralError::VocabIndex {
                index: idx,
                size: params.embedding.rows(),
            });
        }
    }
    let mut inputs: Vec<Vec<f64>> = indices
        .iter()
        .map(|&idx| params.embedding.row(idx).to_vec())
        .collect();
    let mut layers = Vec::with_capacity(params.layers.len());
    for layer in &params.layers {
        let fwd = run_direction(&layer.forward, &inputs, false, hidden);
        let bwd = run_direction(&layer.backward, &inputs, true, hidden);
        let next_inputs: Vec<Vec<f64>> = (0..inputs.len())
            .map(|t| {
                let mut v = Vec::with_capacity(2 * hidden);
                v.extend_from_slice(&fwd.h[t]);
                v.extend_from_slice(&bwd.h[t]);
                v
            })
            .collect();
        layers.push(LayerTrace {
            input: std::mem::replace(&mut inputs, next_inputs),
            forward: fwd,
            backward: bwd,
        });
    }
    // `inputs` now holds the concatenated top-layer states per position.
    let probs: Vec<f64> = inputs
        .iter()
        .map(|top| {
            let mut z = params.out_bias;
            for (w, v) in params.out_weight.iter().zip(top) {
                z += w * v;
            }
            sigmoid(z)
        })
        .collect();
    Ok(WordTrace {
        indices: indices.to_vec(),
        layers,
        probs,
    })
}

/// Forward pass over a batch: per-word, per-position probabilities for every
/// real character, plus the cached activations backpropagation needs.
pub fn forward(
    params: &ModelParameters,
    batch: &[EncodedWord],
) -> Result<(Vec<Vec<f64>>, BatchTrace), NeuralError> {
    let mut words = Vec::with_capacity(batch.len());
    for encoded in batch {
        words.push(forward_word(params, encoded.real_indices())?);
    }
    let probs = words.iter().map(|w| w.probs.clone()).collect();
    Ok((probs, BatchTrace { words }))
}

/// Mean binary cross-entropy over all real positions of the batch.
/// Probabilities are clamped away from 0 and 1 before the logs.
pub fn loss(probs: &[Vec<f64>], targets: &[SplitVector]) -> f64 {
    let (sum, count) = loss_parts(probs, targets);
    if count == 0 {
        return 0.0;
    }
    sum / count as f64
}

/// Total BCE and the number of real positions it covers.
pub(crate) fn loss_parts(probs: &[Vec<f64>], targets: &[SplitVector]) -> (f64, usize) {
    debug_assert_eq!(probs.len(), targets.len());
    let mut sum = 0.0;
    let mut count = 0;
    for (word_probs, target) in probs.iter().zip(targets) {
        sum += bce_sum(word_probs, target);
        count += word_probs.len();
    }
    (sum, count)
}

/// Summed (not averaged) BCE of one word's positions.
pub(crate) fn bce_sum(probs: &[f64], target: &SplitVector) -> f64 {
    let mut sum = 0.0;
    for (t, &p) in probs.iter().enumerate() {
        let p = p.clamp(PROB_FLOOR, 1.0 - PROB_FLOOR);
        let y = target.target_at(t);
        sum -= y * p.ln() + (1.0 - y) * (1.0 - p).ln();
    }
    sum
}

/// Analytic gradients of [`loss`] with respect to every parameter.
pub fn backward(
    params: &ModelParameters,
    trace: &BatchTrace,
    targets: &[SplitVector],
) -> Result<ModelParameters, NeuralError> {
    let mut grads = params.zeros_like();
    backward_into(params, trace, targets, 1.0, &mut grads)?;
    Ok(grads)
}

/// Accumulate gradients of `loss_scale * loss` into `grads`. The batch-mean
/// divisor comes from the trace itself.
pub(crate) fn backward_into(
    params: &ModelParameters,
    trace: &BatchTrace,
    targets: &[SplitVector],
    loss_scale: f64,
    grads: &mut ModelParameters,
) -> Result<(), NeuralError> {
    if trace.words.len() != targets.len() {
        return Err(NeuralError::Shape(format!(
            "trace covers {} words but {} targets were supplied",
            trace.words.len(),
            targets.len()
        )));
    }
    let total_positions: usize = trace.words.iter().map(|w| w.probs.len()).sum();
    if total_positions == 0 {
        return Ok(());
    }
    let scale = loss_scale / total_positions as f64;
    for (word, target) in trace.words.iter().zip(targets) {
        if word.probs.len() != target.length() {
            return Err(NeuralError::Shape(format!(
                "trace has {} positions but the target has {}",
                word.probs.len(),
                target.length()
            )));
        }
        backward_word(params, word, target, scale, grads);
    }
    Ok(())
}

/// Per-word gradient accumulation shared by the public `backward` and the
/// chunked training path.
pub(crate) fn backward_word(
    params: &ModelParameters,
    word: &WordTrace,
    target: &SplitVector,
    scale: f64,
    grads: &mut ModelParameters,
) {
    let hidden = params.hidden_dim();
    let len = word.probs.len();

    // Output layer: dz = (p - y) * scale at every real position, split into
    // the forward- and backward-state halves of the output weights.
    let top = word.layers.len() - 1;
    let mut dh_fwd: Vec<Vec<f64>> = vec![vec![0.0; hidden]; len];
    let mut dh_bwd: Vec<Vec<f64>> = vec![vec![0.0; hidden]; len];
    for t in 0..len {
        let dz = (word.probs[t] - target.target_at(t)) * scale;
        grads.out_bias += dz;
        let h_f = word.layers[top].forward.hidden_at(t);
        let h_b = word.layers[top].backward.hidden_at(t);
        for j in 0..hidden {
            grads.out_weight[j] += dz * h_f[j];
            grads.out_weight[hidden + j] += dz * h_b[j];
            dh_fwd[t][j] += dz * params.out_weight[j];
            dh_bwd[t][j] += dz * params.out_weight[hidden + j];
        }
    }

    for l in (0..word.layers.len()).rev() {
        let layer = &word.layers[l];
        let input_dim = layer.input.first().map_or(0, |v| v.len());
        let mut d_input: Vec<Vec<f64>> = vec![vec![0.0; input_dim]; len];
        backward_direction(
            &params.layers[l].forward,
            &layer.forward,
            &layer.input,
            false,
            &dh_fwd,
            &mut d_input,
            &mut grads.layers[l].forward,
            hidden,
        );
        backward_direction(
            &params.layers[l].backward,
            &layer.backward,
            &layer.input,
            true,
            &dh_bwd,
            &mut d_input,
            &mut grads.layers[l].backward,
            hidden,
        );
        if l > 0 {
            // The layer input was [h_fwd ; h_bwd] of the layer below.
            for t in 0..len {
                dh_fwd[t].copy_from_slice(&d_input[t][..hidden]);
                dh_bwd[t].copy_from_slice(&d_input[t][hidden..]);
            }
        } else {
            for (t, &idx) in word.indices.iter().enumerate() {
                let row = grads.embedding.row_mut(idx);
                for (g, d) in row.iter_mut().zip(&d_input[t]) {
                    *g += d;
                }
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn backward_direction(
    weights: &DirectionWeights,
    trace: &DirectionTrace,
    inputs: &[Vec<f64>],
    reversed: bool,
    dh_out: &[Vec<f64>],
    d_input: &mut [Vec<f64>],
    grads: &mut DirectionWeights,
    hidden: usize,
) {
    let len = inputs.len();
    if len == 0 {
        return;
    }
    let order: Vec<usize> = if reversed {
        (0..len).rev().collect()
    } else {
        (0..len).collect()
    };
    let zeros = vec![0.0; hidden];
    let mut dh_carry = vec![0.0; hidden];
    let mut dc_carry = vec![0.0; hidden];
    let mut dgates = vec![0.0; 4 * hidden];
    for k in (0..len).rev() {
        let t = order[k];
        let prev = if k > 0 { Some(order[k - 1]) } else { None };
        let c_prev: &[f64] = prev.map_or(&zeros, |p| &trace.c[p]);
        let gates = &trace.gates[t];
        let tanh_c = &trace.tanh_c[t];
        for j in 0..hidden {
            let i = gates[j];
            let f = gates[hidden + j];
            let g = gates[2 * hidden + j];
            let o = gates[3 * hidden + j];
            let dh = dh_out[t][j] + dh_carry[j];
            let d_o = dh * tanh_c[j];
            let dc = dc_carry[j] + dh * o * (1.0 - tanh_c[j] * tanh_c[j]);
            let d_i = dc * g;
            let d_g = dc * i;
            let d_f = dc * c_prev[j];
            dc_carry[j] = dc * f;
            dgates[j] = d_i * i * (1.0 - i);
            dgates[hidden + j] = d_f * f * (1.0 - f);
            dgates[2 * hidden + j] = d_g * (1.0 - g * g);
            dgates[3 * hidden + j] = d_o * o * (1.0 - o);
        }
        for (gb, dg) in grads.bias.iter_mut().zip(&dgates) {
            *gb += dg;
        }
        grads.w_input.add_outer(&dgates, &inputs[t]);
        if let Some(p) = prev {
            grads.w_recur.add_outer(&dgates, &trace.h[p]);
        }
        weights.w_input.matvec_t_accum(&dgates, &mut d_input[t]);
        dh_carry.iter_mut().for_each(|v| *v = 0.0);
        weights.w_recur.matvec_t_accum(&dgates, &mut dh_carry);
    }
}

/// Central finite differences of [`loss`] over every parameter: the
/// reference that backpropagation is validated against. Only the forward
/// pass is exercised, never the analytic gradients.
pub fn numerical_gradients(
    params: &ModelParameters,
    batch: &[EncodedWord],
    step: f64,
) -> Result<ModelParameters, NeuralError> {
    let targets: Vec<SplitVector> = batch.iter().map(|e| e.target).collect();
    let loss_of = |p: &ModelParameters| -> Result<f64, NeuralError> {
        let (probs, _) = forward(p, batch)?;
        Ok(loss(&probs, &targets))
    };
    let mut work = params.clone();
    let mut grads = params.zeros_like();
    let n_slices = grads.slices_mut().len();
    for si in 0..n_slices {
        let len = work.slices_mut()[si].len();
        for ei in 0..len {
            let original = work.slices_mut()[si][ei];
            work.slices_mut()[si][ei] = original + step;
            let plus = loss_of(&work)?;
            work.slices_mut()[si][ei] = original - step;
            let minus = loss_of(&work)?;
            work.slices_mut()[si][ei] = original;
            grads.slices_mut()[si][ei] = (plus - minus) / (2.0 * step);
        }
    }
    Ok(grads)
}

#[cfg(test)]
mod tests {
    use super::super::encode::encode_form;
    use super::super::vocab::CharVocab;
    use super::super::ModelConfig;
    use super::*;
    use crate::rng::SplitMix64;

    fn tiny_config(hidden: usize, layers: usize) -> ModelConfig {
        ModelConfig {
            embed_dim: 3,
            hidden_dim: hidden,
            num_layers: layers,
            max_len: 12,
            ..ModelConfig::default()
        }
    }

    fn tiny_model(seed: u64, layers: usize) -> (ModelParameters, CharVocab, ModelConfig) {
        let vocab = CharVocab::from_forms(["abcde"]);
        let config = tiny_config(2, layers);
        let mut rng = SplitMix64::new(seed);
        let params = ModelParameters::init(&config, vocab.size(), &mut rng);
        (params, vocab, config)
    }

    #[test]
    fn lstm_cell_zero_everything_gives_zero_state() {
        let w = Matrix::zeros(8, 3);
        let u = Matrix::zeros(8, 2);
        let b = vec![0.0; 8];
        let (h, c) = lstm_cell(&[0.0; 3], &[0.0; 2], &[0.0; 2], &w, &u, &b).unwrap();
        assert_eq!(h, vec![0.0, 0.0]);
        assert_eq!(c, vec![0.0, 0.0]);
    }

    #[test]
    fn lstm_cell_saturated_forget_gate_carries_cell_state() {
        let hidden = 2;
        let mut rng = SplitMix64::new(4);
        let w = Matrix::uniform(4 * hidden, 3, -0.5, 0.5, &mut rng);
        let u = Matrix::uniform(4 * hidden, hidden, -0.5, 0.5, &mut rng);
        let mut b = vec![0.0; 4 * hidden];
        for j in 0..hidden {
            b[hidden + j] = 50.0; // forget gate saturates at 1
        }
        let x = [0.3, -0.2, 0.5];
        let h_prev = [0.1, -0.4];
        let c_prev = [0.7, -0.9];
        let (_, c) = lstm_cell(&x, &h_prev, &c_prev, &w, &u, &b).unwrap();

        // With f = 1 exactly, c = c_prev + i*g; recompute i and g by hand.
        for j in 0..hidden {
            let mut zi = b[j];
            let mut zg = b[2 * hidden + j];
            for (col, &xv) in x.iter().enumerate() {
                zi += w.row(j)[col] * xv;
                zg += w.row(2 * hidden + j)[col] * xv;
            }
            for (col, &hv) in h_prev.iter().enumerate() {
                zi += u.row(j)[col] * hv;
                zg += u.row(2 * hidden + j)[col] * hv;
            }
            let expected = c_prev[j] + sigmoid(zi) * zg.tanh();
            assert!((c[j] - expected).abs() < 1e-10, "lane {j}");
        }
    }

    #[test]
    fn lstm_cell_rejects_shape_mismatch() {
        let w = Matrix::zeros(8, 3);
        let u = Matrix::zeros(8, 2);
        let b = vec![0.0; 7];
        assert!(matches!(
            lstm_cell(&[0.0; 3], &[0.0; 2], &[0.0; 2], &w, &u, &b),
            Err(NeuralError::Shape(_))
        ));
    }

    #[test]
    fn zero_output_layer_gives_half_probabilities() {
        let (mut params, vocab, config) = tiny_model(5, 1);
        params.out_weight.iter_mut().for_each(|w| *w = 0.0);
        params.out_bias = 0.0;
        let e = encode_form("abc", None, &vocab, &config).unwrap();
        let (probs, _) = forward(&params, std::slice::from_ref(&e)).unwrap();
        assert_eq!(probs[0].len(), 3);
        for &p in &probs[0] {
            assert_eq!(p, 0.5);
        }
    }

    #[test]
    fn probabilities_stay_strictly_inside_unit_interval() {
        for layers in [1, 2] {
            let (params, vocab, config) = tiny_model(6, layers);
            let e = encode_form("edcba", None, &vocab, &config).unwrap();
            let (probs, _) = forward(&params, std::slice::from_ref(&e)).unwrap();
            for &p in &probs[0] {
                assert!(p > 0.0 && p < 1.0);
            }
        }
    }

    #[test]
    fn forward_rejects_out_of_range_index() {
        let (params, _, _) = tiny_model(7, 1);
        let bad = EncodedWord {
            indices: vec![999; 3],
            mask: vec![true; 3],
            target: SplitVector::base(3),
        };
        assert!(matches!(
            forward(&params, &[bad]),
            Err(NeuralError::VocabIndex { index: 999, .. })
        ));
    }

    #[test]
    fn loss_of_uniform_probabilities_is_ln_two() {
        let probs = vec![vec![0.5; 7]];
        let targets = vec![SplitVector::split(7, 3).unwrap()];
        let l = loss(&probs, &targets);
        assert!((l - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn loss_matches_hand_computed_fixture() {
        // p = (0.2, 0.9) with the split at position 1, so y = (0, 1):
        // -(ln 0.8 + ln 0.9) / 2, computed by hand.
        let probs = vec![vec![0.2, 0.9]];
        let targets = vec![SplitVector::split(2, 1).unwrap()];
        let expected = -(0.9f64.ln() + 0.8f64.ln()) / 2.0;
        assert!((loss(&probs, &targets) - expected).abs() < 1e-12);
        assert!((expected - 0.164252033486018).abs() < 1e-12);
    }

    #[test]
    fn loss_vanishes_as_probabilities_match_targets() {
        let targets = vec![SplitVector::split(3, 1).unwrap()];
        let matching = vec![vec![1e-9, 1.0 - 1e-9, 1e-9]];
        let opposite = vec![vec![1.0 - 1e-9, 1e-9, 1e-9]];
        assert!(loss(&matching, &targets) < 1e-8);
        assert!(loss(&opposite, &targets) > 1.0);
    }

    #[test]
    fn loss_is_batch_order_invariant() {
        let probs_a = vec![vec![0.9, 0.2], vec![0.3, 0.4, 0.6]];
        let targets_a = vec![
            SplitVector::split(2, 1).unwrap(),
            SplitVector::split(3, 2).unwrap(),
        ];
        let probs_b = vec![probs_a[1].clone(), probs_a[0].clone()];
        let targets_b = vec![targets_a[1], targets_a[0]];
        assert!((loss(&probs_a, &targets_a) - loss(&probs_b, &targets_b)).abs() < 1e-12);
    }

    fn gradient_check(seed: u64, layers: usize, forms: &[&str]) {
        let vocab = CharVocab::from_forms(["abcdef"]);
        let config = tiny_config(3, layers);
        let mut rng = SplitMix64::new(seed);
        let params = ModelParameters::init(&config, vocab.size(), &mut rng);
        let batch: Vec<EncodedWord> = forms
            .iter()
            .enumerate()
            .map(|(i, f)| {
                let n = f.chars().count();
                let target = if i % 2 == 0 && n > 1 {
                    SplitVector::split(n, 1 + i % (n - 1)).unwrap()
                } else {
                    SplitVector::base(n)
                };
                encode_form(f, Some(target), &vocab, &config).unwrap()
            })
            .collect();
        let targets: Vec<SplitVector> = batch.iter().map(|e| e.target).collect();
        let (_, trace) = forward(&params, &batch).unwrap();
        let analytic = backward(&params, &trace, &targets).unwrap();
        let numeric = numerical_gradients(&params, &batch, 1e-4).unwrap();
        for ((name, a), (_, n)) in analytic.named_slices().iter().zip(numeric.named_slices()) {
            for (i, (&av, &nv)) in a.iter().zip(n.iter()).enumerate() {
                let tol = 1e-7f64.max(1e-4 * av.abs().max(nv.abs()));
                assert!(
                    (av - nv).abs() <= tol,
                    "{name}[{i}]: analytic {av} vs numeric {nv}"
                );
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences_one_layer() {
        gradient_check(11, 1, &["abc", "fed", "abcdef"]);
    }

    #[test]
    fn gradients_match_finite_differences_two_layers() {
        gradient_check(12, 2, &["ab", "cdef", "ace"]);
    }

    #[test]
    fn pad_embedding_row_gets_no_gradient() {
        let (params, vocab, config) = tiny_model(8, 2);
        let batch = vec![encode_form("abcd", None, &vocab, &config).unwrap()];
        let targets = vec![batch[0].target];
        let (_, trace) = forward(&params, &batch).unwrap();
        let grads = backward(&params, &trace, &targets).unwrap();
        assert!(grads.embedding.row(0).iter().all(|&g| g == 0.0));
    }

    #[test]
    fn doubling_the_loss_doubles_every_gradient() {
        let (params, vocab, config) = tiny_model(9, 1);
        let batch = vec![encode_form("abcde", None, &vocab, &config).unwrap()];
        let targets = vec![batch[0].target];
        let (_, trace) = forward(&params, &batch).unwrap();
        let single = backward(&params, &trace, &targets).unwrap();
        let mut doubled = params.zeros_like();
        backward_into(&params, &trace, &targets, 2.0, &mut doubled).unwrap();
        for ((_, s), (_, d)) in single.named_slices().iter().zip(doubled.named_slices()) {
            for (a, b) in s.iter().zip(d.iter()) {
                assert!((2.0 * a - b).abs() <= 1e-15 * b.abs().max(1.0));
            }
        }
    }

    #[test]
    fn padding_length_never_changes_probabilities() {
        let (params, vocab, _) = tiny_model(10, 2);
        let short = tiny_config(2, 2);
        let long = ModelConfig {
            max_len: 40,
            ..short.clone()
        };
        let a = encode_form("abcde", None, &vocab, &short).unwrap();
        let b = encode_form("abcde", None, &vocab, &long).unwrap();
        let (pa, _) = forward(&params, &[a]).unwrap();
        let (pb, _) = forward(&params, &[b]).unwrap();
        assert_eq!(pa, pb);
    }

    #[test]
    fn reversing_input_and_swapping_directions_reverses_outputs() {
        let (mut params, vocab, config) = tiny_model(13, 1);
        let e = encode_form("abcdef", None, &vocab, &config).unwrap();
        let (probs, _) = forward(&params, std::slice::from_ref(&e)).unwrap();

        // Swap the direction blocks and the output-weight halves, then feed
        // the reversed word.
        let layer = &mut params.layers[0];
        std::mem::swap(&mut layer.forward, &mut layer.backward);
        let h = params.hidden_dim();
        params.out_weight.rotate_left(h);
        let rev: String = "abcdef".chars().rev().collect();
        let e_rev = encode_form(&rev, None, &vocab, &config).unwrap();
        let (probs_rev, _) = forward(&params, std::slice::from_ref(&e_rev)).unwrap();

        let mut expected = probs[0].clone();
        expected.reverse();
        for (a, b) in expected.iter().zip(&probs_rev[0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
