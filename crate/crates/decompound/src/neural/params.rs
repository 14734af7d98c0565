//! Model parameters and the small dense-matrix type they are built from.

use crate::rng::SplitMix64;

use super::{ModelConfig, NeuralError};

/// Row-major dense matrix of f64.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, NeuralError> {
        if data.len() != rows * cols {
            return Err(NeuralError::Shape(format!(
                "{rows}x{cols} matrix needs {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn uniform(rows: usize, cols: usize, lo: f64, hi: f64, rng: &mut SplitMix64) -> Self {
        let data = (0..rows * cols).map(|_| rng.uniform(lo, hi)).collect();
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// `out[r] += Σ_c self[r][c] * x[c]`
    pub fn matvec_accum(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (r, o) in out.iter_mut().enumerate() {
            let row = self.row(r);
            let mut acc = 0.0;
            for (w, v) in row.iter().zip(x) {
                acc += w * v;
            }
            *o += acc;
        }
    }

    /// `out[c] += Σ_r self[r][c] * v[r]` (transposed product, row-major
    /// friendly).
    pub fn matvec_t_accum(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        for (r, &vr) in v.iter().enumerate() {
            if vr == 0.0 {
                continue;
            }
            let row = self.row(r);
            for (o, w) in out.iter_mut().zip(row) {
                *o += w * vr;
            }
        }
    }

    /// `self[r][c] += v[r] * x[c]`
    pub fn add_outer(&mut self, v: &[f64], x: &[f64]) {
        debug_assert_eq!(v.len(), self.rows);
        debug_assert_eq!(x.len(), self.cols);
        for (r, &vr) in v.iter().enumerate() {
            if vr == 0.0 {
                continue;
            }
            let row = self.row_mut(r);
            for (w, xv) in row.iter_mut().zip(x) {
                *w += vr * xv;
            }
        }
    }
}

/// LSTM weights for one direction of one layer. The four gates (input,
/// forget, cell candidate, output) are packed along the rows in that order,
/// giving `4 * hidden` rows.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionWeights {
    pub w_input: Matrix,
    pub w_recur: Matrix,
    pub bias: Vec<f64>,
}

impl DirectionWeights {
    fn zeros(input_dim: usize, hidden: usize) -> Self {
        Self {
            w_input: Matrix::zeros(4 * hidden, input_dim),
            w_recur: Matrix::zeros(4 * hidden, hidden),
            bias: vec![0.0; 4 * hidden],
        }
    }

    fn uniform(input_dim: usize, hidden: usize, scale: f64, rng: &mut SplitMix64) -> Self {
        Self {
            w_input: Matrix::uniform(4 * hidden, input_dim, -scale, scale, rng),
            w_recur: Matrix::uniform(4 * hidden, hidden, -scale, scale, rng),
            bias: vec![0.0; 4 * hidden],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerWeights {
    pub forward: DirectionWeights,
    pub backward: DirectionWeights,
}

/// All trainable parameters: the embedding table, per-layer forward and
/// backward LSTM weights, and the dense output layer over the concatenated
/// top-layer states.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParameters {
    pub embedding: Matrix,
    pub layers: Vec<LayerWeights>,
    pub out_weight: Vec<f64>,
    pub out_bias: f64,
}

const INIT_SCALE: f64 = 0.1;

impl ModelParameters {
    /// Input width of layer `l`: embeddings for the first layer, the
    /// concatenated bidirectional output below for the rest.
    fn layer_input_dim(config: &ModelConfig, layer: usize) -> usize {
        if layer == 0 {
            config.embed_dim
        } else {
            2 * config.hidden_dim
        }
    }

    /// Fresh parameters: all weights uniform in (-0.1, 0.1), biases zero.
    pub fn init(config: &ModelConfig, vocab_size: usize, rng: &mut SplitMix64) -> Self {
        let h = config.hidden_dim;
        let layers = (0..config.num_layers)
            .map(|l| {
                let input_dim = Self::layer_input_dim(config, l);
                LayerWeights {
                    forward: DirectionWeights::uniform(input_dim, h, INIT_SCALE, rng),
                    backward: DirectionWeights::uniform(input_dim, h, INIT_SCALE, rng),
                }
            })
            .collect();
        Self {
            embedding: Matrix::uniform(vocab_size, config.embed_dim, -INIT_SCALE, INIT_SCALE, rng),
            layers,
            out_weight: (0..2 * h)
                .map(|_| rng.uniform(-INIT_SCALE, INIT_SCALE))
                .collect(),
            out_bias: 0.0,
        }
    }

    /// Same shapes, all zeros; the gradient accumulator.
    pub fn zeros_like(&self) -> Self {
        Self {
            embedding: Matrix::zeros(self.embedding.rows(), self.embedding.cols()),
            layers: self
                .layers
                .iter()
                .map(|l| LayerWeights {
                    forward: DirectionWeights::zeros(
                        l.forward.w_input.cols(),
                        l.forward.w_recur.cols(),
                    ),
                    backward: DirectionWeights::zeros(
                        l.backward.w_input.cols(),
                        l.backward.w_recur.cols(),
                    ),
                })
                .collect(),
            out_weight: vec![0.0; self.out_weight.len()],
            out_bias: 0.0,
        }
    }

    pub fn hidden_dim(&self) -> usize {
        self.out_weight.len() / 2
    }

    /// All parameter slices in a fixed order, with stable names. The order
    /// defines the Adam state layout and the serialized tensor order.
    pub fn named_slices(&self) -> Vec<(String, &[f64])> {
        let mut out: Vec<(String, &[f64])> =
            vec![("embedding".to_string(), self.embedding.as_slice())];
        for (l, layer) in self.layers.iter().enumerate() {
            for (dir_name, dir) in [("fwd", &layer.forward), ("bwd", &layer.backward)] {
                out.push((
                    format!("layer{l}.{dir_name}.w_input"),
                    dir.w_input.as_slice(),
                ));
                out.push((
                    format!("layer{l}.{dir_name}.w_recur"),
                    dir.w_recur.as_slice(),
                ));
                out.push((format!("layer{l}.{dir_name}.bias"), dir.bias.as_slice()));
            }
        }
        out.push(("out.weight".to_string(), self.out_weight.as_slice()));
        out.push(("out.bias".to_string(), std::slice::from_ref(&self.out_bias)));
        out
    }

    /// Mutable view of the same slices, in the same order.
    pub fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = vec![self.embedding.as_mut_slice()];
        for layer in &mut self.layers {
            for dir in [&mut layer.forward, &mut layer.backward] {
                out.push(dir.w_input.as_mut_slice());
                out.push(dir.w_recur.as_mut_slice());
                out.push(dir.bias.as_mut_slice());
            }
        }
        out.push(self.out_weight.as_mut_slice());
        out.push(std::slice::from_mut(&mut self.out_bias));
        out
    }

    /// Tensor shapes in [`named_slices`](Self::named_slices) order, used by
    /// the model file writer.
    pub fn named_shapes(&self) -> Vec<(String, Vec<usize>)> {
        let mut out = vec![(
            "embedding".to_string(),
            vec![self.embedding.rows(), self.embedding.cols()],
        )];
        for (l, layer) in self.layers.iter().enumerate() {
            for (dir_name, dir) in [("fwd", &layer.forward), ("bwd", &layer.backward)] {
                out.push((
                    format!("layer{l}.{dir_name}.w_input"),
                    vec![dir.w_input.rows(), dir.w_input.cols()],
                ));
                out.push((
                    format!("layer{l}.{dir_name}.w_recur"),
                    vec![dir.w_recur.rows(), dir.w_recur.cols()],
                ));
                out.push((format!("layer{l}.{dir_name}.bias"), vec![dir.bias.len()]));
            }
        }
        out.push(("out.weight".to_string(), vec![self.out_weight.len()]));
        out.push(("out.bias".to_string(), vec![1]));
        out
    }

    /// Element-wise `self += other`, used to merge per-chunk gradient
    /// accumulators in a fixed order.
    pub fn accumulate(&mut self, other: &Self) {
        let mut mine = self.slices_mut();
        let theirs = other.named_slices();
        debug_assert_eq!(mine.len(), theirs.len());
        for (dst, (_, src)) in mine.iter_mut().zip(theirs.iter()) {
            debug_assert_eq!(dst.len(), src.len());
            for (d, s) in dst.iter_mut().zip(src.iter()) {
                *d += s;
            }
        }
    }

    /// Consistency with a configuration and vocabulary size.
    pub fn check_shapes(&self, config: &ModelConfig, vocab_size: usize) -> Result<(), NeuralError> {
        let h = config.hidden_dim;
        if self.embedding.rows() != vocab_size || self.embedding.cols() != config.embed_dim {
            return Err(NeuralError::Shape(format!(
                "embedding is {}x{}, expected {}x{}",
                self.embedding.rows(),
                self.embedding.cols(),
                vocab_size,
                config.embed_dim
            )));
        }
        if self.layers.len() != config.num_layers {
            return Err(NeuralError::Shape(format!(
                "{} layers, expected {}",
                self.layers.len(),
                config.num_layers
            )));
        }
        for (l, layer) in self.layers.iter().enumerate() {
            let input_dim = Self::layer_input_dim(config, l);
            for dir in [&layer.forward, &layer.backward] {
                if dir.w_input.rows() != 4 * h
                    || dir.w_input.cols() != input_dim
                    || dir.w_recur.rows() != 4 * h
                    || dir.w_recur.cols() != h
                    || dir.bias.len() != 4 * h
                {
                    return Err(NeuralError::Shape(format!("layer {l} weight shapes")));
                }
            }
        }
        if self.out_weight.len() != 2 * h {
            return Err(NeuralError::Shape(format!(
                "output weight has {} entries, expected {}",
                self.out_weight.len(),
                2 * h
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matvec_and_outer_agree_with_hand_values() {
        let m = Matrix::from_vec(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let mut out = vec![0.0; 2];
        m.matvec_accum(&[1.0, 0.5, -1.0], &mut out);
        assert_eq!(out, vec![1.0 + 1.0 - 3.0, 4.0 + 2.5 - 6.0]);

        let mut t = vec![0.0; 3];
        m.matvec_t_accum(&[2.0, -1.0], &mut t);
        assert_eq!(t, vec![2.0 - 4.0, 4.0 - 5.0, 6.0 - 6.0]);

        let mut o = Matrix::zeros(2, 3);
        o.add_outer(&[1.0, 2.0], &[3.0, 4.0, 5.0]);
        assert_eq!(o.as_slice(), &[3.0, 4.0, 5.0, 6.0, 8.0, 10.0]);
    }

    #[test]
    fn init_has_zero_biases_and_bounded_weights() {
        let config = ModelConfig {
            embed_dim: 4,
            hidden_dim: 3,
            num_layers: 2,
            ..ModelConfig::default()
        };
        let mut rng = SplitMix64::new(1);
        let p = ModelParameters::init(&config, 10, &mut rng);
        p.check_shapes(&config, 10).unwrap();
        for layer in &p.layers {
            assert!(layer.forward.bias.iter().all(|&b| b == 0.0));
            assert!(layer.backward.bias.iter().all(|&b| b == 0.0));
        }
        assert_eq!(p.out_bias, 0.0);
        for (_, slice) in p.named_slices() {
            assert!(slice.iter().all(|v| v.abs() <= INIT_SCALE));
        }
    }

    #[test]
    fn slice_views_cover_every_parameter_once() {
        let config = ModelConfig {
            embed_dim: 3,
            hidden_dim: 2,
            num_layers: 2,
            ..ModelConfig::default()
        };
        let mut rng = SplitMix64::new(2);
        let mut p = ModelParameters::init(&config, 5, &mut rng);
        let named: usize = p.named_slices().iter().map(|(_, s)| s.len()).sum();
        let muts: usize = p.slices_mut().iter().map(|s| s.len()).sum();
        // embedding + per-layer directions + output weight + output bias
        let mut direct = 5 * 3 + 2 * 2 + 1;
        for l in 0..2 {
            let input_dim = if l == 0 { 3 } else { 4 };
            direct += 2 * (4 * 2 * input_dim + 4 * 2 * 2 + 4 * 2);
        }
        assert_eq!(named, direct);
        assert_eq!(muts, direct);
    }

    #[test]
    fn accumulate_adds_elementwise() {
        let config = ModelConfig {
            embed_dim: 2,
            hidden_dim: 2,
            num_layers: 1,
            ..ModelConfig::default()
        };
        let mut rng = SplitMix64::new(3);
        let a = ModelParameters::init(&config, 4, &mut rng);
        let mut sum = a.zeros_like();
        sum.accumulate(&a);
        sum.accumulate(&a);
        for ((_, s), (_, orig)) in sum.named_slices().iter().zip(a.named_slices()) {
            for (x, y) in s.iter().zip(orig) {
                assert!((x - 2.0 * y).abs() < 1e-15);
            }
        }
    }
}
