//! Model file format.
//!
//! Binary container with a fixed layout so trained models round-trip
//! bit-exactly:
//!
//! ```text
//! magic            4 bytes  "KVST"
//! version          u32 LE
//! metadata length  u32 LE
//! metadata         UTF-8 `key<TAB>value` lines: configuration + vocabulary
//! tensors…         name length (u32 LE), name (UTF-8), rank (u32 LE),
//!                  dims (u64 LE each), values (f64 LE, row-major)
//! ```

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::params::{Matrix, ModelParameters};
use super::vocab::CharVocab;
use super::{ModelConfig, NeuralError, TrainedModel};

pub const MODEL_MAGIC: [u8; 4] = *b"KVST";
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ModelIoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("not a model file (bad magic bytes)")]
    BadMagic,
    #[error("unsupported model format version {found} (expected {MODEL_FORMAT_VERSION})")]
    Version { found: u32 },
    #[error("truncated model file: {0}")]
    Truncated(String),
    #[error("malformed metadata: {0}")]
    Metadata(String),
    #[error("tensor `{name}`: {message}")]
    Tensor { name: String, message: String },
    #[error(transparent)]
    Shape(#[from] NeuralError),
}

fn write_u32<W: Write>(w: &mut W, v: u32) -> std::io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn write_u64<W: Write>(w: &mut W, v: u64) -> std::io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn read_u32<R: Read>(r: &mut R, what: &str) -> Result<u32, ModelIoError> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)
        .map_err(|_| ModelIoError::Truncated(what.to_string()))?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u64<R: Read>(r: &mut R, what: &str) -> Result<u64, ModelIoError> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)
        .map_err(|_| ModelIoError::Truncated(what.to_string()))?;
    Ok(u64::from_le_bytes(buf))
}

fn metadata_text(config: &ModelConfig, vocab: &CharVocab) -> String {
    let mut text = String::new();
    text.push_str(&format!("embed_dim\t{}\n", config.embed_dim));
    text.push_str(&format!("hidden_dim\t{}\n", config.hidden_dim));
    text.push_str(&format!("num_layers\t{}\n", config.num_layers));
    text.push_str(&format!("max_len\t{}\n", config.max_len));
    text.push_str(&format!("learning_rate\t{}\n", config.learning_rate));
    text.push_str(&format!("max_epochs\t{}\n", config.max_epochs));
    text.push_str(&format!("patience\t{}\n", config.patience));
    text.push_str(&format!("batch_size\t{}\n", config.batch_size));
    text.push_str(&format!("seed\t{}\n", config.seed));
    let chars: String = vocab.chars().iter().collect();
    text.push_str(&format!("vocab\t{chars}\n"));
    text
}

fn parse_metadata(text: &str) -> Result<(ModelConfig, CharVocab), ModelIoError> {
    let mut map: HashMap<&str, &str> = HashMap::new();
    for line in text.lines() {
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('\t')
            .ok_or_else(|| ModelIoError::Metadata(format!("line without a tab: `{line}`")))?;
        map.insert(key, value);
    }
    fn get<'a>(map: &HashMap<&str, &'a str>, key: &str) -> Result<&'a str, ModelIoError> {
        map.get(key)
            .copied()
            .ok_or_else(|| ModelIoError::Metadata(format!("missing key `{key}`")))
    }
    fn num<T: std::str::FromStr>(map: &HashMap<&str, &str>, key: &str) -> Result<T, ModelIoError> {
        get(map, key)?
            .parse()
            .map_err(|_| ModelIoError::Metadata(format!("bad value for `{key}`")))
    }
    let config = ModelConfig {
        embed_dim: num(&map, "embed_dim")?,
        hidden_dim: num(&map, "hidden_dim")?,
        num_layers: num(&map, "num_layers")?,
        max_len: num(&map, "max_len")?,
        learning_rate: num(&map, "learning_rate")?,
        max_epochs: num(&map, "max_epochs")?,
        patience: num(&map, "patience")?,
        batch_size: num(&map, "batch_size")?,
        seed: num(&map, "seed")?,
    };
    let vocab = CharVocab::from_chars(get(&map, "vocab")?.chars().collect());
    Ok((config, vocab))
}

/// Write a trained model.
pub fn save_model<W: Write>(writer: W, model: &TrainedModel) -> Result<(), ModelIoError> {
    let mut out = BufWriter::new(writer);
    out.write_all(&MODEL_MAGIC)?;
    write_u32(&mut out, MODEL_FORMAT_VERSION)?;
    let metadata = metadata_text(&model.config, &model.vocab);
    write_u32(&mut out, metadata.len() as u32)?;
    out.write_all(metadata.as_bytes())?;
    let shapes = model.params.named_shapes();
    for ((name, dims), (slice_name, values)) in shapes.iter().zip(model.params.named_slices()) {
        debug_assert_eq!(name, &slice_name);
        write_u32(&mut out, name.len() as u32)?;
        out.write_all(name.as_bytes())?;
        write_u32(&mut out, dims.len() as u32)?;
        for &d in dims {
            write_u64(&mut out, d as u64)?;
        }
        for &v in values {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn save_model_file(path: &Path, model: &TrainedModel) -> Result<(), ModelIoError> {
    save_model(File::create(path)?, model)
}

struct RawTensor {
    dims: Vec<usize>,
    values: Vec<f64>,
}

fn read_tensors<R: Read>(r: &mut R) -> Result<Vec<(String, RawTensor)>, ModelIoError> {
    let mut tensors = Vec::new();
    loop {
        let mut len_buf = [0u8; 4];
        match r.read_exact(&mut len_buf) {
            Ok(()) => {}
            Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => break,
            Err(e) => return Err(e.into()),
        }
        let name_len = u32::from_le_bytes(len_buf) as usize;
        let mut name = vec![0u8; name_len];
        r.read_exact(&mut name)
            .map_err(|_| ModelIoError::Truncated("tensor name".to_string()))?;
        let name = String::from_utf8(name)
            .map_err(|_| ModelIoError::Metadata("tensor name is not UTF-8".to_string()))?;
        let rank = read_u32(r, "tensor rank")? as usize;
        let mut dims = Vec::with_capacity(rank);
        for _ in 0..rank {
            dims.push(read_u64(r, "tensor dims")? as usize);
        }
        let count: usize = dims.iter().product();
        let mut values = Vec::with_capacity(count);
        let mut buf = [0u8; 8];
        for _ in 0..count {
            r.read_exact(&mut buf)
                .map_err(|_| ModelIoError::Truncated(format!("values of `{name}`")))?;
            values.push(f64::from_le_bytes(buf));
        }
        tensors.push((name, RawTensor { dims, values }));
    }
    Ok(tensors)
}

/// Read a model written by [`save_model`]; predictions from the loaded model
/// are bit-identical to the saved one.
pub fn load_model<R: Read>(reader: R) -> Result<TrainedModel, ModelIoError> {
    let mut r = BufReader::new(reader);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| ModelIoError::Truncated("magic".to_string()))?;
    if magic != MODEL_MAGIC {
        return Err(ModelIoError::BadMagic);
    }
    let version = read_u32(&mut r, "version")?;
    if version != MODEL_FORMAT_VERSION {
        return Err(ModelIoError::Version { found: version });
    }
    let metadata_len = read_u32(&mut r, "metadata length")? as usize;
    let mut metadata = vec![0u8; metadata_len];
    r.read_exact(&mut metadata)
        .map_err(|_| ModelIoError::Truncated("metadata".to_string()))?;
    let metadata = String::from_utf8(metadata)
        .map_err(|_| ModelIoError::Metadata("metadata is not UTF-8".to_string()))?;
    let (config, vocab) = parse_metadata(&metadata)?;

    let mut tensors: HashMap<String, RawTensor> = read_tensors(&mut r)?.into_iter().collect();

    fn take(
        tensors: &mut HashMap<String, RawTensor>,
        name: String,
    ) -> Result<RawTensor, ModelIoError> {
        tensors.remove(&name).ok_or(ModelIoError::Tensor {
            name,
            message: "missing".to_string(),
        })
    }

    fn take_matrix(
        tensors: &mut HashMap<String, RawTensor>,
        name: String,
    ) -> Result<Matrix, ModelIoError> {
        let raw = take(tensors, name.clone())?;
        if raw.dims.len() != 2 {
            return Err(ModelIoError::Tensor {
                name,
                message: format!("expected rank 2, found {}", raw.dims.len()),
            });
        }
        Matrix::from_vec(raw.dims[0], raw.dims[1], raw.values).map_err(|e| ModelIoError::Tensor {
            name,
            message: e.to_string(),
        })
    }

    fn take_direction(
        tensors: &mut HashMap<String, RawTensor>,
        layer: usize,
        dir: &str,
    ) -> Result<super::params::DirectionWeights, ModelIoError> {
        let w_input = take_matrix(tensors, format!("layer{layer}.{dir}.w_input"))?;
        let w_recur = take_matrix(tensors, format!("layer{layer}.{dir}.w_recur"))?;
        let bias = take(tensors, format!("layer{layer}.{dir}.bias"))?.values;
        Ok(super::params::DirectionWeights {
            w_input,
            w_recur,
            bias,
        })
    }

    let embedding = take_matrix(&mut tensors, "embedding".to_string())?;
    let mut layers = Vec::with_capacity(config.num_layers);
    for l in 0..config.num_layers {
        let forward = take_direction(&mut tensors, l, "fwd")?;
        let backward = take_direction(&mut tensors, l, "bwd")?;
        layers.push(super::params::LayerWeights { forward, backward });
    }
    let out_weight = take(&mut tensors, "out.weight".to_string())?.values;
    let out_bias_raw = take(&mut tensors, "out.bias".to_string())?;
    if out_bias_raw.values.len() != 1 {
        return Err(ModelIoError::Tensor {
            name: "out.bias".to_string(),
            message: "expected a single value".to_string(),
        });
    }
    if let Some((name, _)) = tensors.into_iter().next() {
        return Err(ModelIoError::Tensor {
            name,
            message: "unexpected extra tensor".to_string(),
        });
    }

    let params = ModelParameters {
        embedding,
        layers,
        out_weight,
        out_bias: out_bias_raw.values[0],
    };
    params.check_shapes(&config, vocab.size())?;
    for (name, slice) in params.named_slices() {
        if slice.iter().any(|v| !v.is_finite()) {
            return Err(ModelIoError::Tensor {
                name,
                message: "contains a non-finite value".to_string(),
            });
        }
    }
    Ok(TrainedModel {
        config,
        vocab,
        params,
    })
}

pub fn load_model_file(path: &Path) -> Result<TrainedModel, ModelIoError> {
    load_model(File::open(path)?)
}
