//! Model file layout (all integers little-endian):
//!
//! | bytes            | content                                        |
//! |------------------|------------------------------------------------|
//! | 4                | magic `SKCM`                                   |
//! | 4                | format version (`u32`, currently 1)            |
//! | 4                | header length `h` (`u32`)                      |
//! | h                | UTF-8 JSON header (classes, layers, metadata)  |
//! | 8 * n            | `n` parameters as `f64`, row-major per layer   |
//! | 4                | CRC-32 of every preceding byte                 |
//!
//! Layers appear in forward order: for each of the three convolutions a
//! `(3 * c_in) x c_out` weight matrix (rows ordered tap-major, then input
//! channel) followed by `c_out` biases, then the `96 x K` dense matrix and its
//! `K` biases.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::model::{ClassifierModel, TrainingMeta};
use super::net::{layout, param_count, Network};

const MAGIC: &[u8; 4] = b"SKCM";
const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ModelIoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("not a model file (bad magic)")]
    BadMagic,
    #[error("unsupported model format version {0}")]
    UnsupportedVersion(u32),
    #[error("model file truncated")]
    Truncated,
    #[error("model file checksum mismatch")]
    Checksum,
    #[error("invalid model header: {0}")]
    Header(#[from] serde_json::Error),
    #[error("layer shapes do not match the architecture: {0}")]
    Shape(String),
}

#[derive(Serialize, Deserialize)]
struct Header {
    classes: Vec<String>,
    layers: Vec<LayerShape>,
    param_count: usize,
    meta: TrainingMeta,
}

#[derive(Serialize, Deserialize, PartialEq, Debug)]
struct LayerShape {
    kind: String,
    rows: usize,
    cols: usize,
}

fn shapes(classes: usize) -> Vec<LayerShape> {
    layout(classes)
        .iter()
        .enumerate()
        .map(|(l, s)| LayerShape {
            kind: if l < 3 { "conv1d".into() } else { "dense".into() },
            rows: s.rows,
            cols: s.cols,
        })
        .collect()
}

pub fn model_to_bytes(m: &ClassifierModel) -> Vec<u8> {
    let header = Header {
        classes: m.classes.clone(),
        layers: shapes(m.classes.len()),
        param_count: m.net.params.len(),
        meta: m.meta.clone(),
    };
    let header = serde_json::to_vec(&header).expect("header serializes");
    let mut out = Vec::with_capacity(16 + header.len() + 8 * m.net.params.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(header.len() as u32).to_le_bytes());
    out.extend_from_slice(&header);
    for p in &m.net.params {
        out.extend_from_slice(&p.to_le_bytes());
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

pub fn model_from_bytes(bytes: &[u8]) -> Result<ClassifierModel, ModelIoError> {
    if bytes.len() < 16 {
        return Err(if bytes.len() >= 4 && &bytes[..4] != MAGIC {
            ModelIoError::BadMagic
        } else {
            ModelIoError::Truncated
        });
    }
    if &bytes[..4] != MAGIC {
        return Err(ModelIoError::BadMagic);
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(ModelIoError::UnsupportedVersion(version));
    }
    let (body, tail) = bytes.split_at(bytes.len() - 4);
    let header_len = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    if 12 + header_len > body.len() {
        return Err(ModelIoError::Truncated);
    }
    if crc32fast::hash(body) != u32::from_le_bytes(tail.try_into().unwrap()) {
        return Err(ModelIoError::Checksum);
    }
    let header: Header = serde_json::from_slice(&body[12..12 + header_len])?;
    let k = header.classes.len();
    if k < 2 {
        return Err(ModelIoError::Shape(format!("{k} classes")));
    }
    if header.layers != shapes(k) || header.param_count != param_count(k) {
        return Err(ModelIoError::Shape(format!(
            "expected {} parameters for {k} classes, header declares {}",
            param_count(k),
            header.param_count
        )));
    }
    let raw = &body[12 + header_len..];
    if raw.len() != 8 * header.param_count {
        return Err(ModelIoError::Truncated);
    }
    let params = raw
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(ClassifierModel {
        net: Network { classes: k, params },
        classes: header.classes,
        meta: header.meta,
    })
}

pub fn save_model(m: &ClassifierModel, path: impl AsRef<Path>) -> Result<(), ModelIoError> {
    fs::write(path, model_to_bytes(m))?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ClassifierModel, ModelIoError> {
    model_from_bytes(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::tensor::encode;
    use crate::sketch::fixtures::square;

    fn model() -> ClassifierModel {
        let mut m = ClassifierModel::init(vec!["a".into(), "b".into(), "c".into()], 17);
        m.meta.epochs = 3;
        m
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let m = model();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.skm");
        save_model(&m, &path).unwrap();
        let back = load_model(&path).unwrap();
        assert_eq!(back, m);
        let t = encode(&square());
        let (a, b) = (m.forward(&t), back.forward(&t));
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
        assert_eq!(back.meta().seed, 17);
        assert_eq!(back.num_classes(), 3);
    }

    #[test]
    fn corruption_is_detected() {
        let bytes = model_to_bytes(&model());
        let mut flipped = bytes.clone();
        flipped[100] ^= 0x01;
        assert!(matches!(model_from_bytes(&flipped), Err(ModelIoError::Checksum)));
        assert!(matches!(
            model_from_bytes(&bytes[..bytes.len() / 2]),
            Err(ModelIoError::Checksum | ModelIoError::Truncated)
        ));
        assert!(matches!(model_from_bytes(b"hello world, not a model"), Err(ModelIoError::BadMagic)));
        let mut version = bytes.clone();
        version[4] = 9;
        assert!(matches!(model_from_bytes(&version), Err(ModelIoError::UnsupportedVersion(9))));
        assert!(matches!(model_from_bytes(b"SK"), Err(ModelIoError::Truncated)));
    }
}
