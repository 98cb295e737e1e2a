//! Checkpoint files: one line of compact JSON (the header), a `\n`, then the
//! raw little-endian `f32` payload. Offsets in the manifest count bytes from
//! the start of the payload.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::param::Parameters;
use super::tensor::{Matrix, Real};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamEntry {
    pub name: String,
    pub shape: [usize; 2],
    pub offset: usize,
    pub dtype: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub format_version: u32,
    pub params: Vec<ParamEntry>,
    /// Free-form model metadata (variant, n, vocabulary hash, seed, config).
    pub meta: serde_json::Value,
}

/// Serialize every parameter of `model` (in collection order) into a byte buffer.
pub fn encode<T: Real, M: Parameters<T> + ?Sized>(model: &M, meta: serde_json::Value) -> Vec<u8> {
    let values = model.values();
    let mut params = Vec::with_capacity(values.len());
    let mut offset = 0;
    for (name, m) in &values {
        params.push(ParamEntry { name: name.to_string(), shape: [m.rows(), m.cols()], offset, dtype: "f32".into() });
        offset += m.as_slice().len() * 4;
    }
    let header = CheckpointHeader { format_version: FORMAT_VERSION, params, meta };
    let mut out = serde_json::to_vec(&header).expect("header serializes");
    out.push(b'\n');
    out.reserve(offset);
    for (_, m) in &values {
        for v in m.as_slice() {
            out.extend_from_slice(&v.to_f32().unwrap_or(f32::NAN).to_le_bytes());
        }
    }
    out
}

pub fn save<T: Real, M: Parameters<T> + ?Sized>(path: &Path, model: &M, meta: serde_json::Value) -> Result<()> {
    let bytes = encode(model, meta);
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&bytes).map_err(|e| Error::io(path, e))
}

/// A decoded checkpoint: header plus named matrices.
#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub header: CheckpointHeader,
    pub tensors: BTreeMap<String, Matrix<f32>>,
}

pub fn decode(bytes: &[u8]) -> Result<Checkpoint> {
    let nl =
        bytes.iter().position(|b| *b == b'\n').ok_or_else(|| Error::Checkpoint("missing header terminator".into()))?;
    let header: CheckpointHeader =
        serde_json::from_slice(&bytes[..nl]).map_err(|e| Error::Checkpoint(format!("bad header: {e}")))?;
    if header.format_version != FORMAT_VERSION {
        return Err(Error::Checkpoint(format!("unsupported format_version {}", header.format_version)));
    }
    let payload = &bytes[nl + 1..];
    let mut tensors = BTreeMap::new();
    for p in &header.params {
        if p.dtype != "f32" {
            return Err(Error::Checkpoint(format!("{}: unsupported dtype {}", p.name, p.dtype)));
        }
        let len = p.shape[0] * p.shape[1];
        let end = p.offset + 4 * len;
        let raw =
            payload.get(p.offset..end).ok_or_else(|| Error::Checkpoint(format!("{}: payload truncated", p.name)))?;
        let data = raw.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect();
        tensors.insert(p.name.clone(), Matrix::from_vec(p.shape[0], p.shape[1], data));
    }
    Ok(Checkpoint { header, tensors })
}

pub fn load(path: &Path) -> Result<Checkpoint> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}

impl Checkpoint {
    /// Copy stored tensors into `model`. Every model parameter must be present
    /// with a matching shape.
    pub fn restore_into<M: Parameters<f32> + ?Sized>(&self, model: &mut M) -> Result<()> {
        for mut p in model.params_mut() {
            let name = p.name().to_string();
            let stored = self
                .tensors
                .get(&name)
                .ok_or_else(|| Error::Checkpoint(format!("parameter {name} missing from checkpoint")))?;
            let target = p.value_mut();
            if stored.shape() != target.shape() {
                return Err(Error::Checkpoint(format!(
                    "parameter {name}: stored shape {:?}, model shape {:?}",
                    stored.shape(),
                    target.shape()
                )));
            }
            target.as_mut_slice().copy_from_slice(stored.as_slice());
        }
        Ok(())
    }
}
