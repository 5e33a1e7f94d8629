//! Binary checkpoints: one line of JSON manifest, then raw little-endian
//! tensor payloads.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::layers::Parameter;
use super::scalar::Scalar;
use crate::error::{Error, Result};

pub const FORMAT: &str = "har-cl-checkpoint/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub shape: Vec<usize>,
    pub dtype: String,
    /// Byte offset from the start of the payload section.
    pub offset: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub tensors: Vec<ManifestEntry>,
    #[serde(default)]
    pub meta: serde_json::Value,
}

pub fn encode<T: Scalar>(state: &[Parameter<T>], meta: serde_json::Value) -> Result<Vec<u8>> {
    let mut payload = Vec::new();
    let mut tensors = Vec::with_capacity(state.len());
    for p in state {
        if tensors.iter().any(|e: &ManifestEntry| e.name == p.name) {
            return Err(Error::Checkpoint(format!("duplicate tensor name `{}`", p.name)));
        }
        tensors.push(ManifestEntry {
            name: p.name.clone(),
            shape: p.tensor.shape().to_vec(),
            dtype: T::DTYPE.to_string(),
            offset: payload.len(),
        });
        for &v in p.tensor.data().iter() {
            v.write_le(&mut payload);
        }
    }
    let manifest = Manifest { format: FORMAT.to_string(), tensors, meta };
    let mut out = serde_json::to_vec(&manifest)?;
    out.push(b'\n');
    out.extend_from_slice(&payload);
    Ok(out)
}

/// Splits a checkpoint into its manifest and payload section.
pub fn decode_manifest(bytes: &[u8]) -> Result<(Manifest, &[u8])> {
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::Checkpoint("missing manifest terminator".into()))?;
    let manifest: Manifest = serde_json::from_slice(&bytes[..nl])?;
    if manifest.format != FORMAT {
        return Err(Error::Checkpoint(format!("unknown format `{}`", manifest.format)));
    }
    Ok((manifest, &bytes[nl + 1..]))
}

/// Copies checkpoint values into `state`, matching by name and shape.
pub fn restore<T: Scalar>(bytes: &[u8], state: &[Parameter<T>]) -> Result<serde_json::Value> {
    let (manifest, payload) = decode_manifest(bytes)?;
    for p in state {
        let entry = manifest
            .tensors
            .iter()
            .find(|e| e.name == p.name)
            .ok_or_else(|| Error::Checkpoint(format!("tensor `{}` absent from checkpoint", p.name)))?;
        if entry.shape != p.tensor.shape() {
            return Err(Error::shape("checkpoint restore", p.tensor.shape(), &entry.shape));
        }
        if entry.dtype != T::DTYPE {
            return Err(Error::Checkpoint(format!("`{}` stored as {}, expected {}", p.name, entry.dtype, T::DTYPE)));
        }
        let n = p.tensor.numel();
        let end = entry.offset + n * T::BYTES;
        let raw = payload
            .get(entry.offset..end)
            .ok_or_else(|| Error::Checkpoint(format!("payload of `{}` truncated", p.name)))?;
        let mut data = p.tensor.data_mut();
        for (dst, chunk) in data.iter_mut().zip(raw.chunks_exact(T::BYTES)) {
            *dst = T::read_le(chunk);
        }
    }
    Ok(manifest.meta)
}

pub fn save<T: Scalar>(path: &Path, state: &[Parameter<T>], meta: serde_json::Value) -> Result<()> {
    let bytes = encode(state, meta)?;
    let mut f = fs::File::create(path)?;
    f.write_all(&bytes)?;
    Ok(())
}

pub fn load<T: Scalar>(path: &Path, state: &[Parameter<T>]) -> Result<serde_json::Value> {
    let bytes = fs::read(path)?;
    restore(&bytes, state)
}
