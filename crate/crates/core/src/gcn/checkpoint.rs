//! Binary model checkpoints.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic     8 bytes  "CRSKCKPT"
//! version   u32
//! meta_len  u32
//! meta      meta_len bytes of UTF-8 JSON (CheckpointMeta)
//! count     u32      number of tensors
//! count x { rows u32, cols u32, rows*cols f64 }
//! ```
//!
//! Tensor order: encoder layers, then (weight, bias) per head layer, then
//! the named extras listed in the metadata.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{GcnModel, GcnParams, HeadKind, MlpHead};
use crate::error::{Error, Result};
use crate::nn::Tensor2;

pub const MAGIC: &[u8; 8] = b"CRSKCKPT";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub kind: HeadKind,
    pub seed: u64,
    pub encoder_shapes: Vec<(usize, usize)>,
    pub head_shapes: Vec<(usize, usize)>,
    /// Names of trailing tensors that are not model weights.
    pub extras: Vec<String>,
    /// Free-form run configuration echo.
    pub config: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub meta: CheckpointMeta,
    pub model: GcnModel,
    pub extras: Vec<Tensor2>,
}

impl Checkpoint {
    pub fn new(model: GcnModel, seed: u64, config: serde_json::Value, extras: Vec<(String, Tensor2)>) -> Self {
        let meta = CheckpointMeta {
            kind: model.kind,
            seed,
            encoder_shapes: model.encoder.layers.iter().map(|p| p.value.shape()).collect(),
            head_shapes: model
                .head
                .hidden
                .iter()
                .chain(std::iter::once(&model.head.output))
                .map(|d| d.weight.value.shape())
                .collect(),
            extras: extras.iter().map(|(n, _)| n.clone()).collect(),
            config,
        };
        Checkpoint { meta, model, extras: extras.into_iter().map(|(_, t)| t).collect() }
    }

    pub fn extra(&self, name: &str) -> Option<&Tensor2> {
        self.meta.extras.iter().position(|n| n == name).map(|i| &self.extras[i])
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let meta = serde_json::to_vec(&self.meta).expect("checkpoint metadata serializes");
        let mut tensors: Vec<&Tensor2> = self.model.params().into_iter().map(|p| &p.value).collect();
        tensors.extend(self.extras.iter());

        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(meta.len() as u32).to_le_bytes());
        out.extend_from_slice(&meta);
        out.extend_from_slice(&(tensors.len() as u32).to_le_bytes());
        for t in tensors {
            out.extend_from_slice(&(t.rows() as u32).to_le_bytes());
            out.extend_from_slice(&(t.cols() as u32).to_le_bytes());
            for v in t.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(Error::InvalidInput("not a checkpoint file (bad magic)".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::VersionMismatch { found: version, expected: VERSION });
        }
        let meta_len = r.u32()? as usize;
        let meta: CheckpointMeta = serde_json::from_slice(r.take(meta_len)?)
            .map_err(|e| Error::InvalidInput(format!("checkpoint metadata: {e}")))?;
        let count = r.u32()? as usize;
        let expected = meta.encoder_shapes.len() + 2 * meta.head_shapes.len() + meta.extras.len();
        if count != expected {
            return Err(Error::InvalidInput(format!(
                "checkpoint holds {count} tensors, metadata describes {expected}"
            )));
        }
        let mut tensors = Vec::with_capacity(count);
        for _ in 0..count {
            let rows = r.u32()? as usize;
            let cols = r.u32()? as usize;
            let raw = r.take(rows * cols * 8)?;
            let data = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk"))).collect();
            tensors.push(Tensor2::from_vec(rows, cols, data)?);
        }
        if r.pos != bytes.len() {
            return Err(Error::InvalidInput("trailing bytes after checkpoint".into()));
        }

        let mut it = tensors.into_iter();
        let encoder: Vec<Tensor2> = it.by_ref().take(meta.encoder_shapes.len()).collect();
        for (t, &s) in encoder.iter().zip(&meta.encoder_shapes) {
            if t.shape() != s {
                return Err(Error::InvalidInput("encoder shape disagrees with metadata".into()));
            }
        }
        let mut head = Vec::with_capacity(meta.head_shapes.len());
        for &s in &meta.head_shapes {
            let w = it.next().expect("count checked");
            let b = it.next().expect("count checked");
            if w.shape() != s {
                return Err(Error::InvalidInput("head shape disagrees with metadata".into()));
            }
            head.push((w, b));
        }
        let extras = it.collect();
        let model = GcnModel::new(meta.kind, GcnParams::from_weights(encoder)?, MlpHead::from_layers(head)?)?;
        Ok(Checkpoint { meta, model, extras })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("partial");
        fs::write(&tmp, self.to_bytes()).map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Checkpoint::from_bytes(&bytes)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::InvalidInput("truncated checkpoint".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
}
