use std::path::Path;

use serde::{Deserialize, Serialize};

use super::bank::parse;
use super::{read, write_atomic, StoreError};
use crate::model::{FlowField, FlowMap, TubeEmbedding};

pub const EMBEDDING_MAGIC: &[u8; 4] = b"TMKE";
pub const FLOW_MAGIC: &[u8; 4] = b"TMKF";
pub const BINARY_VERSION: u32 = 1;

/// Embedding binary. Values are narrowed to `f32`.
pub fn encode_embedding(e: &TubeEmbedding) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 4 * e.data().len());
    out.extend_from_slice(EMBEDDING_MAGIC);
    for v in [BINARY_VERSION, dim32(e.frames()), dim32(e.dim())] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for &v in e.data() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

pub fn decode_embedding(bytes: &[u8], tube_id: &str) -> Result<TubeEmbedding, StoreError> {
    let mut r = Reader::open(bytes, EMBEDDING_MAGIC)?;
    let (frames, dim) = (r.u32()? as usize, r.u32()? as usize);
    let data = r.f32s(frames * dim)?.into_iter().map(f64::from).collect();
    r.finish()?;
    Ok(TubeEmbedding::new(tube_id, frames, dim, data)?)
}

pub fn encode_flow(flow: &FlowField) -> Vec<u8> {
    let maps = flow.transitions();
    let mut out = Vec::with_capacity(20 + 8 * maps.len() * flow.height() * flow.width());
    out.extend_from_slice(FLOW_MAGIC);
    for v in [BINARY_VERSION, dim32(maps.len()), dim32(flow.height()), dim32(flow.width())] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for m in maps {
        for v in m.vectors() {
            out.extend_from_slice(&v[0].to_le_bytes());
            out.extend_from_slice(&v[1].to_le_bytes());
        }
    }
    out
}

pub fn decode_flow(bytes: &[u8], video_id: &str) -> Result<FlowField, StoreError> {
    let mut r = Reader::open(bytes, FLOW_MAGIC)?;
    let (count, h, w) = (r.u32()? as usize, r.u32()? as usize, r.u32()? as usize);
    let values = r.f32s(count * h * w * 2)?;
    r.finish()?;
    let per_map = 2 * h * w;
    let maps = (0..count)
        .map(|k| {
            let chunk = &values[k * per_map..(k + 1) * per_map];
            FlowMap::from_vectors(h, w, chunk.chunks_exact(2).map(|p| [p[0], p[1]]).collect())
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FlowField::new(video_id, h, w, maps)?)
}

fn dim32(n: usize) -> u32 {
    u32::try_from(n).expect("dimension fits in 32 bits")
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn open(bytes: &'a [u8], magic: &[u8; 4]) -> Result<Self, StoreError> {
        if bytes.len() < 4 || &bytes[..4] != magic {
            return Err(StoreError::Magic {
                expected: String::from_utf8_lossy(magic).into_owned(),
                found: String::from_utf8_lossy(&bytes[..bytes.len().min(4)]).into_owned(),
            });
        }
        let mut r = Self { bytes, pos: 4 };
        let version = r.u32()?;
        if version != BINARY_VERSION {
            return Err(StoreError::Version {
                found: version.into(),
                expected: BINARY_VERSION.into(),
            });
        }
        Ok(r)
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], StoreError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or(StoreError::Length {
            expected: self.pos.saturating_add(n),
            found: self.bytes.len(),
        })?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32, StoreError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f32s(&mut self, n: usize) -> Result<Vec<f32>, StoreError> {
        let raw = self.take(n.saturating_mul(4))?;
        Ok(raw.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes"))).collect())
    }

    fn finish(self) -> Result<(), StoreError> {
        if self.pos == self.bytes.len() {
            Ok(())
        } else {
            Err(StoreError::Length {
                expected: self.pos,
                found: self.bytes.len(),
            })
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EmbeddingDoc {
    tube_id: String,
    #[serde(rename = "T")]
    frames: usize,
    #[serde(rename = "D")]
    dim: usize,
    data: Vec<f64>,
}

pub fn embedding_to_json(e: &TubeEmbedding) -> String {
    serde_json::to_string(&EmbeddingDoc {
        tube_id: e.tube_id().to_owned(),
        frames: e.frames(),
        dim: e.dim(),
        data: e.data().to_vec(),
    })
    .expect("embeddings always serialize")
}

pub fn embedding_from_json(text: &str) -> Result<TubeEmbedding, StoreError> {
    let doc: EmbeddingDoc = parse(text)?;
    Ok(TubeEmbedding::new(doc.tube_id, doc.frames, doc.dim, doc.data)?)
}

/// Writes JSON when the path ends in `.json`, binary otherwise.
pub fn save_embedding(e: &TubeEmbedding, path: &Path) -> Result<(), StoreError> {
    if is_json(path) {
        write_atomic(path, embedding_to_json(e).as_bytes())
    } else {
        write_atomic(path, &encode_embedding(e))
    }
}

/// Reads either format, telling them apart by the magic bytes. Binary files
/// carry no id, so the file stem is used.
pub fn load_embedding(path: &Path) -> Result<TubeEmbedding, StoreError> {
    let bytes = read(path)?;
    if bytes.starts_with(EMBEDDING_MAGIC) {
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        decode_embedding(&bytes, &stem)
    } else {
        embedding_from_json(&String::from_utf8_lossy(&bytes))
    }
}

pub fn save_flow(flow: &FlowField, path: &Path) -> Result<(), StoreError> {
    write_atomic(path, &encode_flow(flow))
}

pub fn load_flow(path: &Path, video_id: &str) -> Result<FlowField, StoreError> {
    decode_flow(&read(path)?, video_id)
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}
