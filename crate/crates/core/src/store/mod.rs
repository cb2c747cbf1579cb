//! Reading and writing banks, embeddings, flow fields and manifests, plus the
//! triplet index used for sampling.
//!
//! Structure goes to JSON and bulk numbers to little-endian binary:
//!
//! * embedding binary: `"TMKE"`, then `u32` version, `T`, `D`, then `T·D`
//!   `f32` values row-major;
//! * flow binary: `"TMKF"`, then `u32` version, count, `H`, `W`, then
//!   `count·H·W` pixels of `f32` `dx, dy`.
//!
//! Every write goes to a temporary file in the target directory that is then
//! renamed over the destination.

mod bank;
mod binary;
mod index;
mod manifest;

pub use bank::{bank_from_json, bank_to_json, load_bank, save_bank, BANK_VERSION};
pub use binary::{
    decode_embedding, decode_flow, embedding_from_json, embedding_to_json, encode_embedding, encode_flow,
    load_embedding, load_flow, save_embedding, save_flow, BINARY_VERSION, EMBEDDING_MAGIC, FLOW_MAGIC,
};
pub use index::{build_index, TripletIndex};
pub use manifest::{fnv1a64, hash_hex, Manifest, ManifestEntry};

use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::model::ModelError;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}, column {column}, at {field}: {message}")]
    Schema {
        line: usize,
        column: usize,
        field: String,
        message: String,
    },
    #[error("unsupported version {found} (this build reads version {expected})")]
    Version { found: u64, expected: u64 },
    #[error("expected magic {expected:?}, found {found:?}")]
    Magic { expected: String, found: String },
    #[error("binary payload holds {found} bytes, expected {expected}")]
    Length { expected: usize, found: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl StoreError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_owned(),
            source,
        }
    }
}

/// Writes `bytes` to a sibling temporary file and renames it over `path`.
/// Missing parent directories are created.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| StoreError::io(path, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| StoreError::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| StoreError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| StoreError::io(path, e))?;
    tmp.persist(path).map_err(|e| StoreError::io(path, e.error))?;
    Ok(())
}

pub(crate) fn read(path: &Path) -> Result<Vec<u8>, StoreError> {
    std::fs::read(path).map_err(|e| StoreError::io(path, e))
}
