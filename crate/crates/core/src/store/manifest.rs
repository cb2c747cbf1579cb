use std::path::Path;

use serde::{Deserialize, Serialize};

use super::bank::parse;
use super::{read, write_atomic, StoreError};

pub const HASH_ALGORITHM: &str = "fnv1a-64";

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    use std::hash::Hasher;
    let mut h = fnv::FnvHasher::default();
    h.write(bytes);
    h.finish()
}

pub fn hash_hex(bytes: &[u8]) -> String {
    format!("{:016x}", fnv1a64(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Relative to the manifest's directory, with `/` separators.
    pub path: String,
    pub bytes: u64,
    pub hash: String,
}

/// Lists the files of an output directory with their content hashes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub hash_algorithm: String,
    #[serde(default)]
    pub metadata: serde_json::Map<String, serde_json::Value>,
    pub files: Vec<ManifestEntry>,
}

impl Default for Manifest {
    fn default() -> Self {
        Self {
            hash_algorithm: HASH_ALGORITHM.into(),
            metadata: serde_json::Map::new(),
            files: Vec::new(),
        }
    }
}

impl Manifest {
    pub fn record(&mut self, path: impl Into<String>, contents: &[u8]) {
        self.files.push(ManifestEntry {
            path: path.into(),
            bytes: contents.len() as u64,
            hash: hash_hex(contents),
        });
    }

    /// Writes `contents` under `root` and records it.
    pub fn write_file(&mut self, root: &Path, relative: &str, contents: &[u8]) -> Result<(), StoreError> {
        write_atomic(&root.join(relative), contents)?;
        self.record(relative, contents);
        Ok(())
    }

    /// Paths under `root` whose current contents no longer match.
    pub fn stale_files(&self, root: &Path) -> Result<Vec<String>, StoreError> {
        let mut stale = Vec::new();
        for f in &self.files {
            let bytes = read(&root.join(&f.path))?;
            if bytes.len() as u64 != f.bytes || hash_hex(&bytes) != f.hash {
                stale.push(f.path.clone());
            }
        }
        Ok(stale)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifests always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, StoreError> {
        parse(text)
    }
}
