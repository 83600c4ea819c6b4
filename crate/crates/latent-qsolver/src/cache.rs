//! On-disk cache of solved tables, stored as JSON next to their key.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::table::LatentQTable;

/// Identity of a cached table. `env` should encode the full environment parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheKey {
    pub env: String,
    pub gamma: f64,
    pub resolution: f64,
    pub tol: f64,
}

#[derive(Serialize, Deserialize)]
struct Entry {
    key: CacheKey,
    table: LatentQTable,
}

#[derive(Debug, Clone)]
pub struct QCache {
    dir: PathBuf,
}

impl QCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, key: &CacheKey) -> Result<PathBuf> {
        let digest = Sha256::digest(serde_json::to_vec(key)?);
        let name: String = digest.iter().take(12).map(|b| format!("{b:02x}")).collect();
        Ok(self.dir.join(format!("qtable-{name}.json")))
    }

    /// A stored table whose key matches exactly, if any.
    pub fn load(&self, key: &CacheKey) -> Result<Option<LatentQTable>> {
        let path = self.path(key)?;
        let Ok(bytes) = fs::read(&path) else {
            return Ok(None);
        };
        match serde_json::from_slice::<Entry>(&bytes) {
            Ok(entry) if entry.key == *key => Ok(Some(entry.table)),
            _ => Ok(None),
        }
    }

    pub fn store(&self, key: &CacheKey, table: &LatentQTable) -> Result<PathBuf> {
        fs::create_dir_all(&self.dir)?;
        let path = self.path(key)?;
        let entry = Entry {
            key: key.clone(),
            table: table.clone(),
        };
        fs::write(&path, serde_json::to_vec(&entry)?)?;
        Ok(path)
    }
}
