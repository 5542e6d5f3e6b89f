use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// SHA-256 over the command name, the contents of every input file and the
/// effective settings. Identical runs produce identical fingerprints.
pub struct Fingerprint {
    hasher: Sha256,
}

impl Fingerprint {
    pub fn new(command: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(command.as_bytes());
        hasher.update([0]);
        Fingerprint { hasher }
    }

    pub fn file(mut self, path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.hasher.update(Sha256::digest(&bytes));
        Ok(self)
    }

    pub fn optional_file(self, path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => self.file(p),
            None => Ok(self.bytes(b"-")),
        }
    }

    pub fn bytes(mut self, bytes: &[u8]) -> Self {
        self.hasher.update(Sha256::digest(bytes));
        self
    }

    pub fn settings<T: Serialize>(self, settings: &T) -> Self {
        let json = serde_json::to_vec(settings).expect("settings serialize");
        self.bytes(&json)
    }

    pub fn finish(self) -> String {
        hex::encode(self.hasher.finalize())
    }
}
