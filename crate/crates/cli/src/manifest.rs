//! Artifact writing with content hashes for reproducible runs.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Files written into one output directory, keyed by name.
#[derive(Debug)]
pub struct Outputs {
    dir: PathBuf,
    artifacts: BTreeMap<String, String>,
}

impl Outputs {
    pub fn create(dir: &Path) -> anyhow::Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Outputs { dir: dir.to_path_buf(), artifacts: BTreeMap::new() })
    }

    pub fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> anyhow::Result<()> {
        let bytes = contents.as_ref();
        let path = self.dir.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.artifacts.insert(name.to_string(), sha256_hex(bytes));
        Ok(())
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Writes `manifest.json` listing every artifact so far and returns its hash.
    ///
    /// `body` holds the run description; it must not contain anything that
    /// varies between identical runs.
    pub fn finish(mut self, mut body: Value) -> anyhow::Result<String> {
        body["tool"] = json!("monodecomp");
        body["version"] = json!(env!("CARGO_PKG_VERSION"));
        body["artifacts"] = json!(self.artifacts);
        let mut text = serde_json::to_string_pretty(&body)?;
        text.push('\n');
        let hash = sha256_hex(text.as_bytes());
        self.write("manifest.json", text)?;
        Ok(hash)
    }
}

pub fn pretty(value: &impl serde::Serialize) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}
