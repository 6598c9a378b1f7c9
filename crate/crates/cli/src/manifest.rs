use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::Failure;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: String,
    pub sha256: String,
}

/// Record of one run: enough to repeat it and to check the repeat.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: BTreeMap<String, String>,
    pub parameters: BTreeMap<String, Value>,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub outputs: Vec<OutputFile>,
    pub pass: bool,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Output directory plus the manifest being assembled for it.
pub struct Run {
    dir: PathBuf,
    pub manifest: RunManifest,
}

impl Run {
    pub fn new(command: &str, dir: &Path) -> Result<Run, Failure> {
        fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
        Ok(Run {
            dir: dir.to_path_buf(),
            manifest: RunManifest {
                command: command.to_string(),
                inputs: BTreeMap::new(),
                parameters: BTreeMap::new(),
                seed: None,
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                outputs: Vec::new(),
                pass: true,
            },
        })
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("parameters serialize");
        self.manifest.parameters.insert(key.to_string(), v);
    }

    /// Reads an input file and records its digest.
    pub fn read(&mut self, path: &Path) -> Result<Vec<u8>, Failure> {
        let bytes = fs::read(path).map_err(|e| Failure::io(path, e))?;
        self.manifest.inputs.insert(path.display().to_string(), sha256_hex(&bytes));
        Ok(bytes)
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<(), Failure> {
        write_atomic(&self.dir.join(name), bytes)?;
        self.manifest.outputs.push(OutputFile { path: name.to_string(), sha256: sha256_hex(bytes) });
        Ok(())
    }

    pub fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<(), Failure> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(Failure::internal)?;
        bytes.push(b'\n');
        self.write_bytes(name, &bytes)
    }

    /// Compact form for artifacts holding whole complexes.
    pub fn write_json_compact(&mut self, name: &str, value: &impl Serialize) -> Result<(), Failure> {
        let mut bytes = serde_json::to_vec(value).map_err(Failure::internal)?;
        bytes.push(b'\n');
        self.write_bytes(name, &bytes)
    }

    pub fn finish(self) -> Result<bool, Failure> {
        let pass = self.manifest.pass;
        let mut bytes = serde_json::to_vec_pretty(&self.manifest).map_err(Failure::internal)?;
        bytes.push(b'\n');
        let name = format!("{}.manifest.json", self.manifest.command);
        write_atomic(&self.dir.join(name), &bytes)?;
        Ok(pass)
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let tmp = path.with_extension("partial");
    let mut f = fs::File::create(&tmp).map_err(|e| Failure::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| Failure::io(&tmp, e))?;
    f.sync_all().map_err(|e| Failure::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Failure::io(path, e))
}
