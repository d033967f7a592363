//! Reproducible-run manifests.
//!
//! Every CLI invocation writes a JSON `RunManifest` next to its data files:
//! the subcommand, the fully resolved parameter set, SHA-256 digests of all
//! input files, the list of emitted outputs and any scalar results (fitted
//! exponents, energies, comparison reports). Re-running from a manifest in
//! deterministic mode reproduces the output files byte for byte.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{MqedError, Result};

/// Name the manifest file is written under inside the output directory.
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    /// Tool name, always "mqed".
    pub tool: String,
    /// Crate version the run was produced with.
    pub version: String,
    /// Subcommand that was dispatched.
    pub subcommand: String,
    /// Argument list sufficient to replay the run (excluding the output
    /// directory, which `rerun` may redirect).
    pub argv: Vec<String>,
    /// Fully resolved parameters, defaults included.
    pub parameters: BTreeMap<String, serde_json::Value>,
    /// SHA-256 digest of every input file, keyed by the path as given.
    pub input_digests: BTreeMap<String, String>,
    /// Files emitted by the run, relative to the output directory.
    pub outputs: Vec<String>,
    /// Scalar results worth recording (fit exponents, energies, report
    /// numbers).
    pub results: BTreeMap<String, serde_json::Value>,
    /// Whether the run used the deterministic (ordered-reduction) mode.
    pub deterministic: bool,
    /// Wall-clock runtime in seconds.
    pub runtime_s: f64,
}

impl RunManifest {
    pub fn new(subcommand: impl Into<String>, argv: Vec<String>) -> Self {
        RunManifest {
            tool: "mqed".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            subcommand: subcommand.into(),
            argv,
            parameters: BTreeMap::new(),
            input_digests: BTreeMap::new(),
            outputs: Vec::new(),
            results: BTreeMap::new(),
            deterministic: true,
            runtime_s: 0.0,
        }
    }

    /// Record a resolved parameter value.
    pub fn set_param(&mut self, key: &str, value: impl Serialize) {
        self.parameters.insert(
            key.to_string(),
            serde_json::to_value(value).expect("parameter serializes"),
        );
    }

    /// Record a scalar result.
    pub fn set_result(&mut self, key: &str, value: impl Serialize) {
        self.results
            .insert(key.to_string(), serde_json::to_value(value).expect("result serializes"));
    }

    /// Digest an input file and record it.
    pub fn record_input(&mut self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let bytes = std::fs::read(path)?;
        self.input_digests.insert(path.display().to_string(), sha256_hex(&bytes));
        Ok(())
    }

    pub fn record_output(&mut self, name: impl Into<String>) {
        self.outputs.push(name.into());
    }

    /// Serialize to pretty JSON in `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let path = dir.as_ref().join(MANIFEST_FILE);
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        let manifest: RunManifest = serde_json::from_str(&text)?;
        if manifest.tool != "mqed" {
            return Err(MqedError::Config(format!(
                "manifest tool is `{}`, expected `mqed`",
                manifest.tool
            )));
        }
        Ok(manifest)
    }
}

/// Lowercase hex SHA-256 of a byte slice.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for byte in digest {
        use std::fmt::Write;
        write!(out, "{byte:02x}").expect("writing to String cannot fail");
    }
    out
}
