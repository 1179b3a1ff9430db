use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use spc_core::config::HarnessConfig;

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool_version: &'static str,
    /// SHA-256 of the effective configuration after flag overrides.
    pub config_hash: String,
    pub seed: Option<u64>,
    pub subcommand: &'static str,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u128>,
}

pub fn config_hash(cfg: &HarnessConfig) -> String {
    Sha256::digest(cfg.canonical_json().as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub struct ManifestBuilder {
    manifest: RunManifest,
    started: Option<Instant>,
}

impl ManifestBuilder {
    pub fn new(subcommand: &'static str, cfg: &HarnessConfig, seed: Option<u64>, timing: bool) -> Self {
        Self {
            manifest: RunManifest {
                tool_version: env!("CARGO_PKG_VERSION"),
                config_hash: config_hash(cfg),
                seed,
                subcommand,
                inputs: Vec::new(),
                outputs: Vec::new(),
                wall_time_ms: None,
            },
            started: timing.then(Instant::now),
        }
    }

    pub fn input(&mut self, p: &Path) -> &mut Self {
        self.manifest.inputs.push(p.display().to_string());
        self
    }

    pub fn output(&mut self, p: &Path) -> &mut Self {
        self.manifest.outputs.push(p.display().to_string());
        self
    }

    pub fn finish(&self) -> RunManifest {
        let mut m = self.manifest.clone();
        m.wall_time_ms = self.started.map(|t| t.elapsed().as_millis());
        m
    }
}

/// A report document: the manifest followed by the payload's own fields.
#[derive(Serialize)]
pub struct Document<'a, T: Serialize> {
    pub manifest: RunManifest,
    #[serde(flatten)]
    pub body: &'a T,
}
