// Copyright 2026 The pqmselect developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Provenance stamp written next to every output file. Contains no
//! timestamps or host state, so identical inputs produce identical
//! manifests.

use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use pqmselect_core::error::Result;

#[derive(Serialize)]
pub struct RunManifest {
    pub command: String,
    pub artifact_version: String,
    pub master_seed: u64,
    pub input_path: Option<String>,
    /// SHA-256 of the input file bytes.
    pub input_fingerprint: Option<String>,
    /// Full echo of the resolved run configuration.
    pub config: serde_json::Value,
}

impl RunManifest {
    pub fn for_run(
        command: &str,
        master_seed: u64,
        input: Option<&Path>,
        config: serde_json::Value,
    ) -> Result<Self> {
        let fingerprint = match input {
            Some(path) => {
                let bytes = fs::read(path)?;
                let mut hasher = Sha256::new();
                hasher.update(&bytes);
                let digest = hasher.finalize();
                Some(digest.iter().map(|b| format!("{b:02x}")).collect())
            }
            None => None,
        };
        Ok(RunManifest {
            command: command.to_string(),
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            master_seed,
            input_path: input.map(|p| p.display().to_string()),
            input_fingerprint: fingerprint,
            config,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}
