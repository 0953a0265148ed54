// Copyright 2026 The noonforge Developers
// SPDX-License-Identifier: Apache-2.0

//! Output files and their provenance line.
//!
//! Every CSV starts with
//! `# noonforge <version> config_sha256=<hex> seed=<seed>` and every JSON
//! document carries the same three values under `provenance`. The hash is
//! taken over the effective configuration, after command-line overrides,
//! so two runs with equal hashes used equal inputs.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub version: &'static str,
    pub config_sha256: String,
    pub seed: u64,
}

impl Provenance {
    pub fn new(config: &RunConfig, seed: u64) -> Self {
        let canonical = serde_json::to_vec(config).expect("configuration serialises");
        let digest = Sha256::digest(&canonical);
        Provenance {
            version: env!("CARGO_PKG_VERSION"),
            config_sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
            seed,
        }
    }

    pub fn header(&self) -> String {
        format!(
            "# noonforge {} config_sha256={} seed={}",
            self.version, self.config_sha256, self.seed
        )
    }
}

/// Output directory plus provenance.
pub struct Sink {
    dir: PathBuf,
    provenance: Provenance,
}

impl Sink {
    pub fn new(dir: &Path, provenance: Provenance) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Sink {
            dir: dir.to_path_buf(),
            provenance,
        })
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Writes a CSV file: the provenance line, then whatever `body` emits.
    pub fn csv(
        &self,
        name: &str,
        body: impl FnOnce(&mut dyn Write) -> io::Result<()>,
    ) -> io::Result<PathBuf> {
        let path = self.dir.join(name);
        let mut w = BufWriter::new(fs::File::create(&path)?);
        writeln!(w, "{}", self.provenance.header())?;
        body(&mut w)?;
        w.flush()?;
        Ok(path)
    }

    /// Writes `value` as pretty JSON with a `provenance` member added.
    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> io::Result<PathBuf> {
        let mut v = serde_json::to_value(value).map_err(io::Error::other)?;
        if let serde_json::Value::Object(map) = &mut v {
            map.insert(
                "provenance".into(),
                serde_json::to_value(&self.provenance).map_err(io::Error::other)?,
            );
        }
        let path = self.dir.join(name);
        let mut text = serde_json::to_string_pretty(&v).map_err(io::Error::other)?;
        text.push('\n');
        fs::write(&path, text)?;
        Ok(path)
    }
}
