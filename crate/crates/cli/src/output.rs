//! Run directory, manifest and summary files.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use axivort::checks::Check;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::Common;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub struct RunDir {
    dir: PathBuf,
}

impl RunDir {
    pub fn create(dir: &Path) -> anyhow::Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn file(&self, name: &str) -> anyhow::Result<BufWriter<fs::File>> {
        let p = self.path(name);
        Ok(BufWriter::new(
            fs::File::create(&p).with_context(|| format!("creating {}", p.display()))?,
        ))
    }

    pub fn write_json(&self, name: &str, value: &impl Serialize) -> anyhow::Result<()> {
        let p = self.path(name);
        fs::write(&p, serde_json::to_string_pretty(value)? + "\n")
            .with_context(|| format!("writing {}", p.display()))
    }
}

/// Everything needed to repeat the run: the effective config, the build
/// and the reference constants it was checked against.
pub fn manifest(command: &str, config: &impl Serialize, common: &Common) -> anyhow::Result<Value> {
    let config = serde_json::to_value(config)?;
    Ok(json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
        "config_sha256": config_hash(&config)?,
        "quick": common.quick,
        "seed": common.seed,
        "oracle_constants_sha256": sha256_hex(axivort::constants::RAW.as_bytes()),
    }))
}

pub fn config_hash(config: &Value) -> anyhow::Result<String> {
    Ok(sha256_hex(serde_json::to_string(config)?.as_bytes()))
}

pub struct Outcome {
    pub checks: Vec<Check>,
    pub aborted: bool,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        !self.aborted && self.checks.iter().all(|c| c.pass)
    }

    pub fn exit_code(&self) -> ExitCode {
        if self.aborted {
            ExitCode::from(3)
        } else if self.passed() {
            ExitCode::SUCCESS
        } else {
            ExitCode::from(1)
        }
    }
}

pub fn print_checks(checks: &[Check]) {
    for c in checks {
        let tag = if c.pass { "PASS" } else { "FAIL" };
        match &c.error {
            Some(e) => println!("{tag} {}: {e}", c.name),
            None => println!("{tag} {}: {:e} (limit {:e})", c.name, c.value, c.threshold),
        }
    }
}

/// Writes `summary.json` and prints the checks.
pub fn finish(run: &RunDir, command: &str, checks: Vec<Check>, extra: Value) -> anyhow::Result<Outcome> {
    print_checks(&checks);
    let outcome = Outcome { checks, aborted: false };
    run.write_json(
        "summary.json",
        &json!({
            "command": command,
            "pass": outcome.passed(),
            "checks": outcome.checks,
            "results": extra,
        }),
    )?;
    Ok(outcome)
}
