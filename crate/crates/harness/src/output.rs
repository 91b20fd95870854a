//! Output files: CSV data with JSON sidecars, and `--verify` comparison
//! against files already on disk.

use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use crate::config::sha256_hex;
use crate::error::{HarnessError, HarnessResult};
use crate::simulate::RunRecord;

/// Version tag written into every sidecar.
pub const COUNTS_SCHEMA: &str = "ffuniv-counts/1";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputFile {
    pub name: String,
    pub bytes: Vec<u8>,
    /// Compared by `--verify`; false for files with timings.
    pub reproducible: bool,
}

impl OutputFile {
    pub fn data(name: impl Into<String>, bytes: Vec<u8>) -> Self {
        OutputFile {
            name: name.into(),
            bytes,
            reproducible: true,
        }
    }

    pub fn json<T: Serialize>(name: impl Into<String>, value: &T) -> Self {
        let mut bytes = serde_json::to_vec_pretty(value).expect("report serializes");
        bytes.push(b'\n');
        Self::data(name, bytes)
    }
}

/// Sidecar for a data file: carries the config hash and a digest of the data.
pub fn sidecar(data: &OutputFile, config_hash: &str, extra: serde_json::Value) -> OutputFile {
    let mut v = json!({
        "schema": COUNTS_SCHEMA,
        "file": data.name,
        "config_hash": config_hash,
        "data_sha256": sha256_hex(&data.bytes),
    });
    if let (Some(obj), serde_json::Value::Object(more)) = (v.as_object_mut(), extra) {
        obj.extend(more);
    }
    let stem = data
        .name
        .rsplit_once('.')
        .map_or(data.name.as_str(), |(s, _)| s);
    OutputFile::json(format!("{stem}.json"), &v)
}

/// One CSV and one sidecar per statistic, plus `run.json` with the timing.
pub fn simulation_outputs(rec: &RunRecord) -> Vec<OutputFile> {
    let mut files = Vec::new();
    for s in &rec.stats {
        let csv = OutputFile::data(
            format!("{}.csv", s.stat.slug()),
            s.empirical.to_csv().into_bytes(),
        );
        let side = sidecar(
            &csv,
            &rec.config_hash,
            json!({
                "stat": s.stat.to_string(),
                "trials": s.empirical.trials(),
                "comparison": s.comparison,
            }),
        );
        files.push(csv);
        files.push(side);
    }
    let mut run = OutputFile::json(
        "run.json",
        &json!({
            "config_hash": rec.config_hash,
            "config": rec.config,
            "wall_time_s": rec.wall_time_s,
        }),
    );
    run.reproducible = false;
    files.push(run);
    files
}

pub fn write_outputs(dir: &Path, files: &[OutputFile]) -> HarnessResult<()> {
    fs::create_dir_all(dir)
        .map_err(|e| HarnessError::invalid(format!("cannot create {}: {e}", dir.display())))?;
    for f in files {
        let path = dir.join(&f.name);
        fs::write(&path, &f.bytes)
            .map_err(|e| HarnessError::invalid(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

/// Compares freshly computed outputs with those in `dir`: every reproducible
/// file must exist with identical bytes, and every JSON file on disk that
/// names a config hash must name `config_hash`.
pub fn verify_outputs(dir: &Path, files: &[OutputFile], config_hash: &str) -> HarnessResult<()> {
    let mut problems = Vec::new();
    for f in files {
        let path = dir.join(&f.name);
        match fs::read(&path) {
            Err(_) if f.reproducible => problems.push(format!("{} missing", f.name)),
            Err(_) => {}
            Ok(old) => {
                if f.name.ends_with(".json") {
                    let stored = serde_json::from_slice::<serde_json::Value>(&old)
                        .ok()
                        .and_then(|v| {
                            v.get("config_hash")
                                .and_then(|h| h.as_str())
                                .map(str::to_string)
                        });
                    if let Some(h) = stored {
                        if h != config_hash {
                            problems.push(format!(
                                "{}: config hash {h} differs from {config_hash}",
                                f.name
                            ));
                        }
                    }
                }
                if f.reproducible && old != f.bytes {
                    problems.push(format!(
                        "{}: sha256 {} on disk, {} recomputed",
                        f.name,
                        sha256_hex(&old),
                        sha256_hex(&f.bytes)
                    ));
                }
            }
        }
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(HarnessError::verification(problems.join("; ")))
    }
}

/// Writes the files, or with `verify` checks them against `dir` instead.
pub fn emit(
    dir: &Path,
    files: &[OutputFile],
    config_hash: &str,
    verify: bool,
) -> HarnessResult<()> {
    if verify {
        verify_outputs(dir, files, config_hash)
    } else {
        write_outputs(dir, files)
    }
}
