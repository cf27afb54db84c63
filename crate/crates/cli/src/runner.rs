//! Execution of a parsed configuration: worker pool, panics, output files and
//! the manifest.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult, Issue};
use crate::experiments::{self, Outcome};
use crate::table::{Stamp, Table};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub workers: usize,
    pub trials: u64,
    pub files: Vec<FileEntry>,
    pub warnings: Vec<String>,
    pub wall_time_seconds: f64,
}

/// Command line, then environment (both arrive through `cli`), then config,
/// then the machine.
pub fn resolve_workers(cli: Option<usize>, config: Option<usize>) -> CliResult<usize> {
    match cli.or(config) {
        Some(0) => Err(CliError::Config(vec![Issue::new("ensemble.workers", "must be at least 1")])),
        Some(n) => Ok(n),
        None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn panic_message(p: &(dyn std::any::Any + Send)) -> String {
    p.downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| p.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "unknown panic".into())
}

/// The experiment on a dedicated pool; a panic in any worker becomes a
/// numeric failure.
pub fn compute(cfg: &RunConfig, workers: usize) -> CliResult<Outcome> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))?;
    match catch_unwind(AssertUnwindSafe(|| pool.install(|| experiments::run(cfg)))) {
        Ok(r) => Ok(r?),
        Err(p) => Err(CliError::Numeric(format!("worker panicked: {}", panic_message(p.as_ref())))),
    }
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> CliResult<()>) -> CliResult<FileEntry> {
    let mut w = BufWriter::new(File::create(path)?);
    f(&mut w)?;
    w.flush()?;
    drop(w);
    let bytes = fs::read(path)?;
    Ok(FileEntry {
        name: path.file_name().expect("file path").to_string_lossy().into_owned(),
        sha256: hex::encode(Sha256::digest(&bytes)),
        bytes: bytes.len() as u64,
    })
}

fn write_tables(dir: &Path, cfg: &RunConfig, stamp: &Stamp, tables: &[Table], written: &mut Vec<PathBuf>) -> CliResult<Vec<FileEntry>> {
    let mut files = Vec::new();
    for t in tables {
        if cfg.output.format.csv() {
            let path = dir.join(format!("{}.csv", t.name));
            written.push(path.clone());
            files.push(write_file(&path, |w| t.write_csv(stamp, w))?);
        }
        if cfg.output.format.jsonl() {
            let path = dir.join(format!("{}.jsonl", t.name));
            written.push(path.clone());
            files.push(write_file(&path, |w| t.write_jsonl(stamp, w))?);
        }
    }
    Ok(files)
}

/// Full run: outputs first, manifest last. On failure no manifest exists and
/// files written by this run are removed.
pub fn execute(cfg: &RunConfig, workers: usize, command: &str) -> CliResult<Manifest> {
    let start = Instant::now();
    let dir = &cfg.output.dir;
    fs::create_dir_all(dir)?;
    let manifest_path = dir.join(MANIFEST);
    if manifest_path.exists() {
        fs::remove_file(&manifest_path)?;
    }

    let mut outcome = compute(cfg, workers)?;
    for t in &mut outcome.tables {
        t.canonicalize();
    }
    let stamp = Stamp {
        config_hash: cfg.config_hash(),
        seed: cfg.ensemble.seed,
    };
    let mut written = Vec::new();
    let result = write_tables(dir, cfg, &stamp, &outcome.tables, &mut written).and_then(|files| {
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config_hash: stamp.config_hash.clone(),
            seed: stamp.seed,
            workers,
            trials: cfg.ensemble.trials,
            files,
            warnings: outcome.warnings.clone(),
            wall_time_seconds: start.elapsed().as_secs_f64(),
        };
        let tmp = dir.join(format!("{MANIFEST}.tmp"));
        written.push(tmp.clone());
        write_file(&tmp, |w| {
            serde_json::to_writer_pretty(&mut *w, &manifest).map_err(|e| CliError::Io(e.into()))?;
            Ok(writeln!(w)?)
        })?;
        fs::rename(&tmp, &manifest_path)?;
        Ok(manifest)
    });
    if result.is_err() {
        for p in written {
            let _ = fs::remove_file(p);
        }
    }
    result
}
