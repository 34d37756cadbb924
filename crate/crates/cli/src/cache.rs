//! Write-once result cache keyed by instance hash.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use serde::Serialize;

use crate::error::CliResult;
use crate::record::{versions, RunRecord};

pub const DEFAULT_CACHE_DIR: &str = ".carpet-cache";
const TEMP_PREFIX: &str = ".tmp-";

#[derive(Clone, Debug)]
pub struct Cache {
    dir: PathBuf,
}

#[derive(Debug, Default, Serialize)]
pub struct GcSummary {
    pub scanned: usize,
    pub removed: usize,
    pub kept: usize,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Cache { dir: dir.into() }
    }

    fn path(&self, hash: &str) -> PathBuf {
        self.dir.join(format!("{hash}.json"))
    }

    /// Stored record for `hash`, or `None`. An entry that does not parse or
    /// does not belong to `hash` is reported and ignored.
    pub fn lookup(&self, hash: &str) -> Option<RunRecord> {
        let path = self.path(hash);
        let bytes = fs::read(&path).ok()?;
        match serde_json::from_slice::<RunRecord>(&bytes) {
            Ok(record) if record.instance_hash == hash => Some(record),
            _ => {
                eprintln!("warning: corrupt cache entry {}, recomputing", path.display());
                None
            }
        }
    }

    /// Writes `record` unless an equal entry exists. A differing entry that
    /// is itself valid is kept and reported; a corrupt one is replaced.
    pub fn store(&self, record: &RunRecord) -> CliResult<()> {
        fs::create_dir_all(&self.dir)?;
        let path = self.path(&record.instance_hash);
        let mut tmp = tempfile::Builder::new().prefix(TEMP_PREFIX).tempfile_in(&self.dir)?;
        tmp.write_all(serde_json::to_string(record)?.as_bytes())?;
        match tmp.persist_noclobber(&path) {
            Ok(_) => Ok(()),
            Err(e) if e.error.kind() == std::io::ErrorKind::AlreadyExists => {
                match self.lookup(&record.instance_hash) {
                    Some(existing) if existing.result == record.result => {}
                    Some(_) => eprintln!(
                        "warning: cache entry {} differs from the recomputed result; keeping the first",
                        path.display()
                    ),
                    None => {
                        e.file.persist(&path).map_err(|e| e.error)?;
                    }
                }
                Ok(())
            }
            Err(e) => Err(e.error.into()),
        }
    }

    /// Removes temporary files, unreadable entries and entries written by
    /// other versions; with `all`, every entry.
    pub fn gc(&self, all: bool) -> CliResult<GcSummary> {
        let mut summary = GcSummary::default();
        let entries = match fs::read_dir(&self.dir) {
            Ok(entries) => entries,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(summary),
            Err(e) => return Err(e.into()),
        };
        let current = versions();
        let mut paths: Vec<PathBuf> = entries.map(|e| e.map(|e| e.path())).collect::<Result<_, _>>()?;
        paths.sort();
        for path in paths {
            let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
            let is_temp = name.starts_with(TEMP_PREFIX);
            let is_entry = name.ends_with(".json") && !is_temp;
            if !is_entry && !is_temp {
                continue;
            }
            summary.scanned += 1;
            let stale = is_temp
                || all
                || fs::read(&path)
                    .ok()
                    .and_then(|b| serde_json::from_slice::<RunRecord>(&b).ok())
                    .is_none_or(|r| r.versions != current || format!("{}.json", r.instance_hash) != name);
            if stale {
                fs::remove_file(&path)?;
                summary.removed += 1;
            } else {
                summary.kept += 1;
            }
        }
        Ok(summary)
    }
}
