//! On-disk layout of a data directory:
//!
//! ```text
//! <data_dir>/events.log                     one event per line
//! <data_dir>/snapshots/state-<count>.snap   engine snapshot after <count> events
//! ```

use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::analytics::{parse_log, Event, ParseError};

pub const EVENTS_FILE: &str = "events.log";
pub const SNAPSHOT_DIR: &str = "snapshots";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Corrupt {
        path: PathBuf,
        #[source]
        source: ParseError,
    },
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_owned(),
        source,
    }
}

/// Contents found in a data directory at startup.
#[derive(Debug, Default)]
pub struct Recovered {
    pub events: Vec<Event>,
    /// Text of the newest snapshot that the log fully covers.
    pub snapshot: Option<String>,
}

#[derive(Debug)]
pub struct Store {
    dir: PathBuf,
    events: File,
}

impl Store {
    /// Opens (creating if needed) a data directory and reads what it holds.
    pub fn open(dir: impl Into<PathBuf>) -> Result<(Store, Recovered), StoreError> {
        let dir = dir.into();
        let snaps = dir.join(SNAPSHOT_DIR);
        fs::create_dir_all(&snaps).map_err(io(&snaps))?;
        let log_path = dir.join(EVENTS_FILE);
        let events = match fs::read_to_string(&log_path) {
            Ok(text) => parse_log(&text).map_err(|source| StoreError::Corrupt {
                path: log_path.clone(),
                source,
            })?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
            Err(e) => return Err(io(&log_path)(e)),
        };
        let snapshot = latest_snapshot(&snaps, events.len())?;
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&log_path)
            .map_err(io(&log_path))?;
        Ok((Store { dir, events: file }, Recovered { events, snapshot }))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Appends one event line and flushes it to the OS.
    pub fn append(&mut self, event: &Event) -> Result<(), StoreError> {
        let line = format!("{event}\n");
        let path = self.dir.join(EVENTS_FILE);
        self.events.write_all(line.as_bytes()).map_err(io(&path))?;
        self.events.flush().map_err(io(&path))
    }

    /// Writes a snapshot covering the first `count` events. The file is
    /// written under a temporary name and renamed into place.
    pub fn write_snapshot(&self, count: usize, text: &str) -> Result<PathBuf, StoreError> {
        let snaps = self.dir.join(SNAPSHOT_DIR);
        let tmp = snaps.join(format!(".state-{count:012}.tmp"));
        let path = snaps.join(snapshot_name(count));
        fs::write(&tmp, text).map_err(io(&tmp))?;
        fs::rename(&tmp, &path).map_err(io(&path))?;
        Ok(path)
    }
}

fn snapshot_name(count: usize) -> String {
    format!("state-{count:012}.snap")
}

fn snapshot_count(name: &str) -> Option<usize> {
    name.strip_prefix("state-")?.strip_suffix(".snap")?.parse().ok()
}

fn latest_snapshot(dir: &Path, log_len: usize) -> Result<Option<String>, StoreError> {
    let mut best: Option<(usize, PathBuf)> = None;
    for entry in fs::read_dir(dir).map_err(io(dir))? {
        let entry = entry.map_err(io(dir))?;
        let name = entry.file_name();
        let Some(count) = name.to_str().and_then(snapshot_count) else {
            continue;
        };
        if count <= log_len && best.as_ref().is_none_or(|(c, _)| count > *c) {
            best = Some((count, entry.path()));
        }
    }
    best.map(|(_, path)| fs::read_to_string(&path).map_err(io(&path)))
        .transpose()
}
