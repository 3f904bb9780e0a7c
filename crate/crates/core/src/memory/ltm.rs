use std::collections::HashMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::MemoryError;
use crate::kg::EntityId;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum ArchiveRecord {
    FocusFlushed { entity: EntityId, last_turn: u32, flushed_at: u32 },
    SessionSummary { turns: u32, explored_topics: Vec<String>, explored_modules: Vec<String> },
}

/// Append-only per-session archive. Records are mirrored in memory and, when
/// a directory is configured, written as one JSON-lines file per session.
#[derive(Debug, Default)]
pub struct LtmArchive {
    dir: Option<PathBuf>,
    records: Mutex<HashMap<String, Vec<ArchiveRecord>>>,
}

impl LtmArchive {
    pub fn in_memory() -> Self {
        LtmArchive::default()
    }

    pub fn on_disk(dir: impl AsRef<Path>) -> Result<Self, MemoryError> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir).map_err(|e| MemoryError::Resource {
            path: dir.display().to_string(),
            msg: e.to_string(),
        })?;
        Ok(LtmArchive { dir: Some(dir), records: Mutex::default() })
    }

    pub fn append(&self, session_id: &str, record: ArchiveRecord) -> Result<(), MemoryError> {
        let mut records = self.records.lock().unwrap_or_else(|p| p.into_inner());
        if let Some(dir) = &self.dir {
            let path = dir.join(format!("{session_id}.jsonl"));
            let line = serde_json::to_string(&record).expect("archive records serialize");
            let io = |e: std::io::Error| MemoryError::Resource {
                path: path.display().to_string(),
                msg: e.to_string(),
            };
            let mut file = OpenOptions::new().create(true).append(true).open(&path).map_err(io)?;
            writeln!(file, "{line}").map_err(io)?;
        }
        records.entry(session_id.to_string()).or_default().push(record);
        Ok(())
    }

    pub fn records(&self, session_id: &str) -> Vec<ArchiveRecord> {
        let records = self.records.lock().unwrap_or_else(|p| p.into_inner());
        records.get(session_id).cloned().unwrap_or_default()
    }
}
